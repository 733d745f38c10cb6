"""Learnable components and per-sequence tracker state."""
