"""
Transformer model prediction tracker, trained and evaluated on synthetic
sequences.
"""
