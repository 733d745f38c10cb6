"""Models package for tompTracker."""
