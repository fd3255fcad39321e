"""Multi-robot graph coverage planning with informative loop-edge selection."""

__version__ = "0.1.0"
