"""Multi-robot coverage path planning over polygonal fields with exclusion zones."""

__version__ = "0.1.0"
