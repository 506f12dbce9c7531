"""noteforge: instructional videos in, structured interactive notes out."""

__version__ = "0.1.0"
