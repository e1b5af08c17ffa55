"""Two-stage diffusion scene layout generation."""

__version__ = "0.1.0"
