"""Fast-time micro-Doppler signature extraction for FMCW radar."""

__version__ = "0.1.0"
