"""Multi-dimensional signal mappings for BICM-ID over Rayleigh fading."""

__version__ = "0.1.0"
