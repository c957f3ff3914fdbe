"""Distance-to-set Bayesian models."""
__version__ = "0.1.0"
