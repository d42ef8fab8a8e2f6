"""Video/text dual-encoder for dynamic facial expression recognition, on a from-scratch autodiff engine."""

__version__ = "0.1.0"
