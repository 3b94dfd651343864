"""bilinorm - geometry of finite-dimensional Banach spaces and bilinear operators."""

__version__ = "1.0.0"
