"""Numerical curvature toolkit: curvature decomposition, hypersurface geometry,
conformal rescaling, spectral stability and four-dimensional Weyl splitting."""

__version__ = "0.1.0"
