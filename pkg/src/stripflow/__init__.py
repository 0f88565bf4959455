"""Pseudo-spectral solvers for damped-wave boundary-layer flow on a periodic
strip, plus the dyadic-block / Gevrey-weighted norm machinery used to verify
exponential decay and the small-aspect-ratio limit."""

__version__ = "0.1.0"
