"""Gauges, Funk/Hilbert/Thompson metrics, gauge-reversing maps and horofunctions on convex cones."""
from .cones import ConeSpec, lorentz, orthant, poly_h, poly_v, product, psd
from .errors import ConeGaugeError
from .gauges import funk, gauge, hilbert, rfunk, thompson
from .maps import classify, vinberg_star

__version__ = "0.1.0"

__all__ = [
    "ConeSpec",
    "ConeGaugeError",
    "classify",
    "funk",
    "gauge",
    "hilbert",
    "lorentz",
    "orthant",
    "poly_h",
    "poly_v",
    "product",
    "psd",
    "rfunk",
    "thompson",
    "vinberg_star",
]
