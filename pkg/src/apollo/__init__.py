"""Exact Apollonian circle packings: generation, orbit counting, sieving and spectral formulas."""

__version__ = "0.1.0"

from .descartes import Quadruple, apply_generator, eval_form, reduce_to_root
from .packing import Circle, generate, packing_spec
from .census import count_orbit, count_table, fit_exponent

__all__ = [
    "Quadruple",
    "apply_generator",
    "eval_form",
    "reduce_to_root",
    "Circle",
    "generate",
    "packing_spec",
    "count_orbit",
    "count_table",
    "fit_exponent",
]
