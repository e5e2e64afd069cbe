"""Sparse samples of dilated analytic curves on the torus: Weyl sums, discrepancy,
van der Corput bookkeeping, Diophantine counterexamples and fourth moments."""
from .curvekit import CurveFamily, get_family, rnd_order
from .dioph import bad_dilation_generic, bad_dilation_poly, dirichlet
from .equidist import box_discrepancy, equidist_verdict, sample_measure, weyl_report, weyl_sum
from .moments import fourth_moment, singular_proximity_count
from .phase import Dilation, reduced_phase
from .sublevel import alpha_fit, sublevel_intervals
from .vdc import schedule_sweep, vdc_bound

__version__ = "0.1.0"

__all__ = [
    "CurveFamily",
    "Dilation",
    "alpha_fit",
    "bad_dilation_generic",
    "bad_dilation_poly",
    "box_discrepancy",
    "dirichlet",
    "equidist_verdict",
    "fourth_moment",
    "get_family",
    "reduced_phase",
    "rnd_order",
    "sample_measure",
    "schedule_sweep",
    "singular_proximity_count",
    "sublevel_intervals",
    "vdc_bound",
    "weyl_report",
    "weyl_sum",
]
