"""
diffalg-workbench - 微分代数工作台

有序排序下的微分约化, 自约化集与 Rosenfeld 判据, 截断中的 Gröbner 基与饱和,
以及有限群在 G-微分多项式环上的作用.
"""

__version__ = "0.1.0"

from .diffpoly import Ambient, DerivOp, DiffPoly, Indeterminate
from .gaction import GroupSpec, g_invariance_check, resolve_group, sigma_apply
from .ideals import Truncation, TruncatedIdeal, saturate
from .parser import parse_poly, print_poly
from .reduction import AutoreducedSet, diff_remainder, validate_autoreduced
from .rosenfeld import charset_report, ideal_equal_charsets, is_coherent

__all__ = [
    "Ambient",
    "DerivOp",
    "DiffPoly",
    "Indeterminate",
    "GroupSpec",
    "g_invariance_check",
    "resolve_group",
    "sigma_apply",
    "Truncation",
    "TruncatedIdeal",
    "saturate",
    "parse_poly",
    "print_poly",
    "AutoreducedSet",
    "diff_remainder",
    "validate_autoreduced",
    "charset_report",
    "ideal_equal_charsets",
    "is_coherent",
]
