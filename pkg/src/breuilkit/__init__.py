"""Exact computations with Breuil modules with tame descent data for GL_3."""

from .breuil_rings import RElem, RRing, SBarElem, get_ring, modp_ring
from .coeff import Dual, Fq, PrimeCtx, ZpN
from .dd_matrix import DDMatrix, dd_adjugate, dd_det, dd_mul
from .gauge import FiltrationMatrix, GaugeData, diagonalize, ordinary_form_modp
from .monodromy import MonodromyData, OrdinaryModule, monodromy_bruteforce, monodromy_closed_form

__all__ = [
    "DDMatrix",
    "Dual",
    "FiltrationMatrix",
    "Fq",
    "GaugeData",
    "MonodromyData",
    "OrdinaryModule",
    "PrimeCtx",
    "RElem",
    "RRing",
    "SBarElem",
    "ZpN",
    "dd_adjugate",
    "dd_det",
    "dd_mul",
    "diagonalize",
    "get_ring",
    "modp_ring",
    "monodromy_bruteforce",
    "monodromy_closed_form",
    "ordinary_form_modp",
]
