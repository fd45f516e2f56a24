"""Numerical verification lab for the holonomy of Painleve VI along the leaf at infinity."""
from .elliptic_curve import EllipticCurve, Periods, fundamental_periods
from .holonomy_lab import Jet2, TransversalFrame, holonomy_jet, holonomy_nonlinear
from .monodromy_engine import monodromy_representation, numeric_monodromy
from .orbifold_group import NormalForm, reduce
from .pvi_model import PviParameters, derive_parameters
from .variational_systems import build_e1, build_e2, closed_form_T, triangularize

__version__ = "0.1.0"

__all__ = [
    "EllipticCurve",
    "Periods",
    "fundamental_periods",
    "Jet2",
    "TransversalFrame",
    "holonomy_jet",
    "holonomy_nonlinear",
    "monodromy_representation",
    "numeric_monodromy",
    "NormalForm",
    "reduce",
    "PviParameters",
    "derive_parameters",
    "build_e1",
    "build_e2",
    "closed_form_T",
    "triangularize",
]
