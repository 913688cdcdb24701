"""Exact finite-depth computations with affine Lie algebra modules, the
vertex algebra V(l, 0) and two-point fusion on the sphere Q(z)."""

from .field import Field, QQ_FIELD
from .liealg import LieAlgebra, build_sl
from .affine import InducedModule, contragredient, vacuum_module, weyl_module
from .sugawara import Sugawara, central_charge
from .voa import VertexOperators, conformal_vector, generator_state
from .fusion import (FusionSpace, KLModel, QzActions, TensorWindow, check_slt,
                     compute_circ, compute_hboxtr, compute_ZN, fusion_report)

__version__ = "0.1.0"

__all__ = [
    "Field", "QQ_FIELD", "LieAlgebra", "build_sl", "InducedModule", "contragredient",
    "vacuum_module", "weyl_module", "Sugawara", "central_charge", "VertexOperators",
    "conformal_vector", "generator_state", "FusionSpace", "KLModel", "QzActions",
    "TensorWindow", "check_slt", "compute_circ", "compute_hboxtr", "compute_ZN",
    "fusion_report",
]
