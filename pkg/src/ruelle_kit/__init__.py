"""Ruelle transfer operators, RPF eigendata and KMS machinery on symbolic spaces and k-graphs."""

from .errors import RuelleKitError
from .exact import ExpSum
from .kgraph import KGraph, kgraph_rpf_solve, kms_check
from .ksystem import KRuelleSystem, beta_search, check_cocycle_condition, joint_rpf_solve
from .nkmod import NkModuleAction, NkVector
from .ruelle import RuelleTriple, apply_ruelle, compose_triples, rpf_solve, transfer_matrix
from .symspace import SFT, CylinderFunction, CylinderMeasure, FullShift, Product, Shift, SymbolBijection

__version__ = "0.1.0"

__all__ = [
    "RuelleKitError",
    "ExpSum",
    "KGraph",
    "kgraph_rpf_solve",
    "kms_check",
    "KRuelleSystem",
    "beta_search",
    "check_cocycle_condition",
    "joint_rpf_solve",
    "NkModuleAction",
    "NkVector",
    "RuelleTriple",
    "apply_ruelle",
    "compose_triples",
    "rpf_solve",
    "transfer_matrix",
    "SFT",
    "CylinderFunction",
    "CylinderMeasure",
    "FullShift",
    "Product",
    "Shift",
    "SymbolBijection",
]
