"""Exact OPE computations, reductions and character identities for the large and small N=4 algebras."""
from .cli import RunConfig, run
from .conformal import bracket, derive, jacobi_all, jacobi_check, normal_order
from .presentation import AlgebraPresentation, OPESingular, dumps, load, loads
from .report import Item, SuiteReport, render
from .ring import ExtScalar, ParamRat, ScalarRing, default_ring

__all__ = [
    "AlgebraPresentation",
    "ExtScalar",
    "Item",
    "OPESingular",
    "ParamRat",
    "RunConfig",
    "ScalarRing",
    "SuiteReport",
    "bracket",
    "default_ring",
    "derive",
    "dumps",
    "jacobi_all",
    "jacobi_check",
    "load",
    "loads",
    "normal_order",
    "render",
    "run",
]
