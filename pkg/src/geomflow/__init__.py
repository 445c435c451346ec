"""Invariant curve flows, their differential invariants and integrable structure."""

from .curves import (
    EuclideanCurve,
    LagrangianCurve,
    ProjectiveCurve,
    StarCurve,
    projective_to_star,
    reparametrize_arclength,
    star_to_projective,
)
from .errors import GeomflowError
from .flows import flow_spec, invariantization_oracle, run_flow
from .hamiltonian import euclid_P, poisson_catalog, variational_derivative
from .invariants import curvature_torsion, lagrangian_schwarzian, schwarzian
from .numerics import GridFunction, MatrixField, PeriodicGrid

__version__ = "0.1.0"

__all__ = [
    "EuclideanCurve", "GeomflowError", "GridFunction", "LagrangianCurve", "MatrixField",
    "PeriodicGrid", "ProjectiveCurve", "StarCurve", "curvature_torsion", "euclid_P", "flow_spec",
    "invariantization_oracle", "lagrangian_schwarzian", "poisson_catalog", "projective_to_star",
    "reparametrize_arclength", "run_flow", "schwarzian", "star_to_projective",
    "variational_derivative",
]
