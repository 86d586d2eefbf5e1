"""Hodge-star constructions for hyperplane intersections and affine distributions,
with conservative/dissipative vector field synthesis on top."""
from ._kernels import BACKEND
from .dynamics import DriftReport, Scenario, Trajectory, audit, integrate, perturb, synthesize
from .errors import (
    AffgenError,
    DomainError,
    IntegrationDivergedError,
    PreconditionError,
    RankDeficiencyError,
    RegionTooLargeError,
)
from .exterior import (
    Metric,
    Multivector,
    canonical_blade,
    gram_matrix,
    hodge_star,
    inner_product_p,
    norm_p,
    volume_form,
    wedge,
    wedge_vectors,
)
from .intersect import (
    AffineSolution,
    HyperplaneSystem,
    complete_to_basis,
    homogeneous_basis,
    particular_solution,
    solve_intersection,
    verify_solution,
)
from .riemann import (
    GeneratorSet,
    MetricField,
    ScalarField,
    VectorFieldHandle,
    euclidean_gradient,
    eval_field,
    frame_completion_field,
    generator_set,
    pointwise_generators,
    riemannian_gradient,
)

__version__ = "0.1.0"

__all__ = [
    "AffgenError",
    "AffineSolution",
    "BACKEND",
    "DomainError",
    "DriftReport",
    "GeneratorSet",
    "HyperplaneSystem",
    "IntegrationDivergedError",
    "Metric",
    "MetricField",
    "Multivector",
    "PreconditionError",
    "RankDeficiencyError",
    "RegionTooLargeError",
    "ScalarField",
    "Scenario",
    "Trajectory",
    "VectorFieldHandle",
    "audit",
    "canonical_blade",
    "complete_to_basis",
    "euclidean_gradient",
    "eval_field",
    "frame_completion_field",
    "generator_set",
    "gram_matrix",
    "hodge_star",
    "homogeneous_basis",
    "inner_product_p",
    "integrate",
    "norm_p",
    "particular_solution",
    "perturb",
    "pointwise_generators",
    "riemannian_gradient",
    "solve_intersection",
    "synthesize",
    "verify_solution",
    "volume_form",
    "wedge",
    "wedge_vectors",
]
