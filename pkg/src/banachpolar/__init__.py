"""Normalized duality maps, metric projections and polar cones in smooth finite-dimensional norms."""

__version__ = "0.1.0"

from .spaces import (  # noqa: E402
    DualVec,
    InvalidSpaceError,
    LpSpace,
    PrimalVec,
    QuadraticSpace,
    dual_norm,
    duality_map,
    inverse_duality_map,
    norm,
    pairing,
    random_spd,
    random_sphere,
    validate_space,
)
from .geometry import (  # noqa: E402
    ArcError,
    FiniteCone,
    Hypercone,
    MeridianArc,
    dependence_det3,
    euclidean_cone_membership,
    rank_residual,
    sample_arc,
)
from .projection import (  # noqa: E402
    ProjectionError,
    ProjectionResult,
    SolverOptions,
    euclidean_qp_oracle,
    project_cone,
    project_cone_batch,
    project_halfspace,
    project_ray,
)
from .polar import (  # noqa: E402
    ConvexityReport,
    CriterionReport,
    MembershipVerdict,
    certify_wedge_polar_convexity,
    counterexample_arc,
    hypercone_polar_ray,
    lp_counterexample,
    polar_membership,
    projection_polar_consistency,
    subspace_criterion_check,
    wedge_polar_rays,
)
