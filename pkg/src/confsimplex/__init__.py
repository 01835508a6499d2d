"""Curvature functionals and Hessian certification for conformal tetrahedra in E^3 and H^3."""

from .analysis import (
    HessianReport,
    SolveResult,
    SweepReport,
    analyze_hessian,
    path_rank_scan,
    random_conformal_radii,
    random_radii,
    solve_prescribed_solid_angles,
    verify_lemma_1_2,
    verify_lemma_3_2,
)
from .core import (
    PAIRS,
    DegenerateSimplex,
    Geometry,
    LineSearchFailure,
    NotConverged,
    NotRealizable,
    NumericalInstability,
    QuadratureFailure,
    solid_angles,
)
from .euclidean import cayley_menger_det, dihedral_angles_euclidean, embed_euclidean, volume_euclidean
from .functionals import (
    eval_R,
    eval_R_paper_display,
    eval_S,
    grad_R,
    grad_S,
    hessian_R,
    hessian_S,
    jacobian_i,
    map_i,
)
from .hyperbolic import (
    HyperbolicVolume,
    dihedral_angles_hyperbolic,
    embed_hyperboloid,
    gram_from_lengths,
    mc_volume_klein,
    volume_hyperbolic,
)

__version__ = "0.1.0"
