"""Finite metric measure spaces, transport distances, heat flow, and a
verification suite for the lower-bound inequalities tying them together."""

from .spaces import (MetricMeasureSpace, SignedDensity, SpaceError,
                     InvariantViolation, as_density, build_catalog_space,
                     circle_space, interval_space, load_space, ou_chain_space,
                     path_space, space_from_dict, torus_space, two_point_space)
from .heat import (CurvatureProfile, SpectralDecomposition, heat_apply,
                   heat_operator, j_profile, laplacian_apply,
                   laplacian_matrix, r_profile, spectrum)
from .geometry import CheegerEstimate, cheeger, perimeter
from .transport import (EntropyTransportSolution, HKSettings, SolverError,
                        TransportPlan, hellinger, hellinger_kantorovich,
                        hk_cost_matrix, wasserstein, wasserstein_oracle_1d)
from .bounds import (BoundReport, constant_eig, constant_ind, d_ratio,
                     default_t_grid, g1_curve, g2_curve, g_curve, optimal_s,
                     optimal_time, step1_sweep, verify_eig_bound,
                     verify_eig_bound_p, verify_heat_hellinger,
                     verify_heat_perimeter, verify_hk_indeterminacy,
                     verify_indeterminacy, verify_indeterminacy_p,
                     verify_norm_cheeger, verify_sqrt_heat)

__version__ = "0.1.0"

__all__ = [
    "MetricMeasureSpace", "SignedDensity", "SpaceError", "InvariantViolation",
    "as_density", "build_catalog_space", "circle_space", "interval_space",
    "load_space", "ou_chain_space", "path_space", "space_from_dict",
    "torus_space", "two_point_space",
    "CurvatureProfile", "SpectralDecomposition", "heat_apply", "heat_operator",
    "j_profile", "laplacian_apply", "laplacian_matrix", "r_profile", "spectrum",
    "CheegerEstimate", "cheeger", "perimeter",
    "EntropyTransportSolution", "HKSettings", "SolverError", "TransportPlan",
    "hellinger", "hellinger_kantorovich", "hk_cost_matrix", "wasserstein",
    "wasserstein_oracle_1d",
    "BoundReport", "constant_eig", "constant_ind", "d_ratio", "default_t_grid",
    "g1_curve", "g2_curve", "g_curve", "optimal_s", "optimal_time",
    "step1_sweep", "verify_eig_bound", "verify_eig_bound_p",
    "verify_heat_hellinger", "verify_heat_perimeter", "verify_hk_indeterminacy",
    "verify_indeterminacy", "verify_indeterminacy_p", "verify_norm_cheeger",
    "verify_sqrt_heat",
]
