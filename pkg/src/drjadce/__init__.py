"""Dimension-reduction based joint activity detection and channel estimation.

The package recovers a row-sparse, low-rank device state matrix from one
block of pilot measurements: estimate its rank from the covariance spectrum,
project the measurements onto the signal subspace, solve a smoothed weighted
group-sparse problem with a Riemannian trust-region method on the quotient
manifold of fixed-rank factors, and lift the solution back for activity
detection and channel estimation.
"""

from .linalg import (ContractViolationError, HermitianEigenSystem,
                     RankDeficiencyError, ThinSVD, hermitian_eig,
                     solve_sylvester_skew, thin_svd)
from .scenario import (ActivityPattern, Instance, SystemConfig, crandn,
                       generate_activity, generate_channels, generate_pilots,
                       load_instance, make_instance, save_instance, substream,
                       synthesize)
from .rank_estimation import (DEFAULT_BETA, RankSelection, cm_criterion,
                              cm_curve, default_u, estimate_rank,
                              regularized_covariance)
from .reduction import (ReducedModel, build_reduced_model, compute_weights,
                        lift_back, reduce_measurements)
from .manifold import (RetractionError, is_horizontal, metric,
                       project_horizontal, retract)
from .objective import (DEFAULT_THETA, DEFAULT_ZETA, ObjectiveParams, cost,
                        euclidean_gradient, extract_s, hessian_vec,
                        riemannian_gradient, smooth_norm, smooth_scale)
from .solver import (RTRResult, SolverTrace, TrustRegionConfig, default_init,
                     rtr_solve, tcg)
from .pipeline import (DetectionResult, UndefinedMetricError, compute_aer,
                       compute_nmse, detect_activity, estimate_channels,
                       problem_scale, run_dr_jadce, run_l21, run_oracle_mmse,
                       run_somp)
from .baselines import (BaselineConfig, L21Result, l21_solve, oracle_mmse,
                        somp)
from .harness import (CSV_COLUMNS, ExperimentSpec, PRESET_NAMES, get_preset,
                      run_experiment, run_trial)
from .selftest import selftest

__version__ = "0.1.0"
