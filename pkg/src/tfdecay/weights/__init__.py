"""Weight-function calculus: evaluation, Young conjugation and coefficients."""
from .coefficients import (ALPHA_PLUS_TAUS, Estimate, GIProfile, PLSandwich, TailGrid,
                           TheoremConstants, WeightCoefficients, estimate_alpha,
                           estimate_alpha_plus, estimate_alpha_tau, estimate_alpha_tau_strict,
                           estimate_beta_star, gi_coefficient, gi_log_ratio, gi_profile_M,
                           h1_d_gi, pl_closed_form, pl_half_pi, pl_sandwich, require_settled,
                           tail_grid, theorem_constants, weight_coefficients)
from .conjugate import (Conjugate, ConjugateTable, biconjugate, golden_max,
                        linear_tail_slope, young_conjugate)
from .functions import (WeightFunction, check_weight, custom, from_family, gaussian_limit,
                        load_table, logpower, parse_weight, phi_is_convex, power)

__all__ = [n for n in dir() if not n.startswith("_")]
