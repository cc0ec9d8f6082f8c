"""Empirical audits of ||alpha p + beta|| over Piatetski-Shapiro primes.

Library layout: core_arith (certified fixed-point reals and floors),
rational_approx (convergents, Dirichlet approximations), ps_primes
(segmented sieve, PS membership), harmonic (sawtooth / window expansions),
expsums (prime exponential sums, Vaughan decomposition, inequality
checks), gamma_engine (parameter schedule and discrepancy sums), search
and cli (record search, reports).
"""

__version__ = "0.1.0"

from .core_arith import (CertifiedFloor, FixedPointReal, dist_nearest_int, e,
                         frac, parse_real, pow_floor)
from .errors import (GammaOutOfRange, InvalidConfig, InvalidDelta,
                     InvalidLambda, PrecisionExhausted, PsToolError,
                     RegimeViolation)
from .gamma_engine import (GammaReport, ParamSet, derive_params, desk_params,
                           envelope_audit, frak_s, gamma_split, gamma_sum)
from .harmonic import (TruncatedExpansion, f_delta, f_delta_fourier, psi,
                       psi_truncated, sigma_sum, xi_sum)
from .ps_primes import (PsWeight, SieveSegment, chebyshev_theta, lambda_, mu,
                        ps_count, ps_weight, sieve, tau)
from .rational_approx import (Convergent, DirichletApprox, convergents,
                              dirichlet_approx, min_sum, qh_window_audit)
from .expsums import (ExpSumReport, VaughanParts, direct_lambda_sum,
                      make_phase, q0_choice, s_of_x, theta_sum,
                      type2_envelope, van_der_corput_check,
                      vaughan_coefficients, vaughan_decompose,
                      weyl_shift_check)
from .search import SearchRecord, run_search

__all__ = [name for name in dir() if not name.startswith("_")]
