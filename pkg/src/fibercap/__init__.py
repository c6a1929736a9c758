"""Achievable rates for a nonlinear fiber channel with finite memory.

The channel adds ASE noise plus a signal-dependent term whose variance
grows with the cube of a sliding-window average of input powers.
"""

from .bounds import (PowerGrid, RateCurve, aux_variance_objective, capacity_lower_bound,
                     gn_capacity, gn_peak_power, optimal_aux_variance, p_star, s_bar,
                     s_bar_mc_oracle)
from .cgm import (CGMParams, cgm_rate_estimate, cgm_rate_objective,
                  cgm_weak_approximation_check, optimize_cgm, project_cgm, s_bar_cgm,
                  s_bar_cgm_exact, sample_cgm)
from .channel import (DEFAULT_PARAMS, ChannelParams, conditional_density, local_power,
                      local_powers, log_conditional_density, simulate, simulate_equivalent)
from .estimator import (RateEstimate, aclb_discrete, conditional_entropy_rate,
                        monotone_extension, mutual_information, output_entropy_rate,
                        rate_estimate)
from .forward import BACKEND, available_backends
from .quantize import QuantizedDistribution, quantize_gaussian, quantized_complex_gaussian

__version__ = "0.1.0"
