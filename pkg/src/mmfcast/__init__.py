"""Max-min fair precoding for multi-group multicasting in single-cell massive MIMO.

Channel estimation, six MRT/ZF unicast/multicast precoders, closed-form
achievable SINRs, max-min fair pilot/power policies, Monte Carlo checks of
the bounds, and an omnicast reference.
"""

from .channels import ChannelRealization, FadingProfile, draw_channels, drop_users, make_rng
from .config import (ALL_SCHEMES, InfeasibleSchemeError, Scheme, SystemConfig,
                     normalize_power, scheme_feasible)
from .estimation import CpEstimate, DpEstimate, estimate_cp, estimate_dp
from .experiments import (Recommendation, SweepSpec, emit_results, recommend_ensemble,
                          recommend_scheme, run_sweep)
from .mmf import MmfSolution, optimize_pilot_length, solve_mmf
from .montecarlo import compare_bound, estimate_uatf_sinr
from .omnicast import omnicast_se
from .precoding import PrecodingMatrix, build_precoder
from .sinr import se_from_sinr, sinr_closed_form

__version__ = "0.1.0"
