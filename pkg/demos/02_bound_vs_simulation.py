"""
Closed-form SINR versus Monte Carlo
===================================

The closed forms never draw a channel.  Here the same operating point is
simulated: channels, pilot noise, MMSE estimates and precoders are drawn
10^4 times and every term of the use-and-then-forget bound is estimated.
"""

# %%
import numpy as np

from mmfcast import Scheme, SystemConfig, drop_users, optimize_pilot_length
from mmfcast.montecarlo import closed_form_terms, compare_bound

config = SystemConfig.from_watts(64, (4, 4), dl_power_w=40.0, ul_power_w=1.0)
profile = drop_users(config, seed=7)

# %%
for scheme in Scheme:
    sol = optimize_pilot_length(scheme, config, profile.betas)
    cmp = compare_bound(scheme, config, profile, sol, n_samples=10_000, seed=11)
    print(f"{scheme.value:9s} closed {sol.common_sinr:8.3f}  "
          f"mc {cmp.sinr_mc.min():8.3f}..{cmp.sinr_mc.max():8.3f}  "
          f"max |z| {np.abs(cmp.z_score).max():.2f}")

# %%
# Term by term for ZF-mudp: the own-group self interference (variance term)
# and the estimation-error leakage.
sol = optimize_pilot_length(Scheme.ZfMudp, config, profile.betas)
cmp = compare_bound(Scheme.ZfMudp, config, profile, sol, n_samples=10_000, seed=11)
ref = closed_form_terms(Scheme.ZfMudp, config, profile.betas, sol.ul_powers,
                        sol.dl_powers, sol.tau_p)
print("variance  mc", np.round(cmp.estimate.variance_term[:4], 1))
print("variance cf", np.round(ref["variance_term"][:4], 1))
print("error     mc", np.round(cmp.estimate.error_terms[:4].sum(axis=1), 3))
print("error    cf", np.round(ref["error_terms"][:4].sum(axis=1), 3))
