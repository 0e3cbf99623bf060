"""
Six precoding schemes on one user drop
======================================

Drop 3 groups of 10 users in a 500 m cell, optimize the pilot length and the
max-min fair powers of every scheme, and compare the worst user's SE.
"""

# %%
import numpy as np

from mmfcast import Scheme, SystemConfig, drop_users, optimize_pilot_length, scheme_feasible

config = SystemConfig.from_watts(n_antennas=100, group_sizes=(10, 10, 10),
                                 dl_power_w=40.0, ul_power_w=1.0)
profile = drop_users(config, seed=1)
print(f"K_tot = {config.k_tot}, cell-edge path loss {10 * np.log10(profile.betas.min()):.1f} dB")

# %%
# Every solver returns the common SINR all users reach, the pilot length and
# the per-user (dedicated pilots) or per-group (co-pilots) downlink powers.
for scheme in Scheme:
    if not scheme_feasible(scheme, config):
        print(f"{scheme.value:9s} infeasible")
        continue
    sol = optimize_pilot_length(scheme, config, profile.betas)
    print(f"{scheme.value:9s} tau*={sol.tau_p:4d}  SINR={sol.common_sinr:8.3f}  "
          f"min SE={sol.min_se:.3f} bit/s/Hz")

# %%
# Co-pilot schemes need only G pilot symbols; the pilot powers are lowered for
# strong users so that each group is limited by its weakest member.
sol = optimize_pilot_length(Scheme.MrtMucp, config, profile.betas)
print("pilot power / cap:", np.round(sol.ul_powers / config.caps, 3))
print("users at cap:", np.flatnonzero(sol.per_group_aux["at_cap"]))
