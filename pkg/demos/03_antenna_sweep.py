"""
SE versus the number of antennas
================================

A small version of the usual design chart: 3 groups of 10 users, high SNR,
N from 40 to 400, averaged over 20 drops.  The result is written as CSV so it
can be plotted with any tool.
"""

# %%
from mmfcast import SweepSpec, SystemConfig, emit_results, run_sweep

config = SystemConfig.from_watts(100, (10, 10, 10), dl_power_w=40.0, ul_power_w=1.0)
spec = SweepSpec("n_antennas", [40, 100, 200, 400], n_drops=20, seed=0, omnicast=True,
                 omnicast_samples=200)
table = run_sweep(spec, config)

# %%
for rec in table.records():
    se = rec["mean_min_se"]
    print(f"N={rec['grid_value']:4d}  {rec['scheme']:8s}  "
          f"{'infeasible' if se is None else f'{se:.3f}'}   omnicast {rec['omnicast_se']:.3f}")

# %%
emit_results(table, "antenna_sweep.csv")

# %%
# The same run from the shell:
#   mmfcast --config cfg.json --sweep sweep.json --drops 20 --omnicast --out antenna_sweep.csv
