"""Omnicast reference: CSI-free isotropic broadcast, time-shared over groups.

Users are assumed to know their channels perfectly, so this is an upper
bound on what omnicast can do.  Per drop, each user's ergodic rate
``E[(1/G) log2(1 + P ||h||^2) | beta]`` is estimated, the worst user is kept,
and the result is averaged over drops.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import TAG_FADING, drop_users, make_rng
from .config import SystemConfig


@dataclass(frozen=True)
class OmnicastResult:
    se: float
    n_drops: int
    n_fading_samples: int
    standard_error: float
    per_drop: np.ndarray = field(repr=False, compare=False)


def conditional_rates(betas, dl_power: float, n_antennas: int, n_groups: int,
                      n_fading_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Monte Carlo ``E[(1/G) log2(1 + P beta X)]`` per user.

    ``X = ||h||^2 / beta`` is a sum of N unit exponentials, drawn antenna by
    antenna so that, for a fixed generator state, adding an antenna can only
    increase every sample.  The same variates are reused for every user; each
    user's estimate is still unbiased.
    """
    x = rng.standard_exponential((n_antennas, n_fading_samples)).sum(axis=0)
    snr = dl_power * np.asarray(betas, dtype=float)[:, None] * x[None, :]
    return np.log2(1.0 + snr).mean(axis=1) / n_groups


def omnicast_se(config: SystemConfig, n_drops: int = 100, n_fading_samples: int = 1000,
                seed=0) -> OmnicastResult:
    """Average over user drops of the worst user's ergodic omnicast rate."""
    if n_drops < 1 or n_fading_samples < 1:
        raise ValueError("n_drops and n_fading_samples must be >= 1")
    per_drop = np.empty(n_drops)
    for d in range(n_drops):
        profile = drop_users(config, (seed, d))
        rates = conditional_rates(profile.betas, config.dl_power_budget, config.n_antennas,
                                  config.n_groups, n_fading_samples,
                                  make_rng(seed, TAG_FADING, d))
        per_drop[d] = rates.min()
    se_err = per_drop.std(ddof=1) / np.sqrt(n_drops) if n_drops > 1 else 0.0
    return OmnicastResult(float(per_drop.mean()), n_drops, n_fading_samples,
                          float(se_err), per_drop)
