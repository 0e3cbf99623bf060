"""Closed-form effective SINRs and spectral efficiencies for the six schemes.

Purely analytic: inputs are large-scale fading, estimate variances and
downlink powers; no channel draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import Scheme, SystemConfig
from .estimation import _group_sums


@dataclass(frozen=True)
class SePoint:
    scheme: Scheme
    tau_p: int
    per_user_sinr: np.ndarray
    per_user_se: np.ndarray
    prelog: float

    @property
    def min_se(self) -> float:
        return float(self.per_user_se.min())


def prelog(tau_p, coherence_symbols: int):
    """Fraction of the coherence interval left for data, ``1 - tau/T``."""
    return 1.0 - np.asarray(tau_p, dtype=float) / coherence_symbols


def se_from_sinr(sinr, tau_p: int, coherence_symbols: int) -> np.ndarray:
    """``(1 - tau/T) log2(1 + SINR)`` elementwise, in bit/s/Hz."""
    if not 0 <= tau_p < coherence_symbols:
        raise ValueError(f"pilot length must satisfy 0 <= tau_p < T "
                         f"(tau_p={tau_p}, T={coherence_symbols})")
    return prelog(tau_p, coherence_symbols) * np.log2(1.0 + np.asarray(sinr, dtype=float))


def sinr_closed_form(scheme: Scheme, config: SystemConfig, betas, gammas,
                     dl_powers) -> np.ndarray:
    """Effective SINR of every user.

    Parameters
    ----------
    scheme : Scheme
    config : SystemConfig
        Supplies ``N`` and the group structure; the budget used in the
        interference terms is ``sum(dl_powers)``, not ``config.dl_power_budget``.
    betas, gammas : array_like, shape (K_tot,)
        Large-scale fading and estimate variance of each user.  For the
        co-pilot schemes ``gammas`` are the per-user co-pilot variances.
    dl_powers : array_like
        Per-user powers (K_tot,) for the dedicated-pilot schemes, per-group
        powers (G,) for the co-pilot schemes.

    Returns
    -------
    ndarray, shape (K_tot,)
    """
    scheme = Scheme.parse(scheme)
    betas = np.asarray(betas, dtype=float)
    gammas = np.asarray(gammas, dtype=float)
    p = np.asarray(dl_powers, dtype=float)
    n, g = config.n_antennas, config.n_groups
    sizes = np.asarray(config.group_sizes)
    group = config.group_index
    want = g if scheme.copilot else config.k_tot
    if p.shape[-1:] != (want,):
        raise ValueError(f"{scheme.value} takes {'per-group' if scheme.copilot else 'per-user'}"
                         f" downlink powers ({want}), got shape {p.shape}")
    total = p.sum(axis=-1, keepdims=True)
    if scheme in (Scheme.MrtUndp, Scheme.MrtMudp):
        return n * gammas * p / (1.0 + betas * total)
    if scheme is Scheme.ZfUndp:
        return (n - config.k_tot) * gammas * p / (1.0 + (betas - gammas) * total)
    if scheme is Scheme.ZfMudp:
        nu = config.k_tot - sizes
        own_group = np.repeat(_group_sums(p, sizes), sizes, axis=-1)
        return ((n - nu[group]) * gammas * p
                / (1.0 + gammas * own_group + (betas - gammas) * total))
    p_user = p[..., group]
    if scheme is Scheme.MrtMucp:
        return n * gammas * p_user / (1.0 + betas * total)
    return (n - g) * gammas * p_user / (1.0 + (betas - gammas) * total)


def se_point(scheme: Scheme, config: SystemConfig, betas, gammas, dl_powers,
             tau_p: int) -> SePoint:
    """SINR and SE of every user at one pilot length."""
    sinr = sinr_closed_form(scheme, config, betas, gammas, dl_powers)
    se = se_from_sinr(sinr, tau_p, config.coherence_symbols)
    return SePoint(Scheme.parse(scheme), int(tau_p), sinr, se,
                   float(prelog(tau_p, config.coherence_symbols)))
