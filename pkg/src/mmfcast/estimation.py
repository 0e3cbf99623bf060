"""MMSE channel estimation under dedicated and shared (co-) pilots.

Pilot sequences are not simulated; the despread observations that the
estimators act on are generated directly, one noise vector ``CN(0, I_N)`` per
user (dedicated) or per group (co-pilot).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import TAG_CP_NOISE, TAG_DP_NOISE, ChannelRealization, complex_normal, make_rng


def gamma_dp(tau_p, ul_powers, betas) -> np.ndarray:
    """Estimate variance ``tau p beta^2 / (1 + tau p beta)`` per user (dedicated pilots).

    Broadcasts, so an array of pilot lengths shaped ``(T, 1)`` yields ``(T, K)``.
    """
    snr = np.asarray(tau_p, dtype=float) * np.asarray(ul_powers, dtype=float)
    betas = np.asarray(betas, dtype=float)
    return snr * betas ** 2 / (1.0 + snr * betas)


def _group_sums(values: np.ndarray, group_sizes) -> np.ndarray:
    """Sum the last axis over consecutive groups."""
    edges = np.concatenate(([0], np.cumsum(group_sizes)[:-1]))
    return np.add.reduceat(values, edges, axis=-1)


def gamma_cp(tau_p, ul_powers, betas, group_sizes) -> np.ndarray:
    """Per-user estimate variance under co-pilots (contaminated by the group)."""
    tau = np.asarray(tau_p, dtype=float)
    pb = np.asarray(ul_powers, dtype=float) * np.asarray(betas, dtype=float)
    load = np.repeat(_group_sums(np.broadcast_to(pb, np.broadcast_shapes(tau.shape, pb.shape)),
                                 group_sizes), group_sizes, axis=-1)
    return tau * np.asarray(ul_powers) * np.asarray(betas) ** 2 / (1.0 + tau * load)


def gamma_group(tau_p, ul_powers, betas, group_sizes) -> np.ndarray:
    """Variance of the composite group-channel estimate, one value per group."""
    tau = np.asarray(tau_p, dtype=float)
    load = tau * _group_sums(np.asarray(ul_powers, dtype=float) * np.asarray(betas, dtype=float),
                             group_sizes)
    return load ** 2 / (1.0 + load)


def _check(realization: ChannelRealization, ul_powers, tau_p: int, min_tau: int, what: str):
    p = np.asarray(ul_powers, dtype=float)
    if p.shape != (realization.profile.k_tot,):
        raise ValueError("need one uplink power per user")
    if np.any(p < 0):
        raise ValueError("uplink powers must be nonnegative")
    if tau_p < min_tau:
        raise ValueError(f"{what} pilots need tau_p >= {min_tau}, got {tau_p}")
    return p


def _noise(realization: ChannelRealization, seed, tag: int, width: int) -> np.ndarray:
    n = realization.n_antennas
    draws = [complex_normal(make_rng(seed, tag, m), (n, width))
             for m in realization.sample_ids]
    return np.stack(draws) if realization.batched else draws[0]


@dataclass(frozen=True)
class DpEstimate:
    """Dedicated-pilot estimates; ``stacked`` is ``(..., N, K_tot)``."""

    stacked: np.ndarray
    gamma: np.ndarray
    tau_p: int
    group_sizes: tuple[int, ...]

    @property
    def g_hat(self) -> np.ndarray:
        return self.stacked

    def error(self, realization: ChannelRealization) -> np.ndarray:
        """Estimation error ``g_hat - g`` per user column."""
        return self.stacked - realization.channels


@dataclass(frozen=True)
class CpEstimate:
    """Co-pilot estimates: per-user ``(..., N, K_tot)`` and per-group ``(..., N, G)``."""

    g_hat_user: np.ndarray
    gamma_user: np.ndarray
    g_hat_group: np.ndarray
    gamma_group: np.ndarray
    tau_p: int
    group_sizes: tuple[int, ...]
    scale: np.ndarray  # g_hat_user[:, k] == scale[k] * g_hat_group[:, group(k)]

    @property
    def stacked(self) -> np.ndarray:
        return self.g_hat_group

    def error(self, realization: ChannelRealization) -> np.ndarray:
        return self.g_hat_user - realization.channels


def estimate_dp(realization: ChannelRealization, ul_powers, tau_p: int,
                seed) -> DpEstimate:
    """MMSE estimates from orthogonal per-user pilots.

    ``g_hat = sqrt(tau p) beta / (1 + tau p beta) * (sqrt(tau p) g + n)``.
    """
    betas = realization.profile.betas
    p = _check(realization, ul_powers, tau_p, realization.profile.k_tot, "dedicated")
    noise = _noise(realization, seed, TAG_DP_NOISE, betas.size)
    root = np.sqrt(tau_p * p)
    coef = root * betas / (1.0 + tau_p * p * betas)
    g_hat = coef * (root * realization.channels + noise)
    return DpEstimate(g_hat, gamma_dp(tau_p, p, betas), int(tau_p),
                      realization.profile.group_sizes)


def estimate_cp(realization: ChannelRealization, ul_powers, tau_p: int,
                seed) -> CpEstimate:
    """MMSE estimates when all users of a group share one pilot.

    Every user's estimate and the composite group estimate are scalings of the
    same observation ``sum_m sqrt(tau p_m) g_m + n``.
    """
    prof = realization.profile
    sizes = prof.group_sizes
    p = _check(realization, ul_powers, tau_p, len(sizes), "co-pilot")
    betas = prof.betas
    root = np.sqrt(tau_p * p)
    noise = _noise(realization, seed, TAG_CP_NOISE, len(sizes))
    obs = _group_sums(realization.channels * root, sizes) + noise
    load = tau_p * _group_sums(p * betas, sizes)
    g_group = (load / (1.0 + load)) * obs
    load_u = np.repeat(load, sizes)
    user_coef = root * betas / (1.0 + load_u)
    obs_u = np.repeat(obs, sizes, axis=-1)
    g_user = user_coef * obs_u
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(load_u > 0, root * betas / load_u, 0.0)
    return CpEstimate(g_user, gamma_cp(tau_p, p, betas, sizes), g_group,
                      gamma_group(tau_p, p, betas, sizes), int(tau_p), sizes, scale)
