"""Monte Carlo estimation of the use-and-then-forget (UatF) SINR bound.

Each sample draws channels and pilot noise, runs the scheme's estimator and
precoder, and records for every user ``(i, k)``

* ``a_own = g_hat_ik^H u_i``, the gain through the user's own stream,
* ``|g_hat_ik^H u_j|^2`` for the other streams (leakage through the estimate),
* ``|g_err_ik^H u_j|^2`` for every stream (leakage through the estimation error),

where ``u_j`` is the precoder that carries ``s_j`` (for unicast, the sum of
the group's columns, so transmissions to co-members end up in the variance
term).  The bound is then

    SINR = |E a_own|^2 / (1 + var(a_own) + sum leakage + sum error).

Nothing here calls the closed-form SINR code except :func:`compare_bound`,
which puts the two side by side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import FadingProfile, draw_channels
from .config import Scheme, SystemConfig, require_feasible
from .estimation import estimate_cp, estimate_dp, gamma_cp, gamma_dp
from .mmf import MmfSolution
from .precoding import build_precoder
from .sinr import sinr_closed_form

DEFAULT_SAMPLES = 10_000


@dataclass(frozen=True)
class UatfEstimate:
    """Per-user Monte Carlo terms of the bound (arrays over users).

    ``leakage_terms`` and ``error_terms`` are ``(K_tot, G)``; the leakage
    entry of a user's own stream is zero by construction.
    ``standard_errors`` maps term names to arrays shaped like the terms.
    """

    scheme: Scheme
    signal_mean: np.ndarray
    signal_term: np.ndarray
    variance_term: np.ndarray
    leakage_terms: np.ndarray
    error_terms: np.ndarray
    sinr_mc: np.ndarray
    n_samples: int
    standard_errors: dict

    @property
    def interference_terms(self) -> np.ndarray:
        """Total leakage per source stream, ``(K_tot, G)``."""
        return self.leakage_terms + self.error_terms


def _sample_products(scheme: Scheme, profile: FadingProfile, n_antennas: int,
                     ul_powers, dl_powers, tau_p: int, seed, start: int, count: int):
    real = draw_channels(profile, n_antennas, seed, n_samples=count, start=start)
    if scheme.copilot:
        est = estimate_cp(real, ul_powers, tau_p, seed)
        user_hat = est.g_hat_user
    else:
        est = estimate_dp(real, ul_powers, tau_p, seed)
        user_hat = est.stacked
    streams = build_precoder(scheme, est, dl_powers).stream_matrix()
    err = est.error(real)
    hat_prod = np.einsum("snk,sng->skg", user_hat.conj(), streams)
    err_prod = np.einsum("snk,sng->skg", err.conj(), streams)
    return hat_prod, err_prod


def estimate_uatf_sinr(scheme: Scheme, config: SystemConfig, profile: FadingProfile,
                       ul_powers, dl_powers, tau_p: int,
                       n_samples: int = DEFAULT_SAMPLES, seed=0,
                       batch_size: int = 1000) -> UatfEstimate:
    """Estimate every term of the UatF bound by simulation.

    Sample ``m`` uses substream ``m`` of ``seed`` for both the channel and the
    pilot noise, so two schemes run with the same seed see the same channels.
    Standard errors use the delta method on the per-sample moments.
    """
    scheme = Scheme.parse(scheme)
    require_feasible(scheme, config)
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    group = config.group_index
    g = config.n_groups
    hats, errs = [], []
    for start in range(0, n_samples, batch_size):
        count = min(batch_size, n_samples - start)
        h, e = _sample_products(scheme, profile, config.n_antennas, ul_powers, dl_powers,
                                tau_p, seed, start, count)
        hats.append(h)
        errs.append(e)
    hat = np.concatenate(hats)   # (S, K, G)
    err = np.concatenate(errs)
    users = np.arange(config.k_tot)
    own = hat[:, users, group]   # (S, K)
    other = np.abs(hat) ** 2
    other[:, users, group] = 0.0
    err_pow = np.abs(err) ** 2

    # per-sample moment vector: Re a, Im a, |a|^2, total leakage
    x = np.stack([own.real, own.imag, np.abs(own) ** 2,
                  other.sum(axis=2) + err_pow.sum(axis=2)], axis=-1)   # (S, K, 4)
    mu = x.mean(axis=0)
    centered = x - mu
    cov = np.einsum("ski,skj->kij", centered, centered) / (n_samples - 1)

    m_re, m_im, m_sq, m_leak = mu.T
    signal = m_re ** 2 + m_im ** 2
    variance = m_sq - signal
    denom = 1.0 + variance + m_leak
    sinr = signal / denom

    grad = np.stack([2 * m_re * (denom + signal) / denom ** 2,
                     2 * m_im * (denom + signal) / denom ** 2,
                     -signal / denom ** 2,
                     -signal / denom ** 2], axis=-1)
    se_sinr = np.sqrt(np.einsum("ki,kij,kj->k", grad, cov, grad) / n_samples)
    g_sig = np.stack([2 * m_re, 2 * m_im, np.zeros_like(m_re)], axis=-1)
    g_var = np.stack([-2 * m_re, -2 * m_im, np.ones_like(m_re)], axis=-1)
    c3 = cov[:, :3, :3]
    root_n = np.sqrt(n_samples)
    ses = {
        "signal_mean": np.sqrt(cov[:, 0, 0]) / root_n,
        "signal_term": np.sqrt(np.einsum("ki,kij,kj->k", g_sig, c3, g_sig)) / root_n,
        "variance_term": np.sqrt(np.maximum(np.einsum("ki,kij,kj->k", g_var, c3, g_var), 0))
        / root_n,
        "leakage_terms": other.std(axis=0, ddof=1) / root_n,
        "error_terms": err_pow.std(axis=0, ddof=1) / root_n,
        "sinr_mc": se_sinr,
    }
    return UatfEstimate(scheme, m_re, signal, variance, other.mean(axis=0),
                        err_pow.mean(axis=0), sinr, n_samples, ses)


def closed_form_terms(scheme: Scheme, config: SystemConfig, betas, ul_powers,
                      dl_powers, tau_p: int) -> dict:
    """Analytic expectations of the terms estimated by :func:`estimate_uatf_sinr`.

    Keys mirror the :class:`UatfEstimate` fields (``signal_mean``,
    ``variance_term``, ``leakage_terms``, ``error_terms``).
    """
    scheme = Scheme.parse(scheme)
    betas = np.asarray(betas, dtype=float)
    n, g = config.n_antennas, config.n_groups
    sizes = np.asarray(config.group_sizes)
    group = config.group_index
    p = np.asarray(dl_powers, dtype=float)
    if scheme.copilot:
        gam = gamma_cp(tau_p, ul_powers, betas, sizes)
        stream_power = p
    else:
        gam = gamma_dp(tau_p, ul_powers, betas)
        stream_power = np.add.reduceat(p, config.group_offsets)
    own_power = p if scheme.copilot else None
    if scheme in (Scheme.MrtUndp, Scheme.MrtMudp):
        signal = np.sqrt(p * n * gam)
        variance = gam * stream_power[group]
        leak = gam[:, None] * stream_power[None, :]
    elif scheme is Scheme.ZfUndp:
        signal = np.sqrt(p * gam * (n - config.k_tot))
        variance = np.zeros_like(gam)
        leak = np.zeros((config.k_tot, g))
    elif scheme is Scheme.ZfMudp:
        nu = config.k_tot - sizes
        signal = np.sqrt(p * gam * (n - nu[group]))
        variance = gam * stream_power[group]
        leak = np.zeros((config.k_tot, g))
    elif scheme is Scheme.MrtMucp:
        signal = np.sqrt(n * gam * own_power[group])
        variance = gam * own_power[group]
        leak = gam[:, None] * stream_power[None, :]
    else:
        signal = np.sqrt((n - g) * gam * own_power[group])
        variance = np.zeros_like(gam)
        leak = np.zeros((config.k_tot, g))
    leak = leak.copy()
    leak[np.arange(config.k_tot), group] = 0.0
    error = (betas - gam)[:, None] * stream_power[None, :]
    return {"signal_mean": signal, "variance_term": variance,
            "leakage_terms": leak, "error_terms": error}


@dataclass(frozen=True)
class BoundComparison:
    scheme: Scheme
    sinr_closed: np.ndarray
    sinr_mc: np.ndarray
    standard_error: np.ndarray
    rel_dev: np.ndarray
    z_score: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    flagged: np.ndarray   # closed form outside mc +- 3 standard errors
    estimate: UatfEstimate

    @property
    def ok(self) -> bool:
        return not bool(self.flagged.any())

    @property
    def max_rel_dev(self) -> float:
        return float(self.rel_dev.max())


def compare_bound(scheme: Scheme, config: SystemConfig, profile: FadingProfile,
                  solution: MmfSolution, n_samples: int = DEFAULT_SAMPLES, seed=0,
                  n_sigma: float = 3.0) -> BoundComparison:
    """Monte Carlo SINR versus the closed form at an MMF operating point."""
    scheme = Scheme.parse(scheme)
    est = estimate_uatf_sinr(scheme, config, profile, solution.ul_powers, solution.dl_powers,
                             solution.tau_p, n_samples, seed)
    closed = sinr_closed_form(scheme, config, profile.betas, solution.gamma_star,
                              solution.dl_powers)
    se = est.standard_errors["sinr_mc"]
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(est.sinr_mc - closed) / closed
        z = (est.sinr_mc - closed) / se
    return BoundComparison(scheme, closed, est.sinr_mc, se, rel, z,
                           est.sinr_mc - n_sigma * se, est.sinr_mc + n_sigma * se,
                           np.abs(est.sinr_mc - closed) > n_sigma * se, est)
