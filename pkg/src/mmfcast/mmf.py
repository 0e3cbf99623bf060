"""Max-min fair pilot and power allocation for the six schemes.

For a fixed pilot length every scheme has a closed-form optimum in which all
users reach a common SINR; ZF-mudp needs a scalar root search for that
common value.  :func:`optimize_pilot_length` then scans every admissible
pilot length.

The common-SINR formulas are evaluated for a whole vector of pilot lengths
at once (:func:`common_sinr`); the per-scheme solvers wrap it for one length
and add the power allocations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .config import InfeasibleSchemeError, Scheme, SystemConfig, require_feasible
from .estimation import _group_sums, gamma_cp, gamma_dp
from .sinr import prelog

BISECTION_TOL = 1e-10
BISECTION_MAX_ITER = 200


@dataclass(frozen=True)
class MmfSolution:
    """Optimal policy at one pilot length.

    ``dl_powers`` has one entry per user for the dedicated-pilot schemes and
    one per group for the co-pilot schemes.  ``gamma_star`` holds the per-user
    estimate variances that result from ``ul_powers``.
    """

    scheme: Scheme
    tau_p: int
    gamma_star: np.ndarray
    ul_powers: np.ndarray
    dl_powers: np.ndarray
    common_sinr: float
    min_se: float
    per_group_aux: dict[str, Any] = field(default_factory=dict)


def _check_inputs(config: SystemConfig, betas) -> np.ndarray:
    betas = np.asarray(betas, dtype=float)
    if betas.shape != (config.k_tot,):
        raise ValueError(f"need {config.k_tot} large-scale fading values, got {betas.shape}")
    if np.any(betas <= 0) or np.any(config.caps <= 0):
        raise ValueError("every user needs positive large-scale fading and pilot power cap")
    return betas


def _check_tau(scheme: Scheme, config: SystemConfig, tau_p: int) -> None:
    need = config.n_groups if scheme.copilot else config.k_tot
    if not need <= tau_p < config.coherence_symbols:
        raise InfeasibleSchemeError(
            scheme, f"pilot length {tau_p} outside [{need}, {config.coherence_symbols})")


def upsilon(config: SystemConfig, betas) -> np.ndarray:
    """Per-group ``min_k p_cap beta^2 / (1 + beta P)`` (co-pilot schemes)."""
    betas = np.asarray(betas, dtype=float)
    ratio = config.caps * betas ** 2 / (1.0 + betas * config.dl_power_budget)
    edges = config.group_offsets
    return np.minimum.reduceat(ratio, edges)


def copilot_ul_powers(config: SystemConfig, betas) -> np.ndarray:
    """Uplink powers that equalize ``p beta^2 / (1 + beta P)`` inside each group."""
    betas = np.asarray(betas, dtype=float)
    ups = upsilon(config, betas)[config.group_index]
    return ups * (1.0 + betas * config.dl_power_budget) / betas ** 2


def zf_mudp_rhs(gamma, delta, nu, sizes, n_antennas: int):
    """Total downlink power needed to give every user SINR ``gamma`` (ZF-mudp).

    Broadcasts ``gamma`` shaped ``(..., 1)`` against per-group ``delta``
    shaped ``(..., G)``.
    """
    gamma = np.asarray(gamma, dtype=float)
    return np.sum(gamma * delta / (n_antennas - nu - gamma * sizes), axis=-1)


def _bisect_zf_mudp(delta: np.ndarray, nu: np.ndarray, sizes: np.ndarray, n: int,
                    budget: float, tol: float, max_iter: int) -> np.ndarray:
    """Solve ``budget = rhs(gamma)`` for each row of ``delta`` by bisection.

    ``rhs`` is 0 at 0, strictly increasing, and diverges at
    ``min_i (N - nu_i) / K_i``, so the root is bracketed from the start.
    """
    delta = np.atleast_2d(delta)
    rows = delta.shape[0]
    if budget == 0:
        return np.zeros(rows)
    lo = np.zeros(rows)
    hi = np.full(rows, np.min((n - nu) / sizes))
    gamma = 0.5 * (lo + hi)
    done = np.zeros(rows, dtype=bool)
    for _ in range(max_iter):
        gamma = np.where(done, gamma, 0.5 * (lo + hi))
        rhs = zf_mudp_rhs(gamma[:, None], delta, nu, sizes, n)
        done |= np.abs(rhs - budget) <= tol * budget
        if done.all():
            return gamma
        over = rhs > budget
        hi = np.where(~done & over, gamma, hi)
        lo = np.where(~done & ~over, gamma, lo)
    raise RuntimeError(f"ZF-mudp bisection did not reach tolerance {tol} "
                       f"in {max_iter} iterations")


def common_sinr(scheme: Scheme, config: SystemConfig, betas, taus,
                tol: float = BISECTION_TOL) -> np.ndarray:
    """Optimal common SINR for every pilot length in ``taus``."""
    scheme = Scheme.parse(scheme)
    betas = _check_inputs(config, betas)
    taus = np.atleast_1d(np.asarray(taus, dtype=float))[:, None]
    n, big_p = config.n_antennas, config.dl_power_budget
    sizes = np.asarray(config.group_sizes)
    if scheme.copilot:
        ups = upsilon(config, betas)
        e = ups * _group_sums(1.0 / betas + big_p, sizes)
        if scheme is Scheme.MrtMucp:
            return n * big_p / np.sum((1.0 + taus * e) / (taus * ups), axis=-1)
        delta = taus * ups / (1.0 + taus * (e - big_p * ups))
        return big_p * (n - config.n_groups) / np.sum(1.0 / delta, axis=-1)
    gam = gamma_dp(taus, config.caps, betas)
    if scheme in (Scheme.MrtUndp, Scheme.MrtMudp):
        return n * big_p / np.sum((1.0 + betas * big_p) / gam, axis=-1)
    cost = (1.0 + (betas - gam) * big_p) / gam
    if scheme is Scheme.ZfUndp:
        return (n - config.k_tot) * big_p / np.sum(cost, axis=-1)
    delta = _group_sums(cost, sizes)
    return _bisect_zf_mudp(delta, config.k_tot - sizes, sizes, n, big_p, tol,
                           BISECTION_MAX_ITER)


def _solution(scheme, config, tau_p, gam, ul, dl, gamma_c, aux) -> MmfSolution:
    se = float(prelog(tau_p, config.coherence_symbols) * np.log2(1.0 + gamma_c))
    return MmfSolution(scheme, int(tau_p), gam, ul, dl, float(gamma_c), se, aux)


def _solve_dp(scheme: Scheme, config: SystemConfig, betas, tau_p: int,
              tol: float = BISECTION_TOL) -> MmfSolution:
    require_feasible(scheme, config)
    _check_tau(scheme, config, tau_p)
    betas = _check_inputs(config, betas)
    n, big_p = config.n_antennas, config.dl_power_budget
    ul = config.caps.copy()
    gam = gamma_dp(tau_p, ul, betas)
    gamma_c = float(common_sinr(scheme, config, betas, [tau_p], tol)[0])
    if scheme in (Scheme.MrtUndp, Scheme.MrtMudp):
        dl = gamma_c * (1.0 + betas * big_p) / (gam * n)
        return _solution(scheme, config, tau_p, gam, ul, dl, gamma_c, {})
    cost = (1.0 + (betas - gam) * big_p) / gam
    if scheme is Scheme.ZfUndp:
        dl = gamma_c * cost / (n - config.k_tot)
        return _solution(scheme, config, tau_p, gam, ul, dl, gamma_c, {})
    sizes = np.asarray(config.group_sizes)
    nu = config.k_tot - sizes
    delta = _group_sums(cost, sizes)
    group_power = gamma_c * delta / (n - nu - gamma_c * sizes)
    grp = config.group_index
    dl = gamma_c / (n - nu[grp]) * (cost + group_power[grp])
    aux = {"delta": delta, "nu": nu, "group_power": group_power,
           "residual": abs(big_p - float(group_power.sum()))}
    return _solution(scheme, config, tau_p, gam, ul, dl, gamma_c, aux)


def _solve_cp(scheme: Scheme, config: SystemConfig, betas, tau_p: int) -> MmfSolution:
    require_feasible(scheme, config)
    _check_tau(scheme, config, tau_p)
    betas = _check_inputs(config, betas)
    n, big_p = config.n_antennas, config.dl_power_budget
    sizes = np.asarray(config.group_sizes)
    ups = upsilon(config, betas)
    ul = copilot_ul_powers(config, betas)
    gam = gamma_cp(tau_p, ul, betas, sizes)
    e = ups * _group_sums(1.0 / betas + big_p, sizes)
    gamma_c = float(common_sinr(scheme, config, betas, [tau_p])[0])
    ratio = config.caps * betas ** 2 / (1.0 + betas * big_p)
    at_cap = np.isclose(ratio, ups[config.group_index], rtol=1e-12, atol=0.0)
    aux = {"upsilon": ups, "E": e, "at_cap": at_cap}
    if scheme is Scheme.MrtMucp:
        dl = gamma_c * (1.0 + tau_p * e) / (tau_p * n * ups)
    else:
        delta = tau_p * ups / (1.0 + tau_p * (e - big_p * ups))
        dl = big_p / (delta * np.sum(1.0 / delta))
        aux["delta"] = delta
    return _solution(scheme, config, tau_p, gam, ul, dl, gamma_c, aux)


def solve_mrt_undp(config: SystemConfig, betas, tau_p: int) -> MmfSolution:
    """MRT unicast, dedicated pilots: full pilot power, closed-form common SINR."""
    return _solve_dp(Scheme.MrtUndp, config, betas, tau_p)


def solve_mrt_mudp(config: SystemConfig, betas, tau_p: int) -> MmfSolution:
    """Same optimum as MRT-undp; the transmitted signals coincide."""
    return _solve_dp(Scheme.MrtMudp, config, betas, tau_p)


def solve_zf_undp(config: SystemConfig, betas, tau_p: int) -> MmfSolution:
    return _solve_dp(Scheme.ZfUndp, config, betas, tau_p)


def solve_zf_mudp(config: SystemConfig, betas, tau_p: int,
                  tol: float = BISECTION_TOL) -> MmfSolution:
    """ZF multicast, dedicated pilots; common SINR found by bisection.

    ``per_group_aux`` carries ``delta``, ``nu``, the per-group power
    ``group_power`` and the budget ``residual``.
    """
    return _solve_dp(Scheme.ZfMudp, config, betas, tau_p, tol)


def solve_mrt_mucp(config: SystemConfig, betas, tau_p: int) -> MmfSolution:
    """MRT multicast, co-pilots.  ``per_group_aux['at_cap']`` flags users at their pilot cap."""
    return _solve_cp(Scheme.MrtMucp, config, betas, tau_p)


def solve_zf_mucp(config: SystemConfig, betas, tau_p: int) -> MmfSolution:
    return _solve_cp(Scheme.ZfMucp, config, betas, tau_p)


_SOLVERS = {
    Scheme.MrtUndp: solve_mrt_undp,
    Scheme.ZfUndp: solve_zf_undp,
    Scheme.MrtMudp: solve_mrt_mudp,
    Scheme.ZfMudp: solve_zf_mudp,
    Scheme.MrtMucp: solve_mrt_mucp,
    Scheme.ZfMucp: solve_zf_mucp,
}


def solve_mmf(scheme: Scheme, config: SystemConfig, betas, tau_p: int) -> MmfSolution:
    return _SOLVERS[Scheme.parse(scheme)](config, betas, tau_p)


def min_se_curve(scheme: Scheme, config: SystemConfig, betas):
    """Pilot grid, common SINR and min-SE over every admissible pilot length."""
    scheme = Scheme.parse(scheme)
    require_feasible(scheme, config)
    taus = config.pilot_grid(scheme)
    gam = common_sinr(scheme, config, betas, taus)
    se = prelog(taus, config.coherence_symbols) * np.log2(1.0 + gam)
    return taus, gam, se


def optimize_pilot_length(scheme: Scheme, config: SystemConfig, betas) -> MmfSolution:
    """Exhaustive search of the pilot length maximizing the min-SE.

    Ties go to the shorter pilot.
    """
    taus, _, se = min_se_curve(scheme, config, betas)
    if taus.size == 0:
        raise InfeasibleSchemeError(Scheme.parse(scheme), "empty pilot grid")
    best = int(taus[int(np.argmax(se))])
    return solve_mmf(scheme, config, betas, best)
