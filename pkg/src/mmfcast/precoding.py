"""MRT and ZF precoders for unicast and multicast transmission.

All constructors accept estimates with or without a leading sample axis and
return columns shaped ``(..., N, C)`` where ``C`` is ``K_tot`` for unicast
and ``G`` for multicast.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import Scheme
from .estimation import CpEstimate, DpEstimate, _group_sums

# relative condition-number cutoff for the pseudo-inverse
MAX_CONDITION = 1e12


class SingularChannelError(np.linalg.LinAlgError):
    """Stacked channel estimates are (numerically) rank deficient."""


@dataclass(frozen=True)
class PrecodingMatrix:
    scheme: Scheme
    columns: np.ndarray
    allocated_powers: np.ndarray
    column_groups: np.ndarray  # group id of each column

    @property
    def column_index_map(self) -> np.ndarray:
        """Column index of each user (unicast) or group (multicast)."""
        return np.arange(self.columns.shape[-1])

    def stream_matrix(self) -> np.ndarray:
        """Per-stream precoders ``(..., N, G)``: unicast columns summed over each group.

        Since every user of group ``j`` receives ``s_j``, this is the matrix
        that actually multiplies the data vector ``s``.
        """
        if not self.scheme.unicast:
            return self.columns
        sizes = np.bincount(self.column_groups)
        return _group_sums(self.columns, sizes)

    def transmit(self, symbols: np.ndarray) -> np.ndarray:
        """Transmitted vector for one data vector ``s`` of length G."""
        return self.stream_matrix() @ symbols


def _powers(p, size: int, what: str) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (size,):
        raise ValueError(f"need {size} {what} powers, got shape {p.shape}")
    if np.any(p < 0):
        raise ValueError("downlink powers must be nonnegative")
    return p


def _mrt_scale(p: np.ndarray, n: int, gamma: np.ndarray) -> np.ndarray:
    if np.any((gamma <= 0) & (p > 0)):
        raise ZeroDivisionError("zero estimate variance with nonzero downlink power")
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p > 0, np.sqrt(p / (n * gamma)), 0.0)


def pinv_columns(a: np.ndarray) -> np.ndarray:
    """``A (A^H A)^{-1}`` for tall ``A`` (stacked allowed), via thin QR.

    With ``A = QR`` this is ``Q R^{-H}``; no Gram matrix is formed.
    """
    q, r = np.linalg.qr(a)
    sv = np.linalg.svd(r, compute_uv=False)
    if np.any(sv[..., -1] <= sv[..., 0] / MAX_CONDITION):
        raise SingularChannelError("stacked channel estimate is rank deficient")
    r_h = np.conj(np.swapaxes(r, -1, -2))
    eye = np.broadcast_to(np.eye(r.shape[-1]), r.shape)
    return q @ np.linalg.solve(r_h, eye)


def project_out(basis: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Project ``v`` onto the orthogonal complement of ``span(basis)``."""
    if basis.shape[-1] == 0:
        return v
    q, r = np.linalg.qr(basis)
    sv = np.linalg.svd(r, compute_uv=False)
    if np.any(sv[..., -1] <= sv[..., 0] / MAX_CONDITION):
        raise SingularChannelError("interfering-group estimates are rank deficient")
    return v - q @ (np.conj(np.swapaxes(q, -1, -2)) @ v)


def mrt_undp(est: DpEstimate, dl_powers) -> PrecodingMatrix:
    """``w_jk = sqrt(p_jk / (N gamma_jk)) g_hat_jk``."""
    n = est.stacked.shape[-2]
    p = _powers(dl_powers, est.gamma.size, "per-user")
    cols = est.stacked * _mrt_scale(p, n, est.gamma)
    groups = np.repeat(np.arange(len(est.group_sizes)), est.group_sizes)
    return PrecodingMatrix(Scheme.MrtUndp, cols, p, groups)


def zf_undp(est: DpEstimate, dl_powers, n_antennas: int | None = None) -> PrecodingMatrix:
    """Unicast ZF: column ``k`` of ``G_hat (G_hat^H G_hat)^{-1}`` scaled by
    ``sqrt(p_k gamma_k (N - K_tot))``."""
    n = est.stacked.shape[-2] if n_antennas is None else n_antennas
    k_tot = est.gamma.size
    if n <= k_tot:
        raise ValueError(f"ZF-undp needs N > K_tot ({n} <= {k_tot})")
    p = _powers(dl_powers, k_tot, "per-user")
    cols = pinv_columns(est.stacked) * np.sqrt(p * est.gamma * (n - k_tot))
    groups = np.repeat(np.arange(len(est.group_sizes)), est.group_sizes)
    return PrecodingMatrix(Scheme.ZfUndp, cols, p, groups)


def mrt_mudp(est: DpEstimate, dl_powers) -> PrecodingMatrix:
    """Group precoder: the sum of the group's unicast MRT columns."""
    unicast = mrt_undp(est, dl_powers)
    groups = np.arange(len(est.group_sizes))
    return PrecodingMatrix(Scheme.MrtMudp, unicast.stream_matrix(),
                           unicast.allocated_powers, groups)


def zf_mudp(est: DpEstimate, dl_powers, n_antennas: int | None = None) -> PrecodingMatrix:
    """Within-group MRT combination projected away from all other groups' estimates.

    Per-user weights are ``sqrt(p_jk / ((N - nu_j) gamma_jk))`` with
    ``nu_j = K_tot - K_j``, which gives ``E||w_j||^2 = sum_k p_jk``.
    """
    n = est.stacked.shape[-2] if n_antennas is None else n_antennas
    sizes = np.asarray(est.group_sizes)
    k_tot = int(sizes.sum())
    nu = k_tot - sizes
    if n <= nu.max():
        raise ValueError(f"ZF-mudp needs N > K_tot - K_j for all groups ({n} <= {nu.max()})")
    p = _powers(dl_powers, k_tot, "per-user")
    group = np.repeat(np.arange(sizes.size), sizes)
    weights = _mrt_scale(p, 1, est.gamma * (n - nu[group]))
    combos = _group_sums(est.stacked * weights, sizes)
    cols = []
    for j in range(sizes.size):
        others = np.delete(est.stacked, np.flatnonzero(group == j), axis=-1)
        cols.append(project_out(others, combos[..., j:j + 1]))
    return PrecodingMatrix(Scheme.ZfMudp, np.concatenate(cols, axis=-1), p,
                           np.arange(sizes.size))


def mrt_mucp(est: CpEstimate, dl_group_powers) -> PrecodingMatrix:
    """``w_j = sqrt(p_j / (N gamma_j)) g_hat_j`` on the composite estimates."""
    n = est.g_hat_group.shape[-2]
    p = _powers(dl_group_powers, len(est.group_sizes), "per-group")
    cols = est.g_hat_group * _mrt_scale(p, n, est.gamma_group)
    return PrecodingMatrix(Scheme.MrtMucp, cols, p, np.arange(p.size))


def zf_mucp(est: CpEstimate, dl_group_powers, n_antennas: int | None = None) -> PrecodingMatrix:
    """Column ``j`` of the composite-channel pseudo-inverse scaled by
    ``sqrt(p_j gamma_j (N - G))``."""
    n = est.g_hat_group.shape[-2] if n_antennas is None else n_antennas
    g = len(est.group_sizes)
    if n <= g:
        raise ValueError(f"ZF-mucp needs N > G ({n} <= {g})")
    p = _powers(dl_group_powers, g, "per-group")
    cols = pinv_columns(est.g_hat_group) * np.sqrt(p * est.gamma_group * (n - g))
    return PrecodingMatrix(Scheme.ZfMucp, cols, p, np.arange(g))


def build_precoder(scheme: Scheme, est, dl_powers) -> PrecodingMatrix:
    """Dispatch to the constructor for ``scheme``."""
    scheme = Scheme.parse(scheme)
    if scheme.copilot != isinstance(est, CpEstimate):
        raise TypeError(f"{scheme.value} needs a "
                        f"{'co-pilot' if scheme.copilot else 'dedicated-pilot'} estimate")
    return {
        Scheme.MrtUndp: mrt_undp,
        Scheme.ZfUndp: zf_undp,
        Scheme.MrtMudp: mrt_mudp,
        Scheme.ZfMudp: zf_mudp,
        Scheme.MrtMucp: mrt_mucp,
        Scheme.ZfMucp: zf_mucp,
    }[scheme](est, dl_powers)
