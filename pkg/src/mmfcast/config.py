"""System configuration, unit normalization and scheme feasibility.

All powers held by :class:`SystemConfig` are noise-normalized (the receiver
noise variance is 1).  Physical watts only appear at the boundary, through
:func:`normalize_power` and :meth:`SystemConfig.from_watts`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace
from typing import Any, Mapping, NamedTuple, Sequence

import numpy as np

# Reference scenario: 20 MHz, -174 dBm/Hz, 500 m cell with a 35 m exclusion
# zone, 3GPP-like path loss, T = 750 symbols.
DEFAULT_BANDWIDTH_HZ = 20e6
DEFAULT_NOISE_PSD_DBM_HZ = -174.0
DEFAULT_CELL_RADIUS_M = 500.0
DEFAULT_EXCLUSION_RADIUS_M = 35.0
DEFAULT_PATHLOSS_EXPONENT = 3.76
DEFAULT_PATHLOSS_REF = 10 ** -3.53
DEFAULT_COHERENCE_SYMBOLS = 750


class Scheme(enum.Enum):
    """The six transmission/pilot/precoder combinations."""

    MrtUndp = "MRT-undp"
    ZfUndp = "ZF-undp"
    MrtMudp = "MRT-mudp"
    ZfMudp = "ZF-mudp"
    MrtMucp = "MRT-mucp"
    ZfMucp = "ZF-mucp"

    @property
    def copilot(self) -> bool:
        """True for the shared-pilot (one pilot per group) schemes."""
        return self in (Scheme.MrtMucp, Scheme.ZfMucp)

    @property
    def unicast(self) -> bool:
        return self in (Scheme.MrtUndp, Scheme.ZfUndp)

    @property
    def zero_forcing(self) -> bool:
        return self in (Scheme.ZfUndp, Scheme.ZfMudp, Scheme.ZfMucp)

    @classmethod
    def parse(cls, name: "str | Scheme") -> "Scheme":
        """Accept enum members, member names (``ZfUndp``) or labels (``ZF-undp``)."""
        if isinstance(name, cls):
            return name
        key = str(name).strip()
        for s in cls:
            if key.lower() in (s.name.lower(), s.value.lower()):
                return s
        raise ValueError(f"unknown scheme {name!r}; expected one of "
                         f"{[s.name for s in cls]}")


ALL_SCHEMES: tuple[Scheme, ...] = tuple(Scheme)


def noise_power_watts(noise_psd_dbm_per_hz: float, bw_hz: float) -> float:
    """Thermal noise power over ``bw_hz`` in watts."""
    if bw_hz <= 0:
        raise ValueError("bandwidth must be positive")
    return 10 ** ((noise_psd_dbm_per_hz + 10 * math.log10(bw_hz) - 30) / 10)


def normalize_power(p_watts: float, noise_psd_dbm_per_hz: float = DEFAULT_NOISE_PSD_DBM_HZ,
                    bw_hz: float = DEFAULT_BANDWIDTH_HZ) -> float:
    """Convert a transmit power in watts to noise-normalized units.

    >>> round(normalize_power(1.0) / 1e13, 4)
    1.2559
    """
    return p_watts / noise_power_watts(noise_psd_dbm_per_hz, bw_hz)


def _as_caps(value: Any, k_tot: int) -> tuple[float, ...]:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        arr = np.full(k_tot, float(arr[0]))
    if arr.shape != (k_tot,):
        raise ValueError(f"ul_power_caps must be a scalar or have {k_tot} entries, "
                         f"got shape {arr.shape}")
    return tuple(float(x) for x in arr)


@dataclass(frozen=True)
class SystemConfig:
    """Scenario parameters.

    ``dl_power_budget`` and ``ul_power_caps`` are noise-normalized.  A scalar
    ``ul_power_caps`` is broadcast to every user; users are ordered group by
    group (all users of group 0, then group 1, ...).
    """

    n_antennas: int
    group_sizes: tuple[int, ...]
    coherence_symbols: int = DEFAULT_COHERENCE_SYMBOLS
    dl_power_budget: float = 0.0
    ul_power_caps: Any = 0.0
    carrier_bw_hz: float = DEFAULT_BANDWIDTH_HZ
    noise_psd_dbm_per_hz: float = DEFAULT_NOISE_PSD_DBM_HZ
    cell_radius_m: float = DEFAULT_CELL_RADIUS_M
    exclusion_radius_m: float = DEFAULT_EXCLUSION_RADIUS_M
    pathloss_exponent: float = DEFAULT_PATHLOSS_EXPONENT
    pathloss_ref: float = DEFAULT_PATHLOSS_REF

    def __post_init__(self):
        sizes = tuple(int(k) for k in np.atleast_1d(self.group_sizes))
        if not sizes or min(sizes) < 1:
            raise ValueError("group_sizes must be a nonempty list of positive integers")
        object.__setattr__(self, "group_sizes", sizes)
        object.__setattr__(self, "ul_power_caps", _as_caps(self.ul_power_caps, sum(sizes)))
        if int(self.n_antennas) < 1:
            raise ValueError("n_antennas must be >= 1")
        object.__setattr__(self, "n_antennas", int(self.n_antennas))
        object.__setattr__(self, "coherence_symbols", int(self.coherence_symbols))
        if self.coherence_symbols < len(sizes):
            raise ValueError("coherence_symbols must be at least the number of groups")
        if self.dl_power_budget < 0 or min(self.ul_power_caps) < 0:
            raise ValueError("powers must be nonnegative")
        if not 0 < self.exclusion_radius_m < self.cell_radius_m:
            raise ValueError("need 0 < exclusion_radius_m < cell_radius_m")
        if self.carrier_bw_hz <= 0 or self.pathloss_exponent <= 0 or self.pathloss_ref <= 0:
            raise ValueError("bandwidth and path-loss parameters must be positive")

    @classmethod
    def from_watts(cls, n_antennas: int, group_sizes: Sequence[int], dl_power_w: float,
                   ul_power_w: "float | Sequence[float]", **kwargs) -> "SystemConfig":
        """Build a config from physical powers, normalizing by the thermal noise."""
        psd = kwargs.get("noise_psd_dbm_per_hz", DEFAULT_NOISE_PSD_DBM_HZ)
        bw = kwargs.get("carrier_bw_hz", DEFAULT_BANDWIDTH_HZ)
        ul = np.asarray(ul_power_w, dtype=float)
        return cls(
            n_antennas=n_antennas,
            group_sizes=tuple(group_sizes),
            dl_power_budget=normalize_power(dl_power_w, psd, bw),
            ul_power_caps=ul / noise_power_watts(psd, bw),
            **kwargs,
        )

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "SystemConfig":
        """Build a config from a flat key-value document.

        Keys mirror the field names.  Powers are read as watts unless
        ``powers_normalized`` is true.  ``n_groups`` plus ``users_per_group``
        may stand in for ``group_sizes``.
        """
        doc = dict(doc)
        normalized = bool(doc.pop("powers_normalized", False))
        if "group_sizes" not in doc and "n_groups" in doc:
            doc["group_sizes"] = [int(doc.pop("users_per_group"))] * int(doc.pop("n_groups"))
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if not normalized:
            psd = doc.get("noise_psd_dbm_per_hz", DEFAULT_NOISE_PSD_DBM_HZ)
            bw = doc.get("carrier_bw_hz", DEFAULT_BANDWIDTH_HZ)
            sigma2 = noise_power_watts(psd, bw)
            doc["dl_power_budget"] = float(doc.get("dl_power_budget", 0.0)) / sigma2
            doc["ul_power_caps"] = np.asarray(doc.get("ul_power_caps", 0.0), dtype=float) / sigma2
        return cls(**doc)

    def to_dict(self) -> dict[str, Any]:
        """Flat document with normalized powers (round-trips through from_dict)."""
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["group_sizes"] = list(self.group_sizes)
        out["ul_power_caps"] = list(self.ul_power_caps)
        out["powers_normalized"] = True
        return out

    def replace(self, **changes) -> "SystemConfig":
        return replace(self, **changes)

    @property
    def n_groups(self) -> int:
        return len(self.group_sizes)

    @property
    def k_tot(self) -> int:
        return sum(self.group_sizes)

    @property
    def noise_power_w(self) -> float:
        return noise_power_watts(self.noise_psd_dbm_per_hz, self.carrier_bw_hz)

    @property
    def caps(self) -> np.ndarray:
        return np.asarray(self.ul_power_caps, dtype=float)

    @property
    def group_index(self) -> np.ndarray:
        """Group id of each user, in stacking order."""
        return np.repeat(np.arange(self.n_groups), self.group_sizes)

    @property
    def group_offsets(self) -> np.ndarray:
        """Column of the first user of each group in the stacked matrix."""
        return np.concatenate(([0], np.cumsum(self.group_sizes)[:-1])).astype(int)

    def interfering_users(self) -> np.ndarray:
        """Per-group count of users outside the group (K_tot - K_j)."""
        return self.k_tot - np.asarray(self.group_sizes)

    def pilot_grid(self, scheme: Scheme) -> np.ndarray:
        """Admissible pilot lengths for ``scheme`` (the last symbol is kept for data)."""
        first = self.n_groups if Scheme.parse(scheme).copilot else self.k_tot
        return np.arange(first, self.coherence_symbols)


class Feasibility(NamedTuple):
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def scheme_feasible(scheme: Scheme, config: SystemConfig) -> Feasibility:
    """Check whether ``scheme`` yields a strictly positive SE under ``config``.

    Returns a :class:`Feasibility` tuple; it is falsy when infeasible and
    ``reason`` is one of ``"pilot_length"``, ``"antennas"``.
    """
    scheme = Scheme.parse(scheme)
    n, t = config.n_antennas, config.coherence_symbols
    pilots = config.n_groups if scheme.copilot else config.k_tot
    if t <= pilots:
        return Feasibility(False, "pilot_length")
    if scheme is Scheme.ZfUndp:
        need = config.k_tot
    elif scheme is Scheme.ZfMudp:
        need = int(config.interfering_users().max())
    elif scheme is Scheme.ZfMucp:
        need = config.n_groups
    else:
        need = 0
    if n <= need:
        return Feasibility(False, "antennas")
    return Feasibility(True)


def require_feasible(scheme: Scheme, config: SystemConfig) -> None:
    feas = scheme_feasible(scheme, config)
    if not feas:
        raise InfeasibleSchemeError(scheme, feas.reason)


class InfeasibleSchemeError(ValueError):
    """Raised when a scheme cannot deliver a positive SE for the given setup."""

    def __init__(self, scheme: Scheme, reason: str):
        self.scheme = Scheme.parse(scheme)
        self.reason = reason
        super().__init__(f"{self.scheme.value} infeasible: {reason}")
