"""User drops, large-scale fading and i.i.d. Rayleigh channel draws.

Randomness is organized in keyed substreams: realization ``m`` drawn under
``seed`` depends on ``(seed, m)`` only, so results do not depend on batch
size or on how work is split across processes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import SystemConfig

# substream tags, kept distinct so that channel, pilot-noise and drop draws
# never share a stream
TAG_DROP = 0
TAG_CHANNEL = 1
TAG_DP_NOISE = 2
TAG_CP_NOISE = 3
TAG_FADING = 4


def make_rng(seed: "int | Sequence[int]", *key: int) -> np.random.Generator:
    """Independent generator for the substream ``key`` of ``seed``."""
    entropy = seed if np.ndim(seed) == 0 else [int(s) for s in seed]
    ss = np.random.SeedSequence(entropy, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def complex_normal(rng: np.random.Generator, shape, scale=1.0) -> np.ndarray:
    """CN(0, scale) samples: two independent real Gaussians of variance scale/2."""
    std = np.sqrt(np.asarray(scale, dtype=float) / 2.0)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return std * (re + 1j * im)


def pathloss(distances_m, pathloss_ref: float, exponent: float) -> np.ndarray:
    """Large-scale fading ``ref / d**exponent``."""
    return pathloss_ref / np.asarray(distances_m, dtype=float) ** exponent


@dataclass(frozen=True)
class FadingProfile:
    """Per-user distances and large-scale fading, users in stacking order."""

    distances_m: np.ndarray
    betas: np.ndarray
    group_sizes: tuple[int, ...]

    @classmethod
    def from_betas(cls, betas, group_sizes: Sequence[int]) -> "FadingProfile":
        """Profile with prescribed fading values and no geometry (distances NaN)."""
        betas = np.asarray(betas, dtype=float)
        if betas.shape != (sum(group_sizes),):
            raise ValueError("need one beta per user")
        return cls(np.full(betas.shape, np.nan), betas, tuple(int(k) for k in group_sizes))

    @property
    def k_tot(self) -> int:
        return int(self.betas.size)

    def per_group(self) -> list[np.ndarray]:
        return np.split(self.betas, np.cumsum(self.group_sizes)[:-1])


def drop_users(config: SystemConfig, seed: "int | Sequence[int]") -> FadingProfile:
    """Drop ``K_tot`` users uniformly over the cell annulus.

    The radius is sampled by inverting the area CDF
    ``(x**2 - r_in**2) / (r_out**2 - r_in**2)``.
    """
    rng = make_rng(seed, TAG_DROP)
    r_in, r_out = config.exclusion_radius_m, config.cell_radius_m
    u = rng.random(config.k_tot)
    x = np.sqrt(r_in ** 2 + u * (r_out ** 2 - r_in ** 2))
    betas = pathloss(x, config.pathloss_ref, config.pathloss_exponent)
    return FadingProfile(x, betas, config.group_sizes)


@dataclass(frozen=True)
class ChannelRealization:
    """True channels stacked as columns, shape ``(..., N, K_tot)``.

    A batch of realizations carries a leading sample axis; ``first_sample``
    is the substream index of its first entry.
    """

    channels: np.ndarray
    profile: FadingProfile
    seed: "int | tuple[int, ...]" = 0
    first_sample: int = 0

    @property
    def n_antennas(self) -> int:
        return self.channels.shape[-2]

    @property
    def batched(self) -> bool:
        return self.channels.ndim == 3

    @property
    def sample_ids(self) -> np.ndarray:
        if not self.batched:
            return np.array([self.first_sample])
        return self.first_sample + np.arange(self.channels.shape[0])

    def user(self, idx: int) -> np.ndarray:
        return self.channels[..., :, idx]


def _one_channel(profile: FadingProfile, n_antennas: int, seed, m: int) -> np.ndarray:
    rng = make_rng(seed, TAG_CHANNEL, m)
    return complex_normal(rng, (n_antennas, profile.k_tot), profile.betas[None, :])


def draw_channels(profile: FadingProfile, n_antennas: int, seed: "int | Sequence[int]",
                  n_samples: "int | None" = None, start: int = 0) -> ChannelRealization:
    """Draw Rayleigh channels ``g ~ CN(0, beta I_N)`` for every user.

    With ``n_samples=None`` a single realization (substream ``start``) is
    returned; otherwise a batch covering substreams ``start .. start+n-1``.
    """
    if n_antennas < 1:
        raise ValueError("n_antennas must be >= 1")
    seed_key = seed if np.ndim(seed) == 0 else tuple(int(s) for s in seed)
    if n_samples is None:
        g = _one_channel(profile, n_antennas, seed_key, start)
    else:
        g = np.stack([_one_channel(profile, n_antennas, seed_key, m)
                      for m in range(start, start + n_samples)])
    return ChannelRealization(g, profile, seed_key, start)
