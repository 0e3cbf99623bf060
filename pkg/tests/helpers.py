import numpy as np

from mmfcast import SystemConfig


def random_instance(rng: np.random.Generator, n_range=(32, 256), g_range=(1, 5),
                    k_range=(1, 10), coherence=400):
    """Random config plus fading; SNRs spread over roughly -10..30 dB."""
    g = int(rng.integers(g_range[0], g_range[1] + 1))
    sizes = tuple(int(k) for k in rng.integers(k_range[0], k_range[1] + 1, size=g))
    k_tot = sum(sizes)
    n = int(rng.integers(max(n_range[0], k_tot + 1), n_range[1] + 1))
    config = SystemConfig(n_antennas=n, group_sizes=sizes, coherence_symbols=coherence,
                          dl_power_budget=10 ** rng.uniform(0, 3),
                          ul_power_caps=10 ** rng.uniform(-1, 1, size=k_tot))
    betas = 10 ** rng.uniform(-1.5, 0.5, size=k_tot)
    return config, betas
