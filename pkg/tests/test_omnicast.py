import numpy as np
import pytest
from scipy import integrate

from mmfcast.channels import TAG_FADING, drop_users, make_rng
from mmfcast.config import SystemConfig
from mmfcast.omnicast import conditional_rates, omnicast_se


def _cfg(**kw):
    base = dict(n_antennas=16, group_sizes=(3, 3), dl_power_budget=1e11, ul_power_caps=1e12)
    base.update(kw)
    return SystemConfig(**base)


def test_doubling_groups_halves_rates():
    betas = np.array([1e-12, 3e-11, 5e-13])
    a = conditional_rates(betas, 1e11, 8, 2, 500, make_rng(0))
    b = conditional_rates(betas, 1e11, 8, 4, 500, make_rng(0))
    np.testing.assert_allclose(b, a / 2, rtol=1e-15)


def test_zero_power_gives_zero():
    res = omnicast_se(_cfg(dl_power_budget=0.0), n_drops=3, n_fading_samples=50)
    assert res.se == 0.0
    tiny = omnicast_se(_cfg(dl_power_budget=1e-6), n_drops=3, n_fading_samples=50)
    assert 0 <= tiny.se < 1e-10


def test_single_antenna_matches_quadrature():
    """N = 1: E log2(1 + a X) with X ~ Exp(1)."""
    snr = 3.0
    exact, _ = integrate.quad(lambda x: np.log2(1 + snr * x) * np.exp(-x), 0, np.inf)
    n = 200_000
    rate = conditional_rates([1.0], snr, 1, 1, n, make_rng(5))[0]
    x = make_rng(5).standard_exponential((1, n)).sum(axis=0)
    se = np.log2(1 + snr * x).std(ddof=1) / np.sqrt(n)
    assert abs(rate - exact) < 3 * se


def test_jensen_bound_per_drop():
    """E log2(1 + P beta X) <= log2(1 + P beta N), up to Monte Carlo error."""
    cfg = _cfg()
    n = 2000
    for d in range(5):
        betas = drop_users(cfg, (1, d)).betas
        x = make_rng(1, TAG_FADING, d).standard_exponential((cfg.n_antennas, n)).sum(axis=0)
        rates = np.log2(1 + cfg.dl_power_budget * betas[:, None] * x) / cfg.n_groups
        se = rates.std(axis=1, ddof=1) / np.sqrt(n)
        bound = np.log2(1 + cfg.dl_power_budget * betas * cfg.n_antennas) / cfg.n_groups
        assert np.all(rates.mean(axis=1) <= bound + 3 * se)
    res = omnicast_se(cfg, n_drops=5, n_fading_samples=n, seed=1)
    worst = [drop_users(cfg, (1, d)).betas.min() for d in range(5)]
    jensen = np.log2(1 + cfg.dl_power_budget * np.array(worst) * cfg.n_antennas) / cfg.n_groups
    assert res.se <= jensen.mean() * 1.05


def test_monotone_in_power_and_antennas():
    cfg = _cfg()
    base = omnicast_se(cfg, n_drops=4, n_fading_samples=200, seed=2)
    more_p = omnicast_se(cfg.replace(dl_power_budget=2e11), n_drops=4, n_fading_samples=200,
                         seed=2)
    more_n = omnicast_se(cfg.replace(n_antennas=17), n_drops=4, n_fading_samples=200, seed=2)
    assert np.all(more_p.per_drop >= base.per_drop)
    assert np.all(more_n.per_drop >= base.per_drop)


def test_deterministic_and_valid():
    a = omnicast_se(_cfg(), n_drops=3, n_fading_samples=100, seed=7)
    b = omnicast_se(_cfg(), n_drops=3, n_fading_samples=100, seed=7)
    assert a == b
    np.testing.assert_array_equal(a.per_drop, b.per_drop)
    assert a.se >= 0 and np.isfinite(a.standard_error)
    with pytest.raises(ValueError):
        omnicast_se(_cfg(), n_drops=0)
