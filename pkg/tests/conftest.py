import numpy as np
import pytest

from mmfcast import SystemConfig
from mmfcast.channels import FadingProfile

_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion.

    Lines are printed in the terminal summary so they show up without ``-s``.
    """
    def report(label: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {label}"
        if detail:
            line += f"  ({detail})"
        _ACCEPTANCE.append(line)
        print(line)
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture
def small_config():
    """N = 16, two groups of two, moderate SNR (normalized units)."""
    return SystemConfig(n_antennas=16, group_sizes=(2, 2), coherence_symbols=100,
                        dl_power_budget=10.0, ul_power_caps=0.5)


@pytest.fixture
def small_profile(small_config):
    return FadingProfile.from_betas([1.0, 0.6, 0.8, 0.3], small_config.group_sizes)


@pytest.fixture
def mc_config():
    """The Monte Carlo validation setup: N = 64, G = 2, K = 4."""
    return SystemConfig(n_antennas=64, group_sizes=(4, 4), coherence_symbols=200,
                        dl_power_budget=20.0, ul_power_caps=1.0)


@pytest.fixture
def mc_profile(mc_config):
    rng = np.random.default_rng(2024)
    return FadingProfile.from_betas(rng.uniform(0.2, 1.0, mc_config.k_tot),
                                    mc_config.group_sizes)
