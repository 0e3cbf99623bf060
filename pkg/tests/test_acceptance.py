"""Acceptance criteria, one test per criterion at its stated tolerance.

Each test prints a PASS/FAIL line (collected again in the terminal summary)
before asserting, so a failing criterion still reports its measured value.
"""

import numpy as np
import pytest

from mmfcast.channels import FadingProfile, draw_channels, drop_users, pathloss
from mmfcast.config import (ALL_SCHEMES, DEFAULT_CELL_RADIUS_M, DEFAULT_PATHLOSS_EXPONENT,
                            DEFAULT_PATHLOSS_REF, Scheme, SystemConfig, normalize_power)
from mmfcast.estimation import estimate_cp, estimate_dp
from mmfcast.experiments import SweepSpec, _drop_results, emit_results, run_sweep
from mmfcast.mmf import (BISECTION_TOL, optimize_pilot_length, solve_mmf, zf_mudp_rhs)
from mmfcast.montecarlo import closed_form_terms, compare_bound
from mmfcast.omnicast import omnicast_se
from mmfcast.precoding import build_precoder, mrt_mudp, mrt_undp, zf_mudp
from mmfcast.sinr import sinr_closed_form

from helpers import random_instance


def _edge_snr_db(watts):
    beta = pathloss(DEFAULT_CELL_RADIUS_M, DEFAULT_PATHLOSS_REF, DEFAULT_PATHLOSS_EXPONENT)
    return 10 * np.log10(normalize_power(watts) * beta)


def test_c1a_training_snr_one_watt(acceptance):
    snr = _edge_snr_db(1.0)
    ok = abs(snr - (-5.8)) <= 0.1
    acceptance("1a  1 W -> -5.8 +- 0.1 dB cell-edge SNR", ok, f"{snr:.3f} dB")
    assert ok


def test_c1b_downlink_snr_forty_watts(acceptance):
    # 40 W is 10 log10(40) = 16.02 dB above 1 W, so under one shared
    # normalization it cannot land within 0.1 dB of both -5.8 and 10 dB
    snr = _edge_snr_db(40.0)
    ok = abs(snr - 10.0) <= 0.1
    acceptance("1b  40 W -> 10 +- 0.1 dB cell-edge SNR", ok, f"{snr:.3f} dB")
    assert ok


def _hand(sizes):
    cfg = SystemConfig(n_antennas=100, group_sizes=sizes, coherence_symbols=750,
                       dl_power_budget=10.0, ul_power_caps=0.1)
    return cfg, np.ones(cfg.k_tot)


HAND_CASES = [
    (Scheme.MrtUndp, (2,), 1000 / 44),
    (Scheme.MrtMudp, (2,), 1000 / 44),
    (Scheme.ZfUndp, (2,), 980 / 24),
    (Scheme.ZfMudp, (2,), 1000 / 44),
    (Scheme.MrtMucp, (1,), 500 / 11),
    (Scheme.ZfMucp, (1,), 82.5),
]


def test_c2_closed_form_fixed_points(acceptance):
    worst = 0.0
    for scheme, sizes, target in HAND_CASES:
        sol = solve_mmf(scheme, *_hand(sizes), tau_p=10)
        worst = max(worst, abs(sol.common_sinr - target) / target)
    ok = worst <= 1e-9
    acceptance("2   six solver hand examples to 1e-9 relative", ok, f"max rel err {worst:.1e}")
    assert ok


def _zero_sum_perturbation(rng, p, budget):
    if p.size < 2:
        return None
    d = rng.standard_normal(p.size)
    d -= d.mean()
    d *= rng.uniform(1e-4, 1e-2) * budget / np.abs(d).max()
    # keep the allocation feasible (nonnegative)
    neg = p + d < 0
    if neg.any():
        d *= 0.999 * np.min(p[neg] / -d[neg])
    return p + d


def test_c3_equal_sinr_optimality(acceptance):
    rng = np.random.default_rng(303)
    worst_eq, raised, count = 0.0, 0, 0
    for scheme in ALL_SCHEMES:
        for _ in range(50):
            cfg, betas = random_instance(rng)
            tau = int(rng.choice(cfg.pilot_grid(scheme)[:50]))
            sol = solve_mmf(scheme, cfg, betas, tau)
            sinr = sinr_closed_form(scheme, cfg, betas, sol.gamma_star, sol.dl_powers)
            worst_eq = max(worst_eq, np.max(np.abs(sinr - sol.common_sinr)) / sol.common_sinr)
            base = sinr.min()
            for _ in range(100):
                q = _zero_sum_perturbation(rng, sol.dl_powers, cfg.dl_power_budget)
                if q is None:
                    # a single power variable: the budget pins it, nothing to perturb
                    break
                new = sinr_closed_form(scheme, cfg, betas, sol.gamma_star, q).min()
                raised += new > base * (1 + 1e-12)
                count += 1
    ok = worst_eq <= 1e-8 and raised == 0
    acceptance("3   equal SINR at optimum; perturbations never raise min-SINR", ok,
               f"max SINR spread {worst_eq:.1e}, {raised}/{count} perturbations raised it")
    assert ok


@pytest.fixture(scope="module")
def uatf_runs():
    """MMF operating point and 1e4-sample Monte Carlo run for every scheme."""
    cfg = SystemConfig.from_watts(64, (4, 4), dl_power_w=40.0, ul_power_w=1.0,
                                  coherence_symbols=750)
    profile = drop_users(cfg, 7)
    runs = {}
    for scheme in ALL_SCHEMES:
        sol = optimize_pilot_length(scheme, cfg, profile.betas)
        cmp = compare_bound(scheme, cfg, profile, sol, n_samples=10_000, seed=11, n_sigma=3)
        ref = closed_form_terms(scheme, cfg, profile.betas, sol.ul_powers, sol.dl_powers,
                                sol.tau_p)
        runs[scheme] = (cmp, ref)
    return runs


@pytest.mark.slow
def test_c4a_uatf_sinr_bands(acceptance, uatf_runs):
    outside = [s.name for s, (cmp, _) in uatf_runs.items() if not cmp.ok]
    worst = max(cmp.max_rel_dev for cmp, _ in uatf_runs.values())
    zmax = max(np.max(np.abs(cmp.z_score)) for cmp, _ in uatf_runs.values())
    ok = not outside
    acceptance("4a  UatF SINR of all six schemes within 3 SE (N=64, G=2, K=4, 1e4 samples)",
               ok, f"outside: {outside or 'none'}, max |z| {zmax:.2f}, "
                   f"max rel dev {100 * worst:.2f}%")
    assert ok


@pytest.mark.slow
def test_c4b_uatf_term_identities(acceptance, uatf_runs):
    outside, checks, worst_rel = [], 0, 0.0
    for scheme, (cmp, ref) in uatf_runs.items():
        est = cmp.estimate
        # terms that are exact by construction (ZF nulls, constant ZF gains) have a
        # standard error of ~0; allow float round-off relative to the signal power
        floor = 1e-9 * np.max(ref["signal_mean"]) ** 2
        for name in ("signal_mean", "variance_term", "leakage_terms", "error_terms"):
            mc, target = getattr(est, name), ref[name]
            se = est.standard_errors[name]
            dev = np.abs(mc - target)
            checks += np.size(mc)
            bad = dev > 3 * se + floor
            if bad.any():
                z = dev[bad] / se[bad]
                outside.append(f"{scheme.name} {name} ({bad.sum()} at |z| {z.max():.2f})")
            big = np.abs(target) > floor
            if big.any():
                worst_rel = max(worst_rel, float(np.max(dev[big] / np.abs(target[big]))))
    ok = not outside
    acceptance("4b  UatF term identities within 3 SE (N=64, G=2, K=4, 1e4 samples)", ok,
               f"{checks} checks, outside: {'; '.join(outside) or 'none'}, "
               f"max rel dev {100 * worst_rel:.2f}%")
    assert ok


def test_c5_structural_identities(acceptance):
    cfg = SystemConfig.from_watts(64, (4, 4, 4), dl_power_w=40.0, ul_power_w=1.0)
    profile = drop_users(cfg, 5)
    real = draw_channels(profile, cfg.n_antennas, seed=6, n_samples=200)
    rng = np.random.default_rng(0)
    p_user = rng.uniform(0.5, 1.5, cfg.k_tot) * cfg.dl_power_budget / cfg.k_tot
    p_group = np.full(3, cfg.dl_power_budget / 3)
    dp = estimate_dp(real, cfg.caps, 12, seed=1)
    cp = estimate_cp(real, cfg.caps, 3, seed=1)
    group = cfg.group_index

    s = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    uni, multi = mrt_undp(dp, p_user), mrt_mudp(dp, p_user)
    direct = np.einsum("mnk,k->mn", uni.columns, s[group])
    tx_err = np.max(np.abs(direct - multi.transmit(s))) / np.max(np.abs(direct))

    null = {}
    for scheme, hat, col_of, p in [
            (Scheme.ZfUndp, dp.stacked, np.arange(cfg.k_tot), p_user),
            (Scheme.ZfMudp, dp.stacked, group, p_user),
            (Scheme.ZfMucp, cp.g_hat_user, group, p_group)]:
        w = build_precoder(scheme, dp if not scheme.copilot else cp, p).columns
        prod = np.abs(np.einsum("mnk,mnc->mkc", hat.conj(), w))
        norm = np.linalg.norm(hat, axis=1)[:, :, None] * np.linalg.norm(w, axis=1)[:, None, :]
        mask = col_of[:, None] != np.arange(w.shape[-1])[None, :]
        null[scheme.name] = float(np.max((prod / norm)[:, mask]))

    col = cp.g_hat_user - cp.scale * cp.g_hat_group[..., group]
    col_err = np.max(np.abs(col)) / np.max(np.abs(cp.g_hat_user))

    prof1 = FadingProfile.from_betas(rng.uniform(0.1, 1, 5), (5,))
    est1 = estimate_dp(draw_channels(prof1, 32, seed=2, n_samples=50), np.full(5, 0.3), 5, 2)
    g1 = np.max(np.abs(zf_mudp(est1, np.ones(5)).columns - mrt_mudp(est1, np.ones(5)).columns))
    g1 /= np.max(np.abs(mrt_mudp(est1, np.ones(5)).columns))

    ok = (tx_err <= 1e-13 and max(null.values()) <= 1e-8 and col_err <= 1e-14 and g1 <= 1e-14)
    acceptance("5   structural identities per realization", ok,
               f"MRT tx {tx_err:.1e}, ZF nulls {max(null.values()):.1e}, "
               f"cp collinearity {col_err:.1e}, ZF-mudp(G=1) vs MRT-mudp {g1:.1e}")
    assert ok


def test_c6_bisection(acceptance):
    rng = np.random.default_rng(606)
    worst_res, nonmono = 0.0, 0
    for _ in range(100):
        cfg, betas = random_instance(rng)
        sol = solve_mmf(Scheme.ZfMudp, cfg, betas, int(rng.integers(cfg.k_tot, 300)))
        aux = sol.per_group_aux
        sizes = np.asarray(cfg.group_sizes)
        rhs = zf_mudp_rhs(sol.common_sinr, aux["delta"], aux["nu"], sizes, cfg.n_antennas)
        worst_res = max(worst_res, abs(cfg.dl_power_budget - rhs) / cfg.dl_power_budget)
        pole = np.min((cfg.n_antennas - aux["nu"]) / sizes)
        grid = np.linspace(0, pole, 102)[1:-1, None]
        curve = zf_mudp_rhs(grid, aux["delta"], aux["nu"], sizes, cfg.n_antennas)
        nonmono += not np.all(np.diff(curve) > 0)
    ok = worst_res <= BISECTION_TOL and nonmono == 0
    acceptance("6   bisection residual <= 1e-10 P; RHS monotone (100 instances)", ok,
               f"max residual {worst_res:.1e} P, {nonmono} non-monotone")
    assert ok


def _mean_min_se(cfg, schemes, n_drops=100, seed=0):
    per_drop = _drop_results(cfg, schemes, seed, n_drops, workers=1)
    return {s: float(np.mean([d[s][0] for d in per_drop])) for s in schemes}


@pytest.mark.slow
def test_c7a_high_snr_regime(acceptance):
    cfg = SystemConfig.from_watts(300, (50,) * 3, dl_power_w=40.0, ul_power_w=1.0)
    se = _mean_min_se(cfg, (Scheme.ZfUndp, Scheme.MrtMucp))
    ok = se[Scheme.ZfUndp] > se[Scheme.MrtMucp]
    acceptance("7a  high SNR, N=300: ZF-undp beats MRT-mucp", ok,
               f"{se[Scheme.ZfUndp]:.3f} vs {se[Scheme.MrtMucp]:.3f} bit/s/Hz")
    assert ok


@pytest.mark.slow
def test_c7b_low_snr_regime(acceptance):
    cfg = SystemConfig.from_watts(500, (50,) * 3, dl_power_w=1.0, ul_power_w=0.1)
    se = _mean_min_se(cfg, (Scheme.ZfUndp, Scheme.MrtMucp))
    ok = se[Scheme.MrtMucp] > se[Scheme.ZfUndp]
    acceptance("7b  low SNR, N=500: MRT-mucp beats ZF-undp", ok,
               f"{se[Scheme.MrtMucp]:.3f} vs {se[Scheme.ZfUndp]:.3f} bit/s/Hz")
    assert ok


@pytest.mark.slow
def test_c8_omnicast_dominance(acceptance):
    cfg = SystemConfig.from_watts(300, (20,) * 10, dl_power_w=40.0, ul_power_w=1.0)
    se = _mean_min_se(cfg, (Scheme.ZfUndp, Scheme.MrtMucp))
    omni = omnicast_se(cfg, n_drops=100, n_fading_samples=1000, seed=0)
    best = max(se.values())
    ok = best > omni.se
    acceptance("8   best multicast scheme beats omnicast (G=10, K=20, N=300)", ok,
               f"{best:.3f} vs omnicast {omni.se:.3f} +- {omni.standard_error:.4f}")
    assert ok


def test_c9_pilot_search(acceptance):
    rng = np.random.default_rng(909)
    violations, checks = 0, 0
    for _ in range(20):
        cfg, betas = random_instance(rng)
        for scheme in ALL_SCHEMES:
            best = optimize_pilot_length(scheme, cfg, betas)
            for tau in rng.choice(cfg.pilot_grid(scheme), 50):
                violations += best.min_se < solve_mmf(scheme, cfg, betas, int(tau)).min_se
                checks += 1
    ok = violations == 0
    acceptance("9   SE(tau*) >= SE(tau) on random grid points", ok,
               f"{violations}/{checks} violations")
    assert ok


def test_c10_determinism(acceptance, tmp_path):
    cfg = SystemConfig.from_watts(60, (10,) * 3, dl_power_w=40.0, ul_power_w=1.0)
    spec = SweepSpec("n_antennas", [20, 40, 60, 120], n_drops=10, seed=42, omnicast=True,
                     omnicast_samples=200)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_results(run_sweep(spec, cfg), a, "csv")
    emit_results(run_sweep(spec, cfg, workers=2), b, "csv")
    ok = a.read_bytes() == b.read_bytes()
    acceptance("10  two sweeps with equal seeds give byte-identical CSV", ok,
               f"{len(a.read_bytes())} bytes")
    assert ok
