"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import time

import numpy as np
import pytest

from fuchsdim import diophantine as dio
from fuchsdim.coding import aperiodicity_threshold, check_aperiodicity, enumerate_alphabet, transition_matrix
from fuchsdim.dimension import (
    compute_beta,
    compute_delta,
    derivative_length_ratios,
    dimension_report,
    eigendata_at_one,
    solve_bowen,
)
from fuchsdim.gauss_oracle import (
    HENSLEY,
    UnitGrid,
    gauss_cylinder_bracket,
    gauss_density,
    gauss_dim,
    gauss_operator,
    hensley_fit,
)
from fuchsdim.group_model import builtin
from fuchsdim.transfer import assemble, contraction_theta, lasota_yorke_rate, leading_eigen, make_grid

GROUPS = ("gamma2", "punctured_torus")


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")
        assert ok, detail
    return emit


@pytest.fixture(scope="module")
def eig_one():
    return {name: eigendata_at_one(builtin(name), make_grid(builtin(name), 256)) for name in GROUPS}


def test_criterion_1_hensley_constant(report):
    t0 = time.perf_counter()
    fit = hensley_fit([20, 50, 100, 200], grid=UnitGrid(256))
    dt = time.perf_counter() - t0
    err = abs(fit.constant / HENSLEY - 1)
    report(1, err < 0.03 and dt < 60, f"constant {fit.constant:.6f} vs {HENSLEY:.6f} (rel {err:.2e}), {dt:.1f}s")


def test_criterion_2_gauss_fixed_point(report):
    t0 = time.perf_counter()
    grid = UnitGrid(512)
    h = gauss_density(grid.nodes)
    res = float(np.abs(gauss_operator(1.0, np.inf, grid).matrix @ h - h).max())
    dt = time.perf_counter() - t0
    report(2, res < 1e-10 and dt < 5, f"residual {res:.2e}, {dt:.2f}s")


def test_criterion_3_dim_E2(report):
    t0 = time.perf_counter()
    s256 = gauss_dim(2, UnitGrid(256)).s
    s512 = gauss_dim(2, UnitGrid(512)).s
    lo, hi = gauss_cylinder_bracket(2, 6)
    dt = time.perf_counter() - t0
    ok = abs(s256 - s512) < 1e-6 and lo - 1e-4 <= s512 <= hi + 1e-4 and dt < 30
    report(3, ok, f"dim E_2 = {s512:.10f}, doubling gap {abs(s256 - s512):.1e}, bracket [{lo:.6f}, {hi:.6f}], {dt:.1f}s")


def test_criterion_4_fuchsian_normalization(report, eig_one):
    gaps = {name: abs(e.lam - 1.0) for name, e in eig_one.items()}
    report(4, max(gaps.values()) < 1e-4, ", ".join(f"{k} |lambda-1| = {v:.1e}" for k, v in gaps.items()))


def test_criterion_5_theta_cross_validation(report):
    t0 = time.perf_counter()
    rep = dimension_report(builtin("gamma2"), (25, 50, 100, 200))
    dt = time.perf_counter() - t0
    err = abs(rep.theta_regression / rep.theta_spectral - 1)
    report(5, err < 0.1 and dt < 1200,
           f"Theta_reg {rep.theta_regression:.5f} vs Theta_spec {rep.theta_spectral:.5f} (rel {err:.2e}), {dt:.1f}s")


def test_criterion_6_signs_and_scaling(report, eig_one):
    parts, ok = [], True
    for name in GROUPS:
        g = builtin(name)
        eig = eig_one[name]
        delta = compute_delta(g, eig)
        beta = compute_beta(g, eig)[0]
        grid = make_grid(g, 64)
        norms = [np.abs(assemble(g, 1.0, T, grid, kind="Delta").matrix).sum(axis=1).max() for T in (50.0, 100.0, 200.0)]
        halving = np.array(norms[:-1]) / np.array(norms[1:])
        s = [solve_bowen(g, T, grid).s for T in (25.0, 50.0, 100.0, 200.0)]
        good = delta < 0 and beta > 0 and np.all(np.abs(halving - 2) < 0.2) and np.all(np.diff(s) > 0)
        ok &= bool(good)
        parts.append(f"{name} delta {delta:.4f} beta {beta:.4f} halving {np.round(halving, 3).tolist()}")
    report(6, ok, "; ".join(parts))


def test_criterion_7_aperiodicity(report):
    parts, ok = [], True
    for name in GROUPS:
        g = builtin(name)
        T0 = aperiodicity_threshold(g)
        for T in (T0, T0 + 1.0, 2 * T0 + 5.0, 25.0):
            good, _ = check_aperiodicity(transition_matrix(g, enumerate_alphabet(g, max(T, T0)).words))
            ok &= good
        parts.append(f"{name} T0 = {T0:g}")
    report(7, ok, "M^2 > 0 at and above T0; " + ", ".join(parts))


def test_criterion_8_diophantine(report):
    g = builtin("gamma2")
    rng = np.random.default_rng(0)
    violations, checked, worst = 0, 0, 0.0
    for _ in range(100):
        for v in dio.expansion_approximation_check(g, dio.random_alpha(rng, dps=80), R=15, dps=80):
            checked += 1
            violations += not v.ok
            worst = max(worst, 1 / v.value - v.length)
    floors = [dio.horoball_separation_check(dio.enumerate_parabolic_points(g, Q, (-2, 2)).points) for Q in (50, 100)]
    floor_ok = floors[0] > 0 and abs(floors[1] / floors[0] - 1) < 0.1
    detail = (f"{violations}/{checked} two-sided violations (worst 1/value - |W| = {worst:.3f}, 2 mu = {2 * g.mu_max:g}); "
              f"horoball floor {floors[0]:.4f} -> {floors[1]:.4f}")
    report(8, violations == 0 and floor_ok, detail)


def test_criterion_9_contraction_and_decay(report):
    parts, ok = [], True
    for name in GROUPS:
        g = builtin(name)
        th = contraction_theta(g, 100.0, samples=64)
        th_fine = contraction_theta(g, 100.0, samples=256)
        ratios = {T: derivative_length_ratios(g, T) for T in (25.0, 50.0, 100.0)}
        lo = [r[0] for r in ratios.values()]
        hi = [r[1] for r in ratios.values()]
        eig = leading_eigen(assemble(g, 1.0, 100.0, make_grid(g, 128)))
        rate = lasota_yorke_rate(eig)
        good = (th < 1 and abs(th_fine - th) < 1e-2 and min(lo) > 0 and max(lo) / min(lo) < 1.1
                and max(hi) / min(hi) < 1.1 and rate <= th + 0.05)
        ok &= bool(good)
        parts.append(f"{name} theta {th:.4f} ratios [{min(lo):.4f}, {max(hi):.4f}] LY rate {rate:.4f}")
    report(9, ok, "; ".join(parts))
