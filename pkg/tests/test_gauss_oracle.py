import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuchsdim.gauss_oracle import (
    GOLDEN,
    HENSLEY,
    LINEAR,
    UnitGrid,
    apply_exact,
    brute_force_dim,
    gauss_cw_bracket,
    gauss_cylinder_bracket,
    gauss_density,
    gauss_dim,
    gauss_eigen,
    gauss_lambda,
    gauss_operator,
    hensley_fit,
)

# [DERIVED] spectral collocation, stable under 256 -> 512 nodes; depth-6
# cylinder brackets and Collatz-Wielandt brackets contain each value
DIMS = {2: 0.5312805063, 3: 0.7056609, 4: 0.7889456, 20: 0.96539326}


@pytest.fixture(scope="module")
def grid():
    return UnitGrid(256)


def test_gauss_density_is_fixed(grid):
    A = gauss_operator(1.0, np.inf, UnitGrid(512)).matrix
    h = gauss_density(UnitGrid(512).nodes)
    assert np.abs(A @ h - h).max() < 1e-10


def test_gauss_density_exact_route():
    x = np.linspace(0, 1, 33)
    assert np.abs(apply_exact(1.0, np.inf, gauss_density, x) - gauss_density(x)).max() < 1e-12


@given(st.floats(0.1, 2.0))
@settings(max_examples=10, deadline=None)
def test_single_branch_closed_form(s):
    lam = gauss_lambda(s, 1, UnitGrid(64))
    assert abs(lam - GOLDEN ** (2 * s)) < 1e-8


def test_monotonicity(grid):
    assert gauss_lambda(0.7, 3, grid) < gauss_lambda(0.7, 4, grid)
    assert gauss_lambda(0.8, 3, grid) < gauss_lambda(0.7, 3, grid)


def test_infinite_sum_needs_large_s(grid):
    with pytest.raises(ValueError):
        gauss_operator(0.5, np.inf, grid)


def test_finite_tail_matches_explicit_sum():
    grid = UnitGrid(64)
    A = gauss_operator(0.9, 5000, grid).matrix          # closed-form tail beyond K
    x = grid.nodes
    ks = np.arange(1, 5001, dtype=float)
    y = ks[None, :] + x[:, None]
    direct = (y ** -1.8).sum(axis=1)
    assert np.abs(A.sum(axis=1) - direct).max() < 1e-12


@pytest.mark.parametrize("N", [2, 3, 4])
def test_frozen_dims_and_brackets(N, grid):
    d = gauss_dim(N, grid)
    assert d.residual < 1e-10
    assert abs(d.s - DIMS[N]) < 1e-7
    lo, hi = gauss_cylinder_bracket(N, 6)
    assert lo - 1e-4 <= d.s <= hi + 1e-4
    lo, hi = gauss_cw_bracket(N, 6 if N < 4 else 5)
    assert lo <= d.s <= hi


def test_grid_doubling(grid):
    assert abs(gauss_dim(2, grid).s - gauss_dim(2, UnitGrid(512)).s) < 1e-9


def test_linear_scheme_is_consistent():
    s = gauss_dim(2, UnitGrid(512, LINEAR)).s
    assert abs(s - DIMS[2]) < 1e-4


def test_N1_is_a_point():
    assert gauss_dim(1).s == 0.0


def test_dims_increase(grid):
    s = [gauss_dim(N, grid).s for N in (2, 3, 4, 5)]
    assert np.all(np.diff(s) > 0) and s[-1] < 1


def test_brute_force_matches_vectorized():
    assert abs(brute_force_dim(3, 4) - gauss_cylinder_bracket(3, 4)[1]) < 1e-12


def test_N20_and_kurzweil_band(grid):
    d = gauss_dim(20, grid).s
    assert abs(d - DIMS[20]) < 1e-7
    assert 0.25 <= 20 * (1 - d) <= 0.99


@given(st.floats(0.2, 2.0))
@settings(max_examples=20)
def test_hensley_fit_exact_model(c):
    Ns = [20, 50, 100, 200]
    fit = hensley_fit(Ns, [1 - c / n for n in Ns])
    assert abs(fit.constant - c) < 1e-10


def test_hensley_fit_needs_range():
    with pytest.raises(ValueError):
        hensley_fit([20, 30, 40], [0.9, 0.95, 0.97])


def test_hensley_constant_value():
    assert abs(HENSLEY - 0.6079271018540267) < 1e-15
