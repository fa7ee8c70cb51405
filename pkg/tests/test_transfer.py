import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuchsdim.coding import enumerate_alphabet
from fuchsdim.group_model import builtin
from fuchsdim.transfer import (
    EigenError,
    TransferMatrix,
    assemble,
    contraction_theta,
    gibbs_cylinder_measure,
    lasota_yorke_rate,
    leading_eigen,
    make_grid,
    normalized_operator_check,
    subdominant_modulus,
    word_operator,
)

INF = float("inf")


@pytest.fixture(scope="module")
def grids():
    return {name: make_grid(builtin(name), 64) for name in ("gamma2", "punctured_torus")}


def _lam(g, s, T, grid):
    return leading_eigen(assemble(g, s, T, grid), tol=1e-13).lam


def test_fuchsian_normalization(group, grids):
    # the full operator at s = 1 preserves the conformal measure
    assert abs(_lam(group, 1.0, INF, grids[group.name]) - 1.0) < 1e-6


def test_eigendata_normalization(group, grids):
    eig = leading_eigen(assemble(group, 0.9, 25.0, grids[group.name]))
    assert abs(eig.mu.sum() - 1.0) < 1e-12
    assert abs(eig.mu @ eig.g.values - 1.0) < 1e-12
    assert np.all(eig.g.values > 0) and np.all(eig.mu >= 0)
    assert eig.residual < 1e-10
    assert normalized_operator_check(eig.operator, eig.lam, eig.g) < 1e-10


@settings(max_examples=8, deadline=None)
@given(st.floats(0.6, 1.2), st.floats(0.01, 0.2))
def test_lambda_decreasing_in_s(s, h):
    g = builtin("gamma2")
    grid = make_grid(g, 32)
    assert _lam(g, s + h, 25.0, grid) < _lam(g, s, 25.0, grid)


def test_lambda_increasing_in_T(group, grids):
    lams = [_lam(group, 1.0, T, grids[group.name]) for T in (10.0, 25.0, 50.0, INF)]
    assert np.all(np.diff(lams) > 0)


def test_word_sum_matches_assembled_operator(gamma2):
    # dual route: sum of single-word matrices against the assembled matrix
    grid = make_grid(gamma2, 24)
    T, s = 8.0, 0.8
    total = sum(word_operator(gamma2, grid, W, s) for W in enumerate_alphabet(gamma2, T).words)
    A = assemble(gamma2, s, T, grid, use_cache=False).matrix
    assert np.abs(total - A).max() < 1e-12 * np.abs(A).max()


def test_delta_is_the_tail(group, grids):
    grid = grids[group.name]
    D = assemble(group, 1.0, 50.0, grid, kind="Delta").matrix
    full = assemble(group, 1.0, INF, grid).matrix
    fin = assemble(group, 1.0, 50.0, grid).matrix
    assert np.abs(full - fin - D).max() < 1e-10


def test_delta_scales_like_inverse_T(group, grids):
    grid = grids[group.name]
    norms = [np.abs(assemble(group, 1.0, T, grid, kind="Delta").matrix).sum(axis=1).max() for T in (50.0, 100.0, 200.0)]
    ratios = np.array(norms[:-1]) / np.array(norms[1:])
    assert np.all(np.abs(ratios - 2.0) < 0.2)


def test_gibbs_cylinders_sum_to_one(gamma2):
    grid = make_grid(gamma2, 32)
    eig = leading_eigen(assemble(gamma2, 0.9, 6.0, grid))
    words = enumerate_alphabet(gamma2, 6.0).words
    total = sum(gibbs_cylinder_measure(eig, [W]) for W in words)
    assert abs(total - 1.0) < 1e-10


def test_spectral_gap(group, grids):
    eig = leading_eigen(assemble(group, 1.0, 100.0, grids[group.name]))
    assert subdominant_modulus(eig) < 0.9 * eig.lam


def test_lasota_yorke_rate_below_theta(group, grids):
    eig = leading_eigen(assemble(group, 1.0, 100.0, grids[group.name]))
    theta = contraction_theta(group, 100.0)
    assert 0 < theta < 1
    assert lasota_yorke_rate(eig) <= theta + 1e-9


def test_negative_entries_rejected(gamma2):
    grid = make_grid(gamma2, 8)
    A = assemble(gamma2, 1.0, 5.0, grid)
    bad = TransferMatrix(A.matrix - 1.0, 1.0, 5.0, grid)
    with pytest.raises(EigenError):
        leading_eigen(bad)


def test_dump_round_trip(gamma2, tmp_path):
    grid = make_grid(gamma2, 8)
    A = assemble(gamma2, 1.0, 5.0, grid)
    A.dump(tmp_path / "op.npz")
    z = np.load(tmp_path / "op.npz")
    assert np.array_equal(z["matrix"], A.matrix)
    assert float(z["T"]) == 5.0
