import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from fuchsdim.coding import (
    LEFT,
    RIGHT,
    SINGLETON,
    BacktrackError,
    CuspidalWord,
    EndpointHit,
    aperiodicity_threshold,
    check_aperiodicity,
    concatenate,
    cuspidal_decompose,
    cuspidal_word,
    cylinder,
    enumerate_alphabet,
    expand,
    families,
    geometric_length_direct,
    is_admissible,
    periodic_point,
    transition_matrix,
    word_element,
)
from fuchsdim.group_model import angle_t, builtin

angles = st.floats(0.0, 2 * np.pi, allow_nan=False).filter(lambda t: min(t % (np.pi / 4), np.pi / 4 - t % (np.pi / 4)) > 1e-6)


@settings(max_examples=40, deadline=None)
@given(angles)
def test_expansion_is_admissible_and_decomposes(t):
    g = builtin("gamma2")
    letters = expand(g, np.exp(-1j * t), 30)
    assert is_admissible(g, letters)
    words, _ = cuspidal_decompose(g, letters)
    assert concatenate(words) == letters


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3, allow_nan=False).filter(lambda x: abs(x - round(x)) > 1e-3))
def test_float_and_mp_expansions_agree(x):
    g = builtin("punctured_torus")
    xi = complex((x - 1j) / (x + 1j))
    try:
        with mpmath.workdps(50):
            a = expand(g, mpmath.mpf(x), 12, dps=50)
    except EndpointHit:
        assume(False)           # parabolic point: the expansion terminates
    assert expand(g, xi, 12) == a


def test_first_letter_is_located_arc(group):
    for t in np.linspace(0.05, 6.2, 37):
        xi = np.exp(-1j * t)
        assert group.in_arc(expand(group, xi, 1)[0], xi)


def test_cylinder_contains_point(group):
    rng = np.random.default_rng(0)
    for t in rng.uniform(0, 2 * np.pi, 10):
        xi = np.exp(-1j * t)
        word = expand(group, xi, 5)
        left, right = cylinder(group, word)
        t0 = angle_t(left)
        ln = (angle_t(right) - t0) % (2 * np.pi)
        assert (angle_t(xi) - t0) % (2 * np.pi) <= ln + 1e-12


def test_backtracking_rejected(gamma2):
    with pytest.raises(BacktrackError):
        cuspidal_decompose(gamma2, ("a", "A"))


def test_alphabet_sizes():
    # [DERIVED] counted by direct enumeration of the families
    assert len(enumerate_alphabet(builtin("gamma2"), 25.0)) == 152
    assert len(enumerate_alphabet(builtin("punctured_torus"), 25.0)) == 100


def test_alphabet_respects_bound(group):
    alph = enumerate_alphabet(group, 12.0)
    lengths = [W.length for W in alph.words]
    assert max(lengths) <= 12.0 + 1e-9
    for f in families(group):
        lo, hi = alph.ranges[f.key]
        assert f.length(max(hi + 1, f.q_min)) > 12.0


def test_geometric_length_two_routes(group):
    for W in enumerate_alphabet(group, 10.0).words:
        if W.eps != SINGLETON:
            assert abs(W.length - geometric_length_direct(group, W)) < 1e-8 * (1 + W.length)


def test_lengths_grow_linearly(group):
    # lengths along a family are affine in the number of turns
    for f in families(group):
        q = np.arange(f.q_min, f.q_min + 6)
        L = np.array([f.length(k) for k in q])
        d = np.diff(L)
        assert np.allclose(d, d[0]) and d[0] > 0


def test_word_element_fixes_vertex(group):
    for W in enumerate_alphabet(group, 8.0).words:
        if W.eps == SINGLETON:
            continue
        # the letters of W wind around xi_W: the element minus its last letter fixes it
        F = word_element(group, W.letters[:-1])
        xi = W.xi
        sides = [group.xi_L[W.letters[0]], group.xi_R[W.letters[0]]]
        assert min(abs(xi - s) for s in sides) < 1e-9
        assert abs(F.act_boundary(group.xi_L[W.letters[-1]]) - xi) < 1e-7 or abs(
            F.act_boundary(group.xi_R[W.letters[-1]]) - xi) < 1e-7


def test_typed_word_validation(gamma2):
    with pytest.raises(ValueError):
        cuspidal_word(gamma2, "a", SINGLETON, 1)
    with pytest.raises(ValueError):
        cuspidal_word(gamma2, "a", LEFT, 0)
    with pytest.raises(ValueError):
        CuspidalWord(gamma2, "a", SINGLETON, 2)


def test_aperiodicity_thresholds():
    # [DERIVED] smallest T among word lengths with M^2 > 0
    assert aperiodicity_threshold(builtin("gamma2")) == pytest.approx(2.0)
    assert aperiodicity_threshold(builtin("punctured_torus")) == pytest.approx(4.0)


@pytest.mark.parametrize("T", [25.0, 50.0])
def test_aperiodic_above_threshold(group, T):
    ok, witness = check_aperiodicity(transition_matrix(group, enumerate_alphabet(group, T).words))
    assert ok, witness


def test_below_threshold_has_witness(torus):
    ok, witness = check_aperiodicity(transition_matrix(torus, enumerate_alphabet(torus, 2.5).words))
    assert not ok and witness is not None


def test_periodic_point_has_periodic_expansion(group):
    words = [W for W in enumerate_alphabet(group, 6.0).words if W.eps in (LEFT, RIGHT)]
    M = transition_matrix(group, words).M
    i = 0
    j = int(np.nonzero(M[i])[0][0])
    if not M[j, i]:
        pytest.skip("no 2-cycle from the first word")
    xi = periodic_point(group, [words[i], words[j]])
    letters = expand(group, xi, 2 * (len(words[i]) + len(words[j])))
    block = words[i].letters + words[j].letters
    assert letters[: len(block)] == block
