import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuchsdim.moebius import (
    DISC,
    HALF_PLANE_HOROBALL,
    INF,
    DiscMoebius,
    ExtendedPoint,
    ModelMismatchError,
    NoIsometricCircleError,
    RealMoebius,
    apply,
    boundary_to_real,
    denominator,
    derivative_modulus,
    horoball_image,
    isometric_circle,
    phi,
    phi_inv,
    to_disc,
    to_half_plane,
)

coef = st.floats(-3.0, 3.0, allow_nan=False)
angle = st.floats(0.0, 2 * np.pi, allow_nan=False)


@st.composite
def sl2r(draw):
    a, b, c = draw(coef), draw(coef), draw(coef)
    if abs(a) < 0.2:
        a = 0.2 + abs(a)
    return RealMoebius(a, b, c, (1.0 + b * c) / a)


@given(sl2r(), sl2r(), sl2r())
def test_composition_associative(F, G, H):
    assert ((F @ G) @ H).almost_equal(F @ (G @ H), tol=1e-8 * (1 + np.abs((F @ G @ H).matrix).max()))


@given(sl2r())
def test_inverse(G):
    assert (G @ G.inverse()).almost_equal(RealMoebius.identity(), tol=1e-9 * (1 + np.abs(G.matrix).max() ** 2))


@given(sl2r())
def test_disc_round_trip(G):
    assert to_half_plane(to_disc(G)).almost_equal(G, tol=1e-8 * (1 + np.abs(G.matrix).max()))


@given(sl2r(), st.floats(-5, 5), st.floats(0.1, 5))
def test_conjugation_commutes_with_action(G, x, y):
    z = complex(x, y)
    w_half = apply(G, ExtendedPoint(z)).value
    w_disc = to_disc(G).act(phi(z))
    assert abs(complex(phi(w_half)) - complex(w_disc)) < 1e-9


@given(angle)
def test_phi_round_trip(t):
    xi = np.exp(-1j * t)
    if abs(xi - 1) < 1e-6:
        return
    x = boundary_to_real(xi)
    assert abs(complex(phi(x)) - xi) < 1e-9


def test_phi_infinity():
    assert phi(INF) == 1.0
    assert phi_inv(1.0) is INF
    assert phi_inv(-1.0) == 0.0


@settings(max_examples=50)
@given(sl2r(), angle)
def test_derivative_modulus_against_finite_difference(G, t):
    F = to_disc(G)
    xi = np.exp(1j * t)
    h = 1e-6
    a1 = np.angle(F.act_boundary(np.exp(1j * (t + h))))
    a0 = np.angle(F.act_boundary(np.exp(1j * (t - h))))
    fd = abs(np.angle(np.exp(1j * (a1 - a0)))) / (2 * h)
    ex = derivative_modulus(F, xi)
    assert abs(fd - ex) < 1e-4 * max(1.0, ex)


@given(angle, st.floats(-4, 4), st.integers(-5, 5))
def test_parabolic_powers(t, s, k):
    xi0 = np.exp(1j * t)
    P = DiscMoebius.parabolic(xi0, s)
    Pk = DiscMoebius.identity()
    for _ in range(abs(k)):
        Pk = Pk @ (P if k > 0 else P.inverse())
    assert Pk.almost_equal(DiscMoebius.parabolic(xi0, k * s), tol=1e-8 * (1 + abs(k * s)) ** 2)
    assert abs(P.act(xi0) - xi0) < 1e-12


@given(sl2r(), angle)
def test_isometric_circle_has_unit_derivative(G, t):
    F = to_disc(G)
    if abs(F.beta) < 1e-6:
        return
    c, r = isometric_circle(F)
    z = c + r * np.exp(1j * t)
    assert abs(1.0 / abs(F.beta * z + np.conj(F.alpha)) ** 2 - 1.0) < 1e-8


def test_rotation_has_no_isometric_circle():
    with pytest.raises(NoIsometricCircleError):
        isometric_circle(DiscMoebius.rotation(0.3))


def test_model_mismatch():
    with pytest.raises(ModelMismatchError):
        apply(RealMoebius.identity(), ExtendedPoint(0.5, DISC))


def test_horoball_image():
    assert horoball_image(RealMoebius(1, 2, 0, 1)) is HALF_PLANE_HOROBALL
    H = horoball_image(RealMoebius(0, -1, 1, 0))
    assert H.point.value == 0
    assert H.diameter == 1.0
    with pytest.raises(ValueError):
        horoball_image(RealMoebius.identity(), T=0)


@given(sl2r(), st.floats(0.2, 5))
def test_denominator_scaling(G, a):
    # replacing A_k by A_k diag(a, 1/a) multiplies the denominator by a
    A = RealMoebius(1, 0, 0, 1)
    Aa = RealMoebius(a, 0, 0, 1 / a)
    assert abs(denominator(G, 0, (Aa,)) - a * denominator(G, 0, (A,))) < 1e-9 * (1 + abs(G.c) * a)
