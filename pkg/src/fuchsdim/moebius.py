"""Mobius arithmetic in the upper half-plane and in the unit disc.

Half-plane elements are real 2x2 matrices of determinant one acting by
z -> (az+b)/(cz+d).  Disc elements are SU(1,1) matrices [[alpha, conj(beta)],
[beta, conj(alpha)]].  The two models are related by phi(z) = (z-i)/(z+i).

Points at infinity (half-plane model only) are carried by the ``INF`` marker,
never by an IEEE infinity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

RENORMALIZE_EVERY = 16


class ModelMismatchError(ValueError):
    pass


class PoleError(ValueError):
    pass


class NoIsometricCircleError(ValueError):
    pass


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()

HALF_PLANE = "H"
DISC = "D"


@dataclass(frozen=True)
class ExtendedPoint:
    """A point of the half-plane closure (complex or INF) or of the closed disc."""

    value: Union[complex, _Infinity]
    model: str = HALF_PLANE

    def __post_init__(self):
        if self.model not in (HALF_PLANE, DISC):
            raise ValueError(f"unknown model {self.model!r}")
        if self.value is INF:
            if self.model != HALF_PLANE:
                raise ValueError("infinity only exists in the half-plane model")
        else:
            object.__setattr__(self, "value", complex(self.value))

    @property
    def is_infinity(self) -> bool:
        return self.value is INF

    @classmethod
    def boundary(cls, xi: complex) -> "ExtendedPoint":
        xi = complex(xi)
        if abs(abs(xi) - 1.0) > 1e-10:
            raise ValueError(f"{xi} is not on the unit circle")
        return cls(xi / abs(xi), DISC)

    def __repr__(self):
        return f"ExtendedPoint({self.value!r}, {self.model})"


@dataclass(frozen=True)
class RealMoebius:
    a: float
    b: float
    c: float
    d: float
    # number of compositions since the last determinant renormalization
    age: int = field(default=0, compare=False, repr=False)

    @classmethod
    def from_matrix(cls, m) -> "RealMoebius":
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))

    @classmethod
    def identity(cls) -> "RealMoebius":
        return cls(1.0, 0.0, 0.0, 1.0)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> float:
        return self.a + self.d

    def normalized(self) -> "RealMoebius":
        r = np.sqrt(self.det)
        return RealMoebius(self.a / r, self.b / r, self.c / r, self.d / r)

    def inverse(self) -> "RealMoebius":
        return RealMoebius(self.d, -self.b, -self.c, self.a, self.age)

    def __matmul__(self, other: "RealMoebius") -> "RealMoebius":
        a = self.a * other.a + self.b * other.c
        b = self.a * other.b + self.b * other.d
        c = self.c * other.a + self.d * other.c
        d = self.c * other.b + self.d * other.d
        age = self.age + other.age + 1
        out = RealMoebius(a, b, c, d, age)
        if age >= RENORMALIZE_EVERY:
            out = out.normalized()
        return out

    def __call__(self, z):
        return apply(self, z)

    def almost_equal(self, other: "RealMoebius", tol: float = 1e-10) -> bool:
        """Equality in PSL(2,R), i.e. up to overall sign."""
        m, n = self.matrix, other.matrix
        return bool(min(np.abs(m - n).max(), np.abs(m + n).max()) < tol)


@dataclass(frozen=True)
class DiscMoebius:
    alpha: complex
    beta: complex
    age: int = field(default=0, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))

    @classmethod
    def identity(cls) -> "DiscMoebius":
        return cls(1.0, 0.0)

    @classmethod
    def rotation(cls, angle: float) -> "DiscMoebius":
        return cls(np.exp(0.5j * angle), 0.0)

    @classmethod
    def parabolic(cls, xi0: complex, t: float) -> "DiscMoebius":
        """Parabolic element fixing xi0 on the circle, alpha = 1 + i t.

        ``t`` may be any real number; the k-th power is ``parabolic(xi0, k t)``.
        """
        return cls(1.0 + 1j * t, np.conj(xi0) * 1j * t)

    @property
    def matrix(self) -> np.ndarray:
        al, be = self.alpha, self.beta
        return np.array([[al, np.conj(be)], [be, np.conj(al)]])

    @property
    def det(self) -> float:
        return abs(self.alpha) ** 2 - abs(self.beta) ** 2

    @property
    def trace(self) -> float:
        return 2.0 * self.alpha.real

    def normalized(self) -> "DiscMoebius":
        r = np.sqrt(self.det)
        return DiscMoebius(self.alpha / r, self.beta / r)

    def inverse(self) -> "DiscMoebius":
        return DiscMoebius(np.conj(self.alpha), -self.beta, self.age)

    def __matmul__(self, other: "DiscMoebius") -> "DiscMoebius":
        a1, b1, a2, b2 = self.alpha, self.beta, other.alpha, other.beta
        alpha = a1 * a2 + np.conj(b1) * b2
        beta = b1 * a2 + np.conj(a1) * b2
        age = self.age + other.age + 1
        out = DiscMoebius(alpha, beta, age)
        if age >= RENORMALIZE_EVERY:
            out = out.normalized()
        return out

    def __call__(self, z):
        return apply(self, z)

    @property
    def pole(self) -> complex:
        if self.beta == 0:
            raise NoIsometricCircleError("beta = 0: no pole")
        return -np.conj(self.alpha) / self.beta

    def act(self, z):
        """Vectorized action on complex numbers (no infinity handling)."""
        z = np.asarray(z, dtype=complex)
        return (self.alpha * z + np.conj(self.beta)) / (self.beta * z + np.conj(self.alpha))

    def act_boundary(self, xi):
        """Action on unit complex numbers, renormalized to modulus one."""
        w = self.act(xi)
        return w / np.abs(w)

    def dmod(self, xi):
        """Vectorized |D_xi F| = 1/|beta xi + conj(alpha)|^2."""
        xi = np.asarray(xi, dtype=complex)
        return 1.0 / np.abs(self.beta * xi + np.conj(self.alpha)) ** 2

    def almost_equal(self, other: "DiscMoebius", tol: float = 1e-10) -> bool:
        d1 = max(abs(self.alpha - other.alpha), abs(self.beta - other.beta))
        d2 = max(abs(self.alpha + other.alpha), abs(self.beta + other.beta))
        return min(d1, d2) < tol

    def parabolic_parameter(self, tol: float = 1e-7):
        """For a parabolic element return (xi0, t) with self = +-parabolic(xi0, t)."""
        al, be = self.alpha, self.beta
        if al.real < 0:
            al, be = -al, -be
        if abs(al.real - 1.0) > tol or abs(be) < 1e-14:
            raise ValueError("element is not parabolic")
        t = al.imag
        xi0 = np.conj(be / (1j * t))
        return xi0 / abs(xi0), t


Moebius = Union[RealMoebius, DiscMoebius]

# phi(z) = (z - i)/(z + i) as a (non-normalized) complex matrix
_C = np.array([[1.0, -1.0j], [1.0, 1.0j]])
_C_INV = np.linalg.inv(_C)


def phi(z):
    """Half-plane to disc: (z - i)/(z + i); INF goes to 1."""
    if z is INF:
        return 1.0 + 0.0j
    z = np.asarray(z, dtype=complex)
    return (z - 1j) / (z + 1j)


def phi_inv(w):
    """Disc to half-plane: i(1 + w)/(1 - w); returns INF at w = 1 (scalar input)."""
    w = np.asarray(w, dtype=complex)
    if w.ndim == 0:
        if abs(1 - complex(w)) < 1e-15:
            return INF
        return complex(1j * (1 + w) / (1 - w))
    return 1j * (1 + w) / (1 - w)


def boundary_to_real(xi):
    """Real coordinate of a point of the unit circle (xi != 1)."""
    xi = np.asarray(xi, dtype=complex)
    return np.real(1j * (1 + xi) / (1 - xi))


def _apply_real(G: RealMoebius, z):
    if z is INF:
        if G.c == 0:
            return INF
        return complex(G.a / G.c)
    den = G.c * z + G.d
    if den == 0:
        return INF
    return (G.a * z + G.b) / den


def apply(G: Moebius, z: ExtendedPoint) -> ExtendedPoint:
    """Action of G on an extended point of the matching model."""
    if isinstance(G, RealMoebius):
        if z.model != HALF_PLANE:
            raise ModelMismatchError("half-plane element applied to a disc point")
        return ExtendedPoint(_apply_real(G, z.value), HALF_PLANE)
    if isinstance(G, DiscMoebius):
        if z.model != DISC:
            raise ModelMismatchError("disc element applied to a half-plane point")
        w = complex(G.act(z.value))
        if abs(abs(z.value) - 1.0) < 1e-10:
            w = w / abs(w)
        return ExtendedPoint(w, DISC)
    raise TypeError(f"not a Mobius element: {G!r}")


def to_disc(G: RealMoebius) -> DiscMoebius:
    """Conjugate phi G phi^{-1} written as an SU(1,1) element."""
    m = _C @ G.matrix.astype(complex) @ _C_INV
    m = m / np.sqrt(np.linalg.det(m))
    alpha, beta = m[0, 0], m[1, 0]
    return DiscMoebius(alpha, beta).normalized()


def to_half_plane(F: DiscMoebius) -> RealMoebius:
    m = _C_INV @ F.matrix @ _C
    m = m / np.sqrt(np.linalg.det(m))
    if np.abs(m.imag).max() > 1e-8 * max(1.0, np.abs(m).max()):
        # overall factor i from the square root
        m = m * 1j
    return RealMoebius.from_matrix(m.real).normalized()


def derivative_modulus(F: DiscMoebius, xi) -> float:
    """|D_xi F| = 1/(|beta|^2 |xi - omega|^2) for xi on the unit circle."""
    x = xi.value if isinstance(xi, ExtendedPoint) else xi
    if F.beta == 0:
        return 1.0
    den = abs(F.beta * complex(x) + np.conj(F.alpha))
    if den < 1e-300:
        raise PoleError("derivative evaluated at the pole")
    return 1.0 / den ** 2


def isometric_circle(F: DiscMoebius):
    """(center, radius) of the circle where |DF| = 1."""
    if abs(F.beta) < 1e-300:
        raise NoIsometricCircleError("rotation has no isometric circle")
    return F.pole, 1.0 / abs(F.beta)


def denominator(G: RealMoebius, k: int, cusp_reps) -> float:
    """D(G z_k) = |c(G A_k)|."""
    if not 0 <= k < len(cusp_reps):
        raise IndexError(f"cusp index {k} out of range")
    A = cusp_reps[k]
    return abs(G.c * A.a + G.d * A.c)


@dataclass(frozen=True)
class Horoball:
    point: ExtendedPoint
    diameter: float

    def __post_init__(self):
        if not self.diameter > 0:
            raise ValueError("horoball diameter must be positive")


class _UpperHalfPlaneMarker:
    """Horoball based at infinity: the region Im z > T."""

    def __repr__(self):
        return "HALF_PLANE_HOROBALL"


HALF_PLANE_HOROBALL = _UpperHalfPlaneMarker()


def horoball_image(G: RealMoebius, T: float = 1.0):
    """Image under G of {Im z > T}: tangent at G(INF) with diameter 1/(T c^2)."""
    if T <= 0:
        raise ValueError("T must be positive")
    if G.c == 0:
        return HALF_PLANE_HOROBALL
    return Horoball(ExtendedPoint(complex(G.a / G.c), HALF_PLANE), 1.0 / (T * G.c ** 2))
