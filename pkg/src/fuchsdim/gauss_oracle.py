"""Continued fractions with bounded partial quotients.

The Gauss transfer operator

    L_{s,N} f(x) = sum_{k=1}^N (k + x)^{-2 s} f(1 / (k + x)),   x in [0, 1],

discretized on [0, 1] and fed through the same eigen and bisection code as the
circle operators.  For k > K the sum is done in closed form: f(u) is fitted by
a polynomial in u = 1/(k + x) on [0, 1/(K + 1 + x)] and the powers are summed
with Hurwitz zeta values.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import zeta as hurwitz_zeta

from .dimension import BracketError, bowen_bisect
from .transfer import CHEBYSHEV, LINEAR, Eigendata, TransferMatrix, leading_eigen

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
HENSLEY = 6.0 / np.pi**2


@dataclass
class UnitGrid:
    """Chebyshev-Lobatto nodes on [0, 1] (clustered at both ends)."""

    m: int
    scheme: str = CHEBYSHEV

    def __post_init__(self):
        if self.m < 4:
            raise ValueError("need at least 4 nodes")
        j = np.arange(self.m)
        self.nodes = 0.5 * (1.0 - np.cos(np.pi * j / (self.m - 1)))
        w = (-1.0) ** j
        w[0] *= 0.5
        w[-1] *= 0.5
        self._bary = w
        self.letters = ("x",)

    @property
    def size(self) -> int:
        return self.m

    def interp_matrix(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float).ravel()
        if self.scheme == LINEAR:
            return self._linear(u)
        d = u[:, None] - self.nodes[None, :]
        hit = d == 0.0
        d[hit] = 1.0
        M = self._bary[None, :] / d
        M /= M.sum(axis=1, keepdims=True)
        rows = np.nonzero(hit.any(axis=1))[0]
        M[rows] = hit[rows].astype(float)
        return M

    def _linear(self, u):
        x = self.nodes
        i = np.clip(np.searchsorted(x, u, side="right") - 1, 0, self.m - 2)
        t = (u - x[i]) / (x[i + 1] - x[i])
        M = np.zeros((u.size, self.m))
        r = np.arange(u.size)
        M[r, i] = 1.0 - t
        M[r, i + 1] = t
        return M

    def evaluate(self, values, u) -> np.ndarray:
        return self.interp_matrix(u) @ values


@dataclass
class GaussTail:
    K: int = 64          # explicit branches k <= K
    degree: int = 10     # polynomial degree in u for k > K
    K_finite: int = 4096  # finite N up to this bound are summed explicitly


def _cheb_points(n):
    return 0.5 * (1.0 - np.cos(np.pi * (np.arange(n) + 0.5) / n))


def _tail_weights(s: float, x: float, K: int, N: float, degree: int):
    """(u points, weights) with sum_{K<k<=N} (k+x)^{-2s} f(1/(k+x)) = weights . f(u points).

    Exact for polynomials of the given degree in u.
    """
    U = 1.0 / (K + 1.0 + x)
    v = _cheb_points(degree + 1)
    V = np.vander(v, degree + 1, increasing=True)
    j = np.arange(degree + 1)
    z = hurwitz_zeta(2.0 * s + j, K + 1.0 + x)
    if np.isfinite(N):
        z = z - hurwitz_zeta(2.0 * s + j, N + 1.0 + x)
    moments = z / U**j          # sum over k of (k+x)^{-2s} (u/U)^j
    w = np.linalg.solve(V.T, moments)
    return v * U, w


def gauss_operator(s: float, N, grid: UnitGrid, tail: GaussTail | None = None) -> TransferMatrix:
    """Matrix of L_{s,N} on the grid; N may be np.inf (requires s > 1/2)."""
    tail = tail or GaussTail()
    N = float(N)
    if N < 1:
        raise ValueError("N must be at least 1")
    if not np.isfinite(N) and s <= 0.5:
        raise ValueError("the infinite sum needs s > 1/2")
    x = grid.nodes
    m = grid.m
    if np.isfinite(N) and (N <= tail.K_finite or s <= 0.5):
        K = int(N)
    elif grid.scheme == CHEBYSHEV:
        K = tail.K
    else:
        K = max(tail.K, _linear_K(grid))
    A = np.zeros((m, m))
    for k0 in range(1, K + 1, 16):
        ks = np.arange(k0, min(K, k0 + 15) + 1, dtype=float)
        y = ks[None, :] + x[:, None]
        W = y ** (-2.0 * s)
        I = grid.interp_matrix(1.0 / y).reshape(m, ks.size, m)
        A += np.einsum("ik,ikj->ij", W, I)
    info = {"K": K, "degree": tail.degree}
    if N > K:
        if grid.scheme == CHEBYSHEV:
            for i, xi in enumerate(x):
                u, w = _tail_weights(s, xi, K, N, tail.degree)
                A[i] += w @ grid.interp_matrix(u)
        else:
            # images lie in the first cell, where the interpolant is linear in u
            h = x[1]
            j = np.arange(2)
            for i, xi in enumerate(x):
                z = hurwitz_zeta(2.0 * s + j, K + 1.0 + xi)
                if np.isfinite(N):
                    z = z - hurwitz_zeta(2.0 * s + j, N + 1.0 + xi)
                A[i, 0] += z[0] - z[1] / h
                A[i, 1] += z[1] / h
    return TransferMatrix(A, s, N, grid, "gauss", info)


def _linear_K(grid: UnitGrid) -> int:
    return int(np.ceil(1.0 / grid.nodes[1]))


def apply_exact(s: float, N, f, x, tail: GaussTail | None = None) -> np.ndarray:
    """L_{s,N} f at the points x for a callable f (no interpolation)."""
    tail = tail or GaussTail()
    N = float(N)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    K = int(N) if np.isfinite(N) and (N <= tail.K_finite or s <= 0.5) else tail.K
    ks = np.arange(1, K + 1, dtype=float)
    y = ks[None, :] + x[:, None]
    out = np.sum(y ** (-2.0 * s) * f(1.0 / y), axis=1)
    if N > K:
        for i, xi in enumerate(x):
            u, w = _tail_weights(s, xi, K, N, tail.degree)
            out[i] += w @ f(u)
    return out


def gauss_density(x):
    return 1.0 / (1.0 + np.asarray(x, dtype=float))


def gauss_eigen(s: float, N, grid: UnitGrid, tol: float = 1e-13) -> Eigendata:
    return leading_eigen(gauss_operator(s, N, grid), tol=tol, positive=grid.scheme == LINEAR)


def gauss_lambda(s: float, N, grid: UnitGrid) -> float:
    return gauss_eigen(s, N, grid).lam


@dataclass
class GaussDim:
    N: int
    s: float
    residual: float
    m: int


def gauss_dim(N: int, grid: UnitGrid | None = None, tol: float = 1e-10) -> GaussDim:
    """dim E_N from lambda(s_N, N) = 1; N = 1 gives 0 (a single point)."""
    grid = grid or UnitGrid(256)
    if N == 1:
        return GaussDim(1, 0.0, 0.0, grid.m)
    if N < 1:
        raise ValueError("N must be a positive integer")
    s, lm, _, _ = bowen_bisect(lambda v: gauss_lambda(v, N, grid), 0.5, 1.0, tol)
    return GaussDim(int(N), s, abs(lm - 1.0), grid.m)


# -- cylinder oracles ------------------------------------------------------------


def _continuants(N: int, depth: int):
    """(q_n, q_{n-1}) for all blocks in {1..N}^depth."""
    q, qp = np.array([1.0]), np.array([0.0])
    for _ in range(depth):
        k = np.arange(1, N + 1, dtype=float)
        q, qp = (k[None, :] * q[:, None] + qp[:, None]).ravel(), np.repeat(q, N)
    return q, qp


def gauss_cylinder_bracket(N: int, depth: int):
    """[s_inf, s_sup] from sum (q_n + q_{n-1})^{-2s} = 1 and sum q_n^{-2s} = 1.

    |D F_w| = (q_{n-1} x + q_n)^{-2} is extremal at the interval ends, so the
    two sums bound L^n 1 from above and below.
    """
    if N ** depth > 10**7:
        raise MemoryError("more than 1e7 blocks")
    q, qp = _continuants(N, depth)
    lo_log = -2.0 * np.log(q + qp)
    hi_log = -2.0 * np.log(q)

    def root(lg):
        return brentq(lambda s: np.log(np.exp(s * lg).sum()), 1e-9, 4.0, xtol=1e-14)

    return root(lo_log), root(hi_log)


def _branch_logs(N: int, depth: int, x):
    """log |D F_w(x)| for every depth-n block and every point x (rows)."""
    q, qp = _continuants(N, depth)
    return -2.0 * np.log(qp[None, :] * x[:, None] + q[None, :])


def gauss_cw_bracket(N: int, depth: int, points: int = 9):
    """s-bracket from min/max over points of L^n 1 / L^{n-1} 1 = 1 (exact branches)."""
    x = np.linspace(0.0, 1.0, points)
    hi = _branch_logs(N, depth, x)
    lo = _branch_logs(N, depth - 1, x)

    def ratio(s):
        return np.exp(s * hi).sum(axis=1) / np.exp(s * lo).sum(axis=1)

    s_a = brentq(lambda s: ratio(s).min() - 1.0, 1e-6, 2.0, xtol=1e-14)
    s_b = brentq(lambda s: ratio(s).max() - 1.0, 1e-6, 2.0, xtol=1e-14)
    return min(s_a, s_b), max(s_a, s_b)


def brute_force_dim(N: int, depth: int) -> float:
    """Pressure root at x = 0 by enumerating blocks explicitly (slow reference)."""
    logs = []
    for blk in itertools.product(range(1, N + 1), repeat=depth):
        q, qp = 1, 0
        for k in blk:
            q, qp = k * q + qp, q
        logs.append(-2.0 * np.log(q))
    logs = np.array(logs)
    return brentq(lambda s: np.log(np.exp(s * logs).sum()), 1e-9, 4.0, xtol=1e-14)


# -- Hensley asymptotics --------------------------------------------------------


@dataclass
class HensleyFit:
    constant: float
    coefficients: list
    Ns: list
    scaled: list          # N (1 - dim E_N)
    dims: list = field(default_factory=list)


def hensley_fit(Ns, dims=None, grid: UnitGrid | None = None) -> HensleyFit:
    """Extrapolate N (1 - dim E_N) = c0 + c1 log(N)/N + c2/N to N = inf."""
    Ns = np.asarray(sorted(Ns), dtype=float)
    if Ns.max() < 5 * Ns.min():
        raise ValueError("N range must span a factor of at least 5")
    if dims is None:
        dims = [gauss_dim(int(n), grid).s for n in Ns]
    dims = np.asarray(dims, dtype=float)
    y = Ns * (1.0 - dims)
    cols = [np.ones_like(Ns), np.log(Ns) / Ns, 1.0 / Ns]
    if len(Ns) < 3:
        cols = cols[:1] + cols[2:]
    X = np.column_stack(cols[: len(Ns)])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    return HensleyFit(float(coef[0]), [float(c) for c in coef], list(Ns), list(y), list(dims))


__all__ = [
    "BracketError",
    "GOLDEN",
    "HENSLEY",
    "UnitGrid",
    "GaussTail",
    "gauss_operator",
    "apply_exact",
    "gauss_density",
    "gauss_eigen",
    "gauss_lambda",
    "gauss_dim",
    "gauss_cylinder_bracket",
    "gauss_cw_bracket",
    "brute_force_dim",
    "HensleyFit",
    "hensley_fit",
]
