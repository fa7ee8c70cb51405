"""Discretized transfer operators on the boundary circle.

Functions live on the closed letter arcs; each arc carries its own node set
and values at the arc ends are one-sided limits from inside the arc.  For a
node xi in [a] the operator sums |D_xi F_W|^s f(F_W xi) over the cuspidal
words W whose domain contains [a].

Words of a cusp family (a0, eps, j) are F_P^q o F_V.  For T = inf the sum
over q >= K is evaluated with the substitution u = 1/q:

    sum_{q >= K} q^{-2s} psi(1/q),   psi(u) = (|D F_V| A(u))^s f(z(u)),

where A(u) and z(u) are closed forms in u, smooth on [0, 1/K].  psi is fitted
by a polynomial in u and summed exactly with Hurwitz zeta values.  With
linear interpolation K is chosen so that z(u) stays inside the last cell of
the arc, where the interpolant is smooth.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.special import zeta as hurwitz_zeta

from .coding import (
    LEFT,
    RIGHT,
    SINGLETON,
    domain_letters,
    enumerate_alphabet,
    families,
)
from .group_model import GroupPresentation, TWO_PI, angle_t

log = logging.getLogger(__name__)

LINEAR = "linear"
CHEBYSHEV = "chebyshev"


class EigenError(RuntimeError):
    pass


# -- grids and functions -------------------------------------------------------


@dataclass
class ArcGrid:
    """Per-arc nodes, uniform (linear scheme) or Chebyshev-Lobatto."""

    g: GroupPresentation = field(repr=False)
    m: int
    scheme: str = LINEAR
    cluster: float = 0.0
    shape: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("need at least two nodes per arc")
        if self.scheme not in (LINEAR, CHEBYSHEV):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        self.letters = self.g.letters_by_order()
        self.index = {x: i for i, x in enumerate(self.letters)}
        k = np.arange(self.m)
        if self.scheme == LINEAR:
            x = k / (self.m - 1)
            c = self.cluster
            self.unit = (1.0 - c) * x + c * 0.5 * (1.0 - np.cos(np.pi * x))
        else:
            self.unit = 0.5 * (1.0 - np.cos(np.pi * k / (self.m - 1)))
        bw = np.where(k % 2 == 0, 1.0, -1.0)
        bw[0] *= 0.5
        bw[-1] *= 0.5
        self._bary = bw
        self.tau = {x: self.g.length[x] * self.unit for x in self.letters}
        self.nodes = np.concatenate([self.g.point(x, self.tau[x]) for x in self.letters])

    @property
    def size(self) -> int:
        return self.m * len(self.letters)

    def block(self, x: str) -> slice:
        i = self.index[x]
        return slice(i * self.m, (i + 1) * self.m)

    def letter_of_node(self) -> np.ndarray:
        return np.repeat(np.arange(len(self.letters)), self.m)

    def tau_of(self, x: str, z) -> np.ndarray:
        """Local coordinate of points z known to lie in the closed arc [x]."""
        ln = self.g.length[x]
        tau = np.mod(angle_t(z) - self.g.t_left[x], TWO_PI)
        tau = np.where(tau > 0.5 * (TWO_PI + ln), tau - TWO_PI, tau)
        if tau.size and (tau.min() < -1e-8 or tau.max() > ln + 1e-8):
            raise RuntimeError(f"branch image outside arc {x}")
        return np.clip(tau, 0.0, ln)

    def interp_matrix(self, x: str, tau) -> np.ndarray:
        """Dense (P, m) interpolation rows for points of [x]."""
        u = np.asarray(tau, dtype=float).ravel() / self.g.length[x]
        P = u.size
        if self.scheme == LINEAR:
            E = np.zeros((P, self.m))
            i, w0, w1 = self._cell_weights(x, u)
            E[np.arange(P), i] = w0
            E[np.arange(P), i + 1] = w1
            return E
        diff = u[:, None] - self.unit[None, :]
        exact = np.abs(diff) < 1e-15
        diff[exact] = 1.0
        W = self._bary[None, :] / diff
        E = W / W.sum(axis=1, keepdims=True)
        rows = np.nonzero(exact.any(axis=1))[0]
        if rows.size:
            E[rows] = exact[rows].astype(float)
        return E

    def _cell_weights(self, x: str, u):
        """Cell index and the two nonnegative weights for unit coordinates u.

        With a shape function phi the interpolant is phi * linear(f / phi).
        """
        i = np.clip(np.searchsorted(self.unit, u, side="right") - 1, 0, self.m - 2)
        lam = (u - self.unit[i]) / (self.unit[i + 1] - self.unit[i])
        w0, w1 = 1.0 - lam, lam
        if self.shape is not None:
            c = self.shape[x]
            ph = np.polynomial.chebyshev.chebval(2.0 * u - 1.0, c)
            pn = np.polynomial.chebyshev.chebval(2.0 * self.unit - 1.0, c)
            w0 = w0 * ph / pn[i]
            w1 = w1 * ph / pn[i + 1]
        return i, w0, w1

    def evaluate(self, values, x: str, tau) -> np.ndarray:
        vals = np.asarray(values)[self.block(x)]
        return self.interp_matrix(x, tau) @ vals

    def quadrature_weights(self) -> np.ndarray:
        """Trapezoid (linear) or Clenshaw-Curtis-like weights in arc length."""
        out = []
        for x in self.letters:
            t = self.tau[x]
            w = np.zeros(self.m)
            d = np.diff(t)
            w[:-1] += 0.5 * d
            w[1:] += 0.5 * d
            out.append(w)
        return np.concatenate(out)


def reference_shape(g: GroupPresentation, m: int = 64, degree: int = 12) -> dict:
    """Per-arc Chebyshev fit of the (1, inf) eigenfunction from a coarse solve.

    Used as the shape phi of ``ArcGrid``: the interpolant phi * linear(f/phi)
    keeps nonnegative weights and is exact on phi.
    """
    key = ("shape", m, degree)
    if key not in g.cache:
        grid = ArcGrid(g, m, LINEAR)
        e = leading_eigen(assemble(g, 1.0, np.inf, grid))
        coef = {}
        for x in grid.letters:
            coef[x] = np.polynomial.chebyshev.chebfit(2.0 * grid.unit - 1.0, e.g.values[grid.block(x)], degree)
        g.cache[key] = coef
    return g.cache[key]


def make_grid(g: GroupPresentation, m: int, scheme: str = "shaped") -> ArcGrid:
    """Grid factory: 'shaped' (default), 'linear' or 'chebyshev'."""
    if scheme == "shaped":
        return ArcGrid(g, m, LINEAR, shape=reference_shape(g))
    return ArcGrid(g, m, scheme)


@dataclass
class ArcFunction:
    grid: ArcGrid
    values: np.ndarray

    def __call__(self, x: str, tau):
        return self.grid.evaluate(self.values, x, tau)

    @property
    def sup(self) -> float:
        return float(np.abs(self.values).max())

    def lip(self) -> float:
        """Largest per-arc difference quotient between consecutive nodes."""
        best = 0.0
        for x in self.grid.letters:
            v = self.values[self.grid.block(x)]
            d = np.diff(self.grid.tau[x])
            best = max(best, float(np.max(np.abs(np.diff(v)) / d)))
        return best

    def log_lip(self) -> float:
        """Smallest C with f(xi') <= exp(C |xi' - xi|) f(xi) on adjacent nodes."""
        if np.any(self.values <= 0):
            return np.inf
        return ArcFunction(self.grid, np.log(self.values)).lip()

    def in_cone(self, C: float) -> bool:
        return self.log_lip() <= C


# -- branch geometry -------------------------------------------------------------


def _parabolic_power(xi0, t, q, y):
    """F_P^q(y) and |D_y F_P^q| for the parabolic (xi0, t); q broadcasts."""
    al = 1.0 + 1j * q * t
    be = np.conj(xi0) * 1j * q * t
    den = be * y + np.conj(al)
    z = (al * y + np.conj(be)) / den
    return z / np.abs(z), 1.0 / np.abs(den) ** 2


def _u_form(xi0, t, u, y):
    """z(u) and A(u) = q^2 |D F_P^q| with u = 1/q (u = 0 allowed)."""
    c = 1j * t * (np.conj(xi0) * y - 1.0)
    den = u + c
    z = (u * y + 1j * t * (y - xi0)) / den
    return z / np.abs(z), 1.0 / np.abs(den) ** 2


@dataclass
class TailOptions:
    """Knobs for the T = inf parabolic tails."""

    K_min: int = 32
    degree: int = 10
    K_max: int = 200000


def _cheb01(n):
    k = np.arange(n)
    return 0.5 * (1.0 - np.cos(np.pi * k / (n - 1)))


class _TailRule:
    """Weights w_i with sum_{q>=K} q^{-2s} psi(1/q) ~ sum_i w_i psi(v_i / K)."""

    def __init__(self, s: float, K: int, degree: int, log_part: bool = False):
        self.v = _cheb01(degree + 1)
        V = np.vander(self.v, degree + 1, increasing=True)
        Vinv = np.linalg.inv(V)
        j = np.arange(degree + 1)
        z = hurwitz_zeta(2 * s + j, K)
        self.w = (float(K) ** j * z) @ Vinv
        self.u = self.v / K
        self.w_log = None
        if log_part:
            # sum q^{-x} (-2 ln q) = 2 d/dx zeta(x, K)
            dz = np.array([float(mpmath.zeta(2 * s + jj, K, 1)) for jj in j])
            self.w_log = (float(K) ** j * 2.0 * dz) @ Vinv


@dataclass
class _Term:
    """Rows of one arc [a] receiving one cusp family (or the singletons)."""

    a: str
    family: object   # CuspFamily, or None for a singleton
    letter0: str     # first letter of the words (target arc)
    q_lo: int = 0
    q_hi: int | None = 0   # None means infinity


def _terms(g: GroupPresentation, mode: str, T: float | None):
    """Operator terms for mode 'L' (words with |W| <= T) or 'Delta' (|W| > T)."""
    out = []
    ranges = None
    if T is not None and np.isfinite(T):
        ranges = enumerate_alphabet(g, T).ranges
    for a in g.letters_by_order():
        if mode == "L":
            for b in g.letters_by_order():
                if a in domain_letters(g, b, SINGLETON):
                    out.append(_Term(a, None, b))
        for f in families(g):
            if a not in domain_letters(g, f.last, f.eps):
                continue
            if mode == "L":
                if ranges is None:
                    out.append(_Term(a, f, f.a0, f.q_min, None))
                else:
                    lo, hi = ranges[f.key]
                    if hi >= lo:
                        out.append(_Term(a, f, f.a0, lo, hi))
            else:
                lo, hi = ranges[f.key]
                out.append(_Term(a, f, f.a0, max(hi + 1, f.q_min), None))
    return out


@dataclass
class TransferMatrix:
    matrix: np.ndarray
    s: float
    T: float
    grid: ArcGrid = field(repr=False)
    kind: str = "L"
    info: dict = field(default_factory=dict)

    def apply(self, f) -> ArcFunction:
        v = f.values if isinstance(f, ArcFunction) else np.asarray(f)
        return ArcFunction(self.grid, self.matrix @ v)

    def dump(self, path):
        np.savez(
            path,
            matrix=self.matrix,
            s=self.s,
            T=self.T,
            kind=self.kind,
            nodes=self.grid.nodes,
            scheme=self.grid.scheme,
            m=self.grid.m,
            letters=np.array(self.grid.letters),
        )


def _tail_K(grid: ArcGrid, term: _Term, y, opts: TailOptions) -> int:
    """Tail start so that z(u), u <= 1/K, stays in the end cell (linear scheme)."""
    K = max(opts.K_min, term.q_lo)
    if grid.scheme != LINEAR:
        return K
    f = term.family
    xi0, t = f.parabolic
    ln = grid.g.length[f.a0]
    h = ln * min(grid.unit[1], 1.0 - grid.unit[-2])
    while K < opts.K_max:
        z, _ = _u_form(xi0, t, 1.0 / K, y)
        tau = grid.tau_of(f.a0, z)
        d = (ln - tau) if f.eps == RIGHT else tau
        if d.max() < 0.999 * h:
            return K
        K = int(K * 1.5) + 1
    raise RuntimeError("tail start exceeds K_max")


def assemble(
    g: GroupPresentation,
    s: float,
    T: float,
    grid: ArcGrid,
    kind: str = "L",
    tail: TailOptions | None = None,
    use_cache: bool = True,
) -> TransferMatrix:
    """Matrix of L_(s,T) (kind 'L'), A_T at s (kind 'A') or Delta_(s,T) (kind 'Delta').

    T = np.inf gives the full operator with analytic parabolic tails.
    """
    tail = tail or TailOptions()
    infinite = not np.isfinite(T)
    if kind == "Delta" and infinite:
        raise ValueError("Delta needs finite T")
    if (infinite or kind == "Delta") and s <= 0.5:
        raise ValueError("tail sums need s > 1/2")
    if not infinite and T <= 0:
        raise ValueError("T must be positive")
    mode = "Delta" if kind == "Delta" else "L"
    logw = kind == "A"
    if use_cache and not infinite and mode == "L" and grid.scheme == LINEAR:
        idx, base, lw = _finite_entries(g, T, grid)
        w = base * _weights(lw, s, logw)
        N = grid.size
        M = np.bincount(idx, weights=w, minlength=N * N).reshape(N, N)
        return TransferMatrix(M, s, T, grid, kind, {"cached": True})
    acc = _Acc(grid)
    info = {"K": {}, "tail_fit_error": 0.0}
    rules = {}
    for term in _terms(g, mode, None if infinite else T):
        rows = grid.block(term.a)
        xi = grid.nodes[rows]
        cols = grid.block(term.letter0)
        if term.family is None:
            F = g.disc[term.letter0]
            z = F.act_boundary(xi)
            lw = np.log(F.dmod(xi))
            acc.add(rows, cols, term.letter0, z[None, :], _weights(lw[None, :], s, logw))
            continue
        f = term.family
        xi0, t = f.parabolic
        y = f.F_V.act_boundary(xi)
        ldV = np.log(f.F_V.dmod(xi))
        if term.q_hi is None:
            K = _tail_K(grid, term, y, tail)
            q_end = K - 1
        else:
            q_end = term.q_hi
        # explicit part in chunks
        chunk = max(1, 400000 // max(1, xi.size))
        for q0 in range(term.q_lo, q_end + 1, chunk):
            qs = np.arange(q0, min(q_end, q0 + chunk - 1) + 1)[:, None].astype(float)
            z, D = _parabolic_power(xi0, t, qs, y[None, :])
            lw = np.log(D) + ldV[None, :]
            acc.add(rows, cols, f.a0, z, _weights(lw, s, logw))
        if term.q_hi is None:
            info["K"][(term.a,) + f.key] = K
            key = (K, logw)
            if key not in rules:
                rules[key] = _TailRule(s, K, tail.degree, log_part=logw)
            rule = rules[key]
            z, A = _u_form(xi0, t, rule.u[:, None], y[None, :])
            lA = np.log(A) + ldV[None, :]
            W = np.exp(s * lA)
            if logw:
                wts = rule.w[:, None] * lA * W + rule.w_log[:, None] * W
            else:
                wts = rule.w[:, None] * W
            acc.add(rows, cols, f.a0, z, wts)
            info["tail_fit_error"] = max(info["tail_fit_error"], _fit_check(rule, K, s, xi0, t, y, ldV))
    return TransferMatrix(acc.matrix(), s, T, grid, kind, info)


def _finite_entries(g: GroupPresentation, T: float, grid: ArcGrid):
    """(flat index, interpolation weight, log derivative) of all L_T entries."""
    cache = grid.__dict__.setdefault("_entries", {})
    if T in cache:
        return cache[T]
    acc = _Acc(grid, record=True)
    for term in _terms(g, "L", T):
        rows = grid.block(term.a)
        xi = grid.nodes[rows]
        cols = grid.block(term.letter0)
        if term.family is None:
            F = g.disc[term.letter0]
            acc.add(rows, cols, term.letter0, F.act_boundary(xi)[None, :], np.log(F.dmod(xi))[None, :])
            continue
        f = term.family
        xi0, t = f.parabolic
        y = f.F_V.act_boundary(xi)
        ldV = np.log(f.F_V.dmod(xi))
        qs = np.arange(term.q_lo, term.q_hi + 1)[:, None].astype(float)
        z, D = _parabolic_power(xi0, t, qs, y[None, :])
        acc.add(rows, cols, f.a0, z, np.log(D) + ldV[None, :])
    out = (np.concatenate(acc.idx), np.concatenate(acc.val), np.concatenate(acc.lw))
    cache[T] = out
    return out


def _weights(lw, s, logw):
    w = np.exp(s * lw)
    return lw * w if logw else w


class _Acc:
    """Collects weighted interpolation rows; linear entries are binned once."""

    def __init__(self, grid: ArcGrid, record: bool = False):
        self.grid = grid
        self.record = record
        self.lw = []
        N = grid.size
        self.L = np.zeros((N, N))
        self.idx = []
        self.val = []

    def add(self, rows: slice, cols: slice, letter: str, z, w):
        grid = self.grid
        tau = grid.tau_of(letter, z.ravel())
        R = z.shape[1]
        if grid.scheme == LINEAR:
            N = grid.size
            i, w0, w1 = grid._cell_weights(letter, tau / grid.g.length[letter])
            rr = np.broadcast_to(np.arange(rows.start, rows.stop)[None, :], z.shape).ravel()
            ww = np.broadcast_to(w, z.shape).ravel()
            base = rr * N + cols.start + i
            self.idx += [base, base + 1]
            if self.record:
                self.val += [w0, w1]
                self.lw += [ww, ww]
            else:
                self.val += [ww * w0, ww * w1]
        else:
            E = grid.interp_matrix(letter, tau).reshape(z.shape[0], R, grid.m)
            self.L[rows, cols] += np.einsum("qr,qrm->rm", np.broadcast_to(w, z.shape), E)

    def matrix(self) -> np.ndarray:
        if self.idx:
            N = self.grid.size
            flat = np.bincount(np.concatenate(self.idx), weights=np.concatenate(self.val), minlength=N * N)
            self.L += flat.reshape(N, N)
            self.idx, self.val = [], []
        return self.L


def _fit_check(rule, K, s, xi0, t, y, ldV):
    """Remainder-size estimate: polynomial fit error of the weight times zeta(2s, K)."""
    uu = np.linspace(0, 1.0 / K, 7)[1:-1:2]
    _, A = _u_form(xi0, t, rule.u[:, None], y[None, :])
    W = np.exp(s * (np.log(A) + ldV[None, :]))
    coef = np.linalg.solve(np.vander(rule.v, len(rule.v), increasing=True), W)
    _, A2 = _u_form(xi0, t, uu[:, None], y[None, :])
    W2 = np.exp(s * (np.log(A2) + ldV[None, :]))
    pred = np.vander(uu * K, len(rule.v), increasing=True) @ coef
    return float(np.abs(pred - W2).max() * hurwitz_zeta(2 * s, K))


def apply_A(g: GroupPresentation, T: float, f, s_T: float, grid: ArcGrid | None = None) -> ArcFunction:
    grid = grid or f.grid
    return assemble(g, s_T, T, grid, kind="A").apply(f)


def apply_Delta(g: GroupPresentation, s: float, T: float, f, grid: ArcGrid | None = None) -> ArcFunction:
    grid = grid or f.grid
    return assemble(g, s, T, grid, kind="Delta").apply(f)


# -- single words and blocks ---------------------------------------------------------


def word_operator(g: GroupPresentation, grid: ArcGrid, W, s: float) -> np.ndarray:
    """Matrix of f -> 1_domain(W) |D F_W|^s f o F_W."""
    acc = _Acc(grid)
    dom = domain_letters(g, W.last, W.eps)
    cols = grid.block(W.a0)
    for a in dom:
        rows = grid.block(a)
        xi = grid.nodes[rows]
        z = W.F.act_boundary(xi)
        lw = np.log(W.F.dmod(xi))
        acc.add(rows, cols, W.a0, z[None, :], _weights(lw[None, :], s, False))
    return acc.matrix()


# -- eigen solver --------------------------------------------------------------


@dataclass
class Eigendata:
    lam: float
    g: ArcFunction
    mu: np.ndarray          # node functional, total mass 1, with mu . g = 1
    residual: float
    iterations: int
    operator: TransferMatrix = field(repr=False, default=None)

    def integrate(self, values) -> float:
        v = values.values if isinstance(values, ArcFunction) else np.asarray(values)
        return float(self.mu @ v)


def _power(A, tol, max_iter, v0=None, strict=True, positive=True):
    n = A.shape[0]
    v = np.ones(n) if v0 is None else np.asarray(v0, dtype=float).copy()
    v /= np.abs(v).max()
    lam_old = 0.0
    for it in range(1, max_iter + 1):
        w = A @ v
        if positive and (np.any(w < 0) or (strict and np.any(w == 0))):
            raise EigenError("nonpositive iterate")
        lam = float(np.abs(w).max())
        w /= lam
        # residual of the current eigen-pair in sup norm
        res = float(np.abs(A @ w - lam * w).max())
        if abs(lam - lam_old) < tol * lam and res < tol * lam:
            return lam, w, it, res
        lam_old, v = lam, w
    raise EigenError(f"power iteration did not converge in {max_iter} steps")


def leading_eigen(
    Lmat: TransferMatrix, tol: float = 1e-12, max_iter: int = 20000, v0=None, positive: bool = True
) -> Eigendata:
    """Power iteration for the leading eigenpair and the left eigenvector.

    ``positive=False`` admits matrices with small negative entries (spectral
    collocation); iterates are then not checked for sign.
    """
    A = Lmat.matrix
    if positive and np.any(A < 0):
        raise EigenError("negative matrix entry")
    lam, v, it, res = _power(A, tol, max_iter, v0, positive=positive)
    lam_t, mu, _, _ = _power(A.T, tol, max_iter, strict=False, positive=positive)
    mu = mu / mu.sum()
    v = v / float(mu @ v)
    res = float(np.abs(A @ v - lam * v).max())
    return Eigendata(lam, ArcFunction(Lmat.grid, v), mu, res, it, Lmat)


def subdominant_modulus(eig: Eigendata, n_iter: int = 400, seed: int = 0) -> float:
    """Spectral radius of L restricted to ker(mu) by deflated power iteration."""
    A = eig.operator.matrix
    g, mu = eig.g.values, eig.mu
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[0])
    v -= g * (mu @ v)
    norms = []
    for _ in range(n_iter):
        w = A @ v
        w -= g * (mu @ w)
        nrm = np.abs(w).max()
        if nrm == 0:
            return 0.0
        norms.append(nrm / np.abs(v).max())
        v = w / nrm
    tail = np.log(norms[n_iter // 2 :])
    return float(np.exp(tail.mean()))


def normalized_operator_check(Lmat: TransferMatrix, lam: float, g) -> float:
    """max |sum_W N_W(x) - 1| with N_W = lam^{-1} |D F_W|^s g(F_W x)/g(x)."""
    v = g.values if isinstance(g, ArcFunction) else np.asarray(g)
    return float(np.abs(Lmat.matrix @ v / (lam * v) - 1.0).max())


def normalized_matrix(eig: Eigendata) -> np.ndarray:
    g = eig.g.values
    return eig.operator.matrix * g[None, :] / (eig.lam * g[:, None])


def gibbs_cylinder_measure(eig: Eigendata, block) -> float:
    """nu([W1..Wn]) for nu = g mu, via products of single-word operators."""
    g = eig.operator.grid.g
    grid = eig.operator.grid
    s = eig.operator.s
    for k in range(len(block) - 1):
        if block[k + 1].a0 not in domain_letters(g, block[k].last, block[k].eps):
            raise ValueError("inadmissible block")
    v = eig.g.values
    for W in block:
        v = word_operator(g, grid, W, s) @ v
    return float(eig.mu @ v) / eig.lam ** len(block)


def lasota_yorke_check(eig: Eigendata, k_max: int = 6, n_funcs: int = 20, seed: int = 0, theta: float | None = None):
    """Max over random cone functions of (Lip(L^k f) - theta^k Lip f)/|f|, k = 1..k_max."""
    Lh = normalized_matrix(eig)
    grid = eig.operator.grid
    rng = np.random.default_rng(seed)
    theta = contraction_theta(eig.operator.grid.g, eig.operator.T if np.isfinite(eig.operator.T) else 200.0) if theta is None else theta
    worst = np.zeros(k_max)
    for _ in range(n_funcs):
        f = np.exp(rng.uniform(-0.5, 0.5) * np.sin(rng.uniform(1, 6) * np.real(np.log(grid.nodes) / 1j) + rng.uniform(0, 6)))
        lf = ArcFunction(grid, f).lip()
        v = f
        for k in range(k_max):
            v = Lh @ v
            val = (ArcFunction(grid, v).lip() - theta ** (k + 1) * lf) / np.abs(f).max()
            worst[k] = max(worst[k], val)
    return worst, float(worst.max())


def contraction_theta(g: GroupPresentation, T: float, samples: int = 64) -> float:
    """max over W in W_T and sampled xi in domain(W) of |D_xi F_W|."""
    best = 0.0
    for W in enumerate_alphabet(g, T).words:
        for a in domain_letters(g, W.last, W.eps):
            tau = np.linspace(0.0, g.length[a], samples)
            best = max(best, float(W.F.dmod(g.point(a, tau)).max()))
    return best


def lip_decay_rate(eig: Eigendata, k_max: int = 8, n_funcs: int = 10, seed: int = 0) -> float:
    """Geometric decay rate of Lip(L^k f) for the normalized operator.

    Fitted as the slope of log Lip(L^k f) against k over the second half of
    k = 1..k_max, worst case over smooth random f.
    """
    Lh = normalized_matrix(eig)
    grid = eig.operator.grid
    rng = np.random.default_rng(seed)
    t = np.concatenate([grid.tau[x] + grid.g.t_left[x] for x in grid.letters])
    worst = 0.0
    for _ in range(n_funcs):
        f = np.sin(rng.uniform(1, 4) * t + rng.uniform(0, 6)) + 2.0
        logs = []
        v = f
        for _ in range(k_max):
            v = Lh @ v
            logs.append(np.log(max(ArcFunction(grid, v).lip(), 1e-300)))
        k = np.arange(1, k_max + 1)[k_max // 2 :]
        slope = np.polyfit(k, np.array(logs)[k_max // 2 :], 1)[0]
        worst = max(worst, float(np.exp(slope)))
    return worst


def lasota_yorke_rate(eig: Eigendata, k: int = 8) -> float:
    """Contraction factor of the derivative term in the Lasota-Yorke inequality.

    Differentiating the normalized operator gives the transport part
    f' -> sum_W N_W |D F_W| f' o F_W; this returns ||N1^k||_inf^(1/k) for its
    matrix N1 = L_(s+1) diag(g) / (lam g(x)).
    """
    op = eig.operator
    A1 = assemble(op.grid.g, op.s + 1.0, op.T, op.grid).matrix
    gv = eig.g.values
    N1 = A1 * gv[None, :] / (eig.lam * gv[:, None])
    P = np.linalg.matrix_power(N1, k)
    return float(np.abs(P).sum(axis=1).max() ** (1.0 / k))
