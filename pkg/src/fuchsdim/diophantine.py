"""Denominators, approximation inequalities and horoball packing in the half-plane."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import mpmath
import numpy as np

from .coding import (
    EndpointHit,
    cuspidal_decompose,
    enumerate_alphabet,
    expand,
    transition_matrix,
)
from .group_model import GroupPresentation, TWO_PI, angle_t
from .moebius import RealMoebius


class IncompleteEnumeration(RuntimeError):
    pass


# -- vertex charts -----------------------------------------------------------------


def _vertex_maps(g: GroupPresentation):
    """B A_k for every polygon vertex, in the cyclic order of the letters."""
    return [(v.B @ g.cusp_reps[v.k]).normalized() for v in g.vertices]


def denominator(M: RealMoebius) -> float:
    """D(M inf) = |c(M)| for M = G B A_k."""
    return abs(M.c)


def _point(M: RealMoebius) -> float:
    return np.inf if M.c == 0 else M.a / M.c


def _t_of_real(x: float) -> float:
    if not np.isfinite(x):
        return 0.0
    return float(angle_t((x - 1j) / (x + 1j)))


def _edge_constants(g: GroupPresentation):
    """|c((B1 A1)^-1 B2 A2)| for the two ends of each side; invariant under the group."""
    maps = _vertex_maps(g)
    letters = g.letters_by_order()
    out = {}
    for i, x in enumerate(letters):
        M1, M2 = maps[i], maps[(i + 1) % len(letters)]
        out[x] = abs((M1.inverse() @ M2).c)
    return out


# -- enumeration -----------------------------------------------------------------------


@dataclass
class ParabolicPoint:
    x: float
    D: float
    word: tuple
    vertex: int


@dataclass
class Enumeration:
    points: list
    Q: float
    window: tuple
    complete: bool
    tiles: int
    max_duplicate_gap: float = 0.0

    def xs(self) -> np.ndarray:
        return np.array([p.x for p in self.points])

    def Ds(self) -> np.ndarray:
        return np.array([p.D for p in self.points])


def _arc_hits_window(t1, t2, w_start, w_len):
    ln = (t2 - t1) % TWO_PI
    return (w_start - t1) % TWO_PI <= ln or (t1 - w_start) % TWO_PI <= w_len


def _dedup(raw, tol=1e-10):
    raw.sort(key=lambda p: p.x)
    out, gap = [], 0.0
    for p in raw:
        if out and abs(p.x - out[-1].x) < tol:
            gap = max(gap, abs(p.D - out[-1].D))
            if p.D < out[-1].D:
                out[-1] = p
        else:
            out.append(p)
    return out, gap


def packing_floor_estimate(g: GroupPresentation, depth: int = 3) -> float:
    """min |x - y| D D' over vertices of the tiles of reduced words of length <= depth."""
    raw = []
    for word, G in _reduced_words(g, depth):
        for i, M in enumerate(_vertex_maps(g)):
            GM = G @ M
            if abs(GM.c) > 1e-12:
                raw.append(ParabolicPoint(_point(GM), denominator(GM), word, i))
    pts, _ = _dedup(raw)
    return horoball_separation_check(pts)


def enumerate_parabolic_points(
    g: GroupPresentation,
    Q: float,
    window=(-2.0, 2.0),
    depth_cap: int | None = None,
    prune_factor: float = 1.25,
    max_tiles: int = 2_000_000,
    floor: float | None = None,
    strict: bool = False,
) -> Enumeration:
    """Parabolic points x in the window with 0 < D(x) <= Q, by a pruned tile search.

    Beyond a side with end denominators D1, D2 and invariant kappa every
    parabolic point has D >= c0 max(D1, D2) / kappa, c0 the horoball packing
    floor; the subtree is skipped once this exceeds prune_factor * Q.
    """
    if Q <= 0:
        raise ValueError("Q must be positive")
    lo, hi = window
    w_start = _t_of_real(hi)
    w_len = (_t_of_real(lo) - w_start) % TWO_PI
    c0 = packing_floor_estimate(g) if floor is None else floor
    kappa = _edge_constants(g)
    maps = _vertex_maps(g)
    letters = g.letters_by_order()
    n = len(letters)
    raw = []
    tiles = 0
    complete = True
    queue = deque([((), RealMoebius.identity())])
    while queue:
        word, G = queue.popleft()
        tiles += 1
        vm = [G @ M for M in maps]
        for i, M in enumerate(vm):
            D = denominator(M)
            if D > 1e-12 and D <= Q * (1 + 1e-12):
                x = _point(M)
                if lo <= x <= hi:
                    raw.append(ParabolicPoint(x, D, word, i))
        if depth_cap is not None and len(word) >= depth_cap:
            complete = False
            continue
        last = word[-1] if word else None
        for j, y in enumerate(letters):
            if last is not None and y == g.hat(last):
                continue
            M1, M2 = vm[j], vm[(j + 1) % n]
            x1, x2 = _point(M1), _point(M2)
            t1, t2 = _t_of_real(x1), _t_of_real(x2)
            if not _arc_hits_window(t1, t2, w_start, w_len):
                continue
            D1, D2 = denominator(M1), denominator(M2)
            contains_inf = (0.0 - t1) % TWO_PI < (t2 - t1) % TWO_PI
            if D1 > 1e-12 and D2 > 1e-12 and not contains_inf:
                if c0 * max(D1, D2) / kappa[y] > prune_factor * Q:
                    continue
            queue.append((word + (y,), (G @ g.generators[y]).normalized()))
        if tiles > max_tiles:
            complete = False
            break
    pts, gap = _dedup(raw)
    if strict and not complete:
        raise IncompleteEnumeration("search stopped with a nonempty frontier")
    return Enumeration(pts, Q, (lo, hi), complete, tiles, gap)


def _reduced_words(g: GroupPresentation, depth: int):
    out = [((), RealMoebius.identity())]
    frontier = list(out)
    for _ in range(depth):
        nxt = []
        for word, G in frontier:
            for y in g.letters:
                if word and y == g.hat(word[-1]):
                    continue
                nxt.append((word + (y,), (G @ g.generators[y]).normalized()))
        out.extend(nxt)
        frontier = nxt
    return out


def brute_force_points(g: GroupPresentation, Q: float, window=(-2.0, 2.0), depth: int = 8) -> list:
    """All tile vertices of reduced words up to the depth with D <= Q in the window."""
    lo, hi = window
    raw = []
    maps = _vertex_maps(g)
    for word, G in _reduced_words(g, depth):
        for i, M in enumerate(maps):
            GM = G @ M
            D = denominator(GM)
            if 1e-12 < D <= Q * (1 + 1e-12):
                x = _point(GM)
                if lo <= x <= hi:
                    raw.append(ParabolicPoint(x, D, word, i))
    return _dedup(raw)[0]


# -- horoballs ---------------------------------------------------------------------------


def horoball_separation_check(points) -> float:
    """Worst |x - y| D D' over pairs of distinct points (the empirical packing floor)."""
    xs = np.array([p.x for p in points])
    Ds = np.array([p.D for p in points])
    if xs.size < 2:
        return np.inf
    order = np.argsort(xs)
    xs, Ds = xs[order], Ds[order]
    worst = np.inf
    for i in range(xs.size - 1):
        r = (xs[i + 1 :] - xs[i]) * Ds[i + 1 :] * Ds[i]
        worst = min(worst, float(r.min()))
    return worst


# -- approximation checks -----------------------------------------------------------------


@dataclass
class Approximation:
    x: float
    D: float
    distance: float
    M: float          # D Q |alpha - x|


def patterson_check(g: GroupPresentation, alpha: float, Q: float, width: float = 2.0) -> Approximation:
    """Best approximant with D <= Q in the sense of min D Q |alpha - x|."""
    w = max(width / Q, 1e-9)
    en = enumerate_parabolic_points(g, Q, (alpha - w, alpha + w))
    if not en.complete:
        raise IncompleteEnumeration("enumeration incomplete")
    if not en.points:
        raise IncompleteEnumeration("no parabolic point in the window; widen it")
    xs, Ds = en.xs(), en.Ds()
    score = Ds * Q * np.abs(alpha - xs)
    i = int(np.argmin(score))
    return Approximation(float(xs[i]), float(Ds[i]), float(abs(alpha - xs[i])), float(score[i]))


def near_points(g: GroupPresentation, alpha: float, eps: float, Q: float, d_min: float | None = None) -> list:
    """Parabolic points with D <= Q and |alpha - x| < eps / D^2.

    Searched in dyadic shells of D so that each window has width eps / D_lo^2.
    """
    d_min = d_min if d_min is not None else min_denominator(g)
    out = []
    hi = Q
    while hi >= d_min * (1 - 1e-12):
        lo = max(hi / 2.0, d_min)
        w = eps / lo**2
        en = enumerate_parabolic_points(g, hi, (alpha - w, alpha + w))
        if not en.complete:
            raise IncompleteEnumeration("enumeration incomplete")
        out += [p for p in en.points if p.D > lo * (1 - 1e-12) or lo <= d_min]
        if lo <= d_min:
            break
        hi = lo
    out, _ = _dedup(out)
    return [p for p in out if abs(alpha - p.x) < eps / p.D**2]


def bad_test(g: GroupPresentation, alpha: float, eps: float, Q: float, d_min: float | None = None) -> bool:
    """True iff no parabolic point with D <= Q has |alpha - x| < eps / D^2."""
    return not near_points(g, alpha, eps, Q, d_min)


def min_denominator(g: GroupPresentation, depth: int = 4) -> float:
    """Smallest nonzero denominator among tile vertices near the polygon."""
    best = np.inf
    maps = _vertex_maps(g)
    for _, G in _reduced_words(g, depth):
        for M in maps:
            D = denominator(G @ M)
            if D > 1e-12:
                best = min(best, D)
    return best


@dataclass
class ExpansionVerdict:
    r: int
    length: float
    D: float
    x: float
    value: float          # D^2 |alpha - G zeta|
    lower: float
    upper: float
    ok: bool


def _mp_matrix(M: RealMoebius):
    return mpmath.matrix([[M.a, M.b], [M.c, M.d]])


def expansion_approximation_check(
    g: GroupPresentation,
    alpha,
    R: int = 15,
    dps: int = 60,
    slack: float = 1e-9,
    corrupt: float = 1.0,
) -> list:
    """Two-sided bound 1/(|W_r| + 2 mu) <= D^2 |alpha - G zeta_r| <= 1/|W_r| for r <= R.

    ``corrupt`` multiplies every denominator (used to check that the test bites).
    An approximant at infinity (D = 0, only for r = 0 when a vertex sits at
    phi(inf)) carries no information and is skipped.
    """
    if R > 30:
        raise ValueError("depth R must be at most 30")
    mu = g.mu_max
    with mpmath.workdps(dps):
        a = mpmath.mpf(alpha)
        n_letters = 8 * (R + 2)
        while True:
            letters = expand(g, a, n_letters, dps=dps)
            words, truncated = cuspidal_decompose(g, letters)
            complete = len(words) - (1 if truncated else 0)
            if complete > R:
                break
            n_letters *= 2
            if n_letters > 20000:
                raise EndpointHit("expansion does not produce enough cuspidal words")
        gens = {x: _mp_matrix(G) for x, G in g.generators.items()}
        G = mpmath.eye(2)
        out = []
        for r in range(R + 1):
            W = words[r]
            if W.n > 0:
                v = g.vertex_data(W.xi)
                M = G * _mp_matrix(v.B @ g.cusp_reps[v.k])
                if M[1, 0] != 0:
                    D = abs(M[1, 0]) * corrupt
                    zeta = M[0, 0] / M[1, 0]
                    value = float(D**2 * abs(a - zeta))
                    L = float(W.length)
                    lower, upper = 1.0 / (L + 2 * mu), 1.0 / L
                    ok = lower - slack <= value <= upper + slack
                    out.append(ExpansionVerdict(r, L, float(D), float(zeta), value, lower, upper, ok))
            for x in W.letters:
                G = G * gens[x]
        return out


# -- bounded-type samples -----------------------------------------------------------------


def loop_point(g: GroupPresentation, words, dps: int = 60):
    """Attracting fixed point, as an mp real, of the element of a periodic word loop."""
    letters = [x for W in words for x in W.letters]
    with mpmath.workdps(dps):
        M = mpmath.eye(2)
        for x in letters:
            M = M * _mp_matrix(g.generators[x])
        a, b, c, d = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
        disc = mpmath.sqrt((d - a) ** 2 + 4 * b * c)
        roots = [(a - d + disc) / (2 * c), (a - d - disc) / (2 * c)]
        return max(roots, key=lambda x: abs(c * x + d))


def random_loop(g: GroupPresentation, T: float, rng, max_len: int = 12):
    """Random cyclically admissible sequence of cuspidal words with |W| <= T."""
    alph = enumerate_alphabet(g, T)
    tm = transition_matrix(g, alph.words)
    M = tm.M
    W = alph.words
    for _ in range(1000):
        i0 = int(rng.integers(len(W)))
        path = [i0]
        for _ in range(max_len):
            nxt = np.nonzero(M[path[-1]])[0]
            j = int(rng.choice(nxt))
            path.append(j)
            if len(path) >= 3 and M[path[-1], i0]:
                return [W[k] for k in path]
    raise RuntimeError("no loop found")


def estimate_epsilon0(g: GroupPresentation, alphas, Q: float, R: int = 12, eps_max: float = 1.0) -> float:
    """Smallest D^2 |alpha - x| over points with D <= Q that are not expansion approximants.

    Below this value only expansion approximants can violate the bad condition.
    """
    best = eps_max
    for alpha in alphas:
        verdicts = expansion_approximation_check(g, alpha, R=R)
        conv = np.array([v.x for v in verdicts])
        a = float(alpha)
        for p in near_points(g, a, eps_max, Q):
            if conv.size and np.min(np.abs(conv - p.x)) < 1e-9 * max(1.0, abs(p.x)):
                continue
            best = min(best, p.D**2 * abs(a - p.x))
    return best


def random_alpha(rng, lo: float = -2.0, hi: float = 2.0, dps: int = 60):
    """Uniform mp real in [lo, hi] with dps random digits (floats are rationals)."""
    with mpmath.workdps(dps):
        digits = "".join(str(int(c)) for c in rng.integers(0, 10, size=dps))
        u = mpmath.mpf("0." + digits)
        return mpmath.mpf(lo) + (mpmath.mpf(hi) - mpmath.mpf(lo)) * u
