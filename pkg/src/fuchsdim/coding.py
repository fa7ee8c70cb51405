"""Boundary expansions, cuspidal words and the accelerated alphabet.

A typed cuspidal word is stored as (a0, eps, n) with letters a0..an.  Its
letters are forced: a_{k+1} is the letter with o(a_{k+1}) = o(hat a_k) - 1
for Right words and + 1 for Left words.  The forced letter sequence is
periodic, with period equal to the length p of the vertex cycle, so every
typed word belongs to a family (a0, eps, j) with n = j + q p and

    F_W = F_P^q o F_V,   V = (a0, ..., aj),   P = (a0, ..., a_{p-1}),

where F_P is the primitive parabolic fixing the vertex xi_W.  Powers of F_P
are taken from the closed parabolic form, never by repeated products.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import mpmath
import numpy as np

from .group_model import GroupPresentation, angle_t, vertex_at_infinity_chart
from .moebius import DiscMoebius, ExtendedPoint, RealMoebius

LEFT = "L"
RIGHT = "R"
SINGLETON = "S"
NOT_CUSPIDAL = "N"


class BacktrackError(ValueError):
    pass


class EndpointHit(ValueError):
    """Expansion landed on an arc endpoint (parabolic point)."""


def _xi(x) -> complex:
    return complex(x.value) if isinstance(x, ExtendedPoint) else complex(x)


# -- Bowen-Series map -----------------------------------------------------------


def locate(g: GroupPresentation, xi) -> str:
    return g.locate(_xi(xi))


def bowen_series_step(g: GroupPresentation, xi):
    a = locate(g, xi)
    return a, complex(g.disc[a].inverse().act_boundary(_xi(xi)))


def expand(g: GroupPresentation, xi, n: int, dps: int | None = None) -> tuple:
    """First n letters of the boundary expansion of xi.

    With ``dps`` the orbit is followed in the half-plane model at that many
    decimal digits (useful for long expansions; the map is expanding).
    """
    if n < 1:
        raise ValueError("n >= 1")
    if dps is not None:
        return _expand_mp(g, xi, n, dps)
    out = []
    z = _xi(xi)
    for _ in range(n):
        a, z = bowen_series_step(g, z)
        out.append(a)
    return tuple(out)


def _expand_mp(g, xi, n, dps):
    with mpmath.workdps(dps):
        if isinstance(xi, (mpmath.mpf, float, int)) and not isinstance(xi, complex):
            x = mpmath.mpf(xi)
        else:
            w = mpmath.mpc(_xi(xi))
            if abs(1 - w) < mpmath.mpf(10) ** (-dps + 2):
                raise EndpointHit("point is phi(inf)")
            x = mpmath.re(1j * (1 + w) / (1 - w))
        inv = {a: [mpmath.mpf(v) for v in (G.d, -G.b, -G.c, G.a)] for a, G in g.generators.items()}
        out = []
        for _ in range(n):
            w = (x - 1j) / (x + 1j)
            t = float(mpmath.fmod(-mpmath.arg(w) + 2 * mpmath.pi, 2 * mpmath.pi))
            a = g.locate(np.exp(-1j * t))
            out.append(a)
            p, q, r, s = inv[a]
            den = r * x + s
            if abs(den) < mpmath.mpf(10) ** (-dps + 5):
                raise EndpointHit("orbit reached a parabolic point")
            x = (p * x + q) / den
        return tuple(out)


def is_admissible(g: GroupPresentation, word) -> bool:
    return all(word[k + 1] != g.hat(word[k]) for k in range(len(word) - 1))


def word_element(g: GroupPresentation, word) -> DiscMoebius:
    F = DiscMoebius.identity()
    for x in word:
        F = F @ g.disc[x]
    return F


def real_word_element(g: GroupPresentation, word) -> RealMoebius:
    G = RealMoebius.identity()
    for x in word:
        G = G @ g.generators[x]
    return G


def cylinder(g: GroupPresentation, word):
    """Endpoints (left, right) of F_{a0..a(n-1)}[a_n]."""
    word = tuple(word)
    if not word:
        raise ValueError("empty word")
    if not is_admissible(g, word):
        raise BacktrackError(f"word {word} backtracks")
    F = word_element(g, word[:-1])
    last = word[-1]
    return complex(F.act_boundary(g.xi_L[last])), complex(F.act_boundary(g.xi_R[last]))


# -- cuspidal words -----------------------------------------------------------


def next_letter(g: GroupPresentation, x: str, eps: str) -> str:
    step = -1 if eps == RIGHT else +1
    return g.succ(g.hat(x), step)


def cuspidal_letters(g: GroupPresentation, a0: str, eps: str, n: int) -> tuple:
    out = [a0]
    if eps == SINGLETON:
        return tuple(out)
    for _ in range(n):
        out.append(next_letter(g, out[-1], eps))
    return tuple(out)


def classify_cuspidal(g: GroupPresentation, word) -> str:
    word = tuple(word)
    if not is_admissible(g, word):
        raise BacktrackError(f"word {word} backtracks")
    if len(word) == 1:
        return SINGLETON
    for eps in (RIGHT, LEFT):
        if all(word[k + 1] == next_letter(g, word[k], eps) for k in range(len(word) - 1)):
            return eps
    return NOT_CUSPIDAL


def cycle_letters(g: GroupPresentation, a0: str, eps: str) -> tuple:
    out = [a0]
    while True:
        nxt = next_letter(g, out[-1], eps)
        if nxt == a0:
            return tuple(out)
        out.append(nxt)


def _proj_boundary(xi: complex) -> np.ndarray:
    """Real projective vector of phi^{-1}(xi); (1, 0) direction is infinity."""
    th = np.angle(xi)
    return np.array([-np.cos(0.5 * th), np.sin(0.5 * th)])


@dataclass
class CuspFamily:
    """Typed cuspidal words (a0, eps, j + q p), q >= q_min."""

    g: GroupPresentation = field(repr=False)
    a0: str
    eps: str
    j: int
    period: tuple = field(repr=False)

    @property
    def p(self) -> int:
        return len(self.period)

    @property
    def q_min(self) -> int:
        return 1 if self.j == 0 else 0

    @property
    def last(self) -> str:
        return self.period[self.j]

    @property
    def key(self):
        return (self.a0, self.eps, self.j)

    def n(self, q):
        return self.j + np.asarray(q) * self.p

    @cached_property
    def vertex(self) -> complex:
        return self.g.xi_R[self.a0] if self.eps == RIGHT else self.g.xi_L[self.a0]

    @cached_property
    def F_V(self) -> DiscMoebius:
        return word_element(self.g, self.period[: self.j + 1])

    @cached_property
    def parabolic(self):
        """(xi0, t) of the cycle element F_P = +-parabolic(xi0, t)."""
        xi0, t = word_element(self.g, self.period).parabolic_parameter()
        return xi0, t

    @cached_property
    def chart(self) -> RealMoebius:
        return vertex_at_infinity_chart(self.g, self.vertex)

    @cached_property
    def _length_affine(self):
        g = self.g
        C = self.chart.matrix
        other0 = g.xi_L[self.a0] if self.eps == RIGHT else g.xi_R[self.a0]
        v0 = C @ _proj_boundary(other0)
        x0 = v0[0] / v0[1]
        GP = real_word_element(g, self.period).matrix
        D = C @ GP @ np.linalg.inv(C)
        shift = D[0, 1] / D[1, 1]
        head = real_word_element(g, self.period[: self.j]).matrix
        e = g.xi_L[self.last] if self.eps == RIGHT else g.xi_R[self.last]
        vn = C @ head @ _proj_boundary(e)
        xn = vn[0] / vn[1]
        return shift, xn - x0

    def length(self, q):
        """Geometric length of the word with index q (vectorized)."""
        shift, c = self._length_affine
        return np.abs(shift * np.asarray(q, dtype=float) + c)

    def q_range(self, T: float):
        """(q_lo, q_hi) with length <= T exactly on q_lo..q_hi; empty if q_hi < q_lo."""
        shift, c = self._length_affine
        if abs(shift) < 1e-12:
            raise ValueError("degenerate cusp translation")
        # |shift q + c| <= T  <=>  q in [(-T - c)/shift, (T - c)/shift] (sorted)
        lo, hi = sorted(((-T - c) / shift, (T - c) / shift))
        q_lo = max(self.q_min, int(np.ceil(lo - 1e-9)))
        q_hi = int(np.floor(hi + 1e-9))
        if q_lo > self.q_min and q_lo <= q_hi:
            raise RuntimeError(f"family {self.key}: short words excluded below long ones")
        return q_lo, q_hi

    def element(self, q) -> DiscMoebius:
        xi0, t = self.parabolic
        return (DiscMoebius.parabolic(xi0, q * t) @ self.F_V).normalized()

    def real_element(self, q) -> RealMoebius:
        """Half-plane element G_W, the power of G_P through the vertex chart."""
        C = self.chart
        Cinv = C.inverse()
        shift, _ = self._length_affine
        Tq = RealMoebius(1.0, shift * q, 0.0, 1.0)
        return (Cinv @ Tq @ C @ real_word_element(self.g, self.period[: self.j + 1])).normalized()

    def word(self, q: int) -> "CuspidalWord":
        return CuspidalWord(self.g, self.a0, self.eps, int(self.n(q)))


def families(g: GroupPresentation) -> list:
    if "families" not in g.cache:
        out = []
        for a0 in g.letters_by_order():
            for eps in (LEFT, RIGHT):
                per = cycle_letters(g, a0, eps)
                for j in range(len(per)):
                    out.append(CuspFamily(g, a0, eps, j, per))
        g.cache["families"] = out
    return g.cache["families"]


def family_of(g: GroupPresentation, a0: str, eps: str, n: int):
    """(family, q) for the typed word (a0, eps, n)."""
    for f in families(g):
        if f.a0 == a0 and f.eps == eps:
            p = f.p
            if n % p == f.j:
                return f, n // p
    raise KeyError((a0, eps, n))


@dataclass
class CuspidalWord:
    g: GroupPresentation = field(repr=False, compare=False)
    a0: str
    eps: str
    n: int

    def __post_init__(self):
        if self.eps == SINGLETON and self.n != 0:
            raise ValueError("singleton words have n = 0")
        if self.eps in (LEFT, RIGHT) and self.n < 1:
            raise ValueError("typed words have n >= 1")

    def __hash__(self):
        return hash((self.a0, self.eps, self.n))

    @property
    def key(self):
        return (self.a0, self.eps, self.n)

    @property
    def letters(self) -> tuple:
        return cuspidal_letters(self.g, self.a0, self.eps, self.n)

    @property
    def last(self) -> str:
        if self.eps == SINGLETON:
            return self.a0
        f, q = family_of(self.g, self.a0, self.eps, self.n)
        return f.last

    @cached_property
    def family(self):
        if self.eps == SINGLETON:
            return None, 0
        return family_of(self.g, self.a0, self.eps, self.n)

    @cached_property
    def F(self) -> DiscMoebius:
        if self.eps == SINGLETON:
            return self.g.disc[self.a0]
        f, q = self.family
        return f.element(q)

    @cached_property
    def G(self) -> RealMoebius:
        if self.eps == SINGLETON:
            return self.g.generators[self.a0]
        f, q = self.family
        return f.real_element(q)

    @property
    def xi(self):
        """Fixed vertex xi_W (None for singletons)."""
        if self.eps == SINGLETON:
            return None
        return self.family[0].vertex

    @cached_property
    def length(self) -> float:
        if self.eps == SINGLETON:
            return 0.0
        f, q = self.family
        return float(f.length(q))

    def __len__(self):
        return self.n + 1

    def __repr__(self):
        return f"CuspidalWord({self.a0},{self.eps},{self.n})"


def singleton(g: GroupPresentation, a: str) -> CuspidalWord:
    return CuspidalWord(g, a, SINGLETON, 0)


def cuspidal_word(g: GroupPresentation, a0: str, eps: str, n: int) -> CuspidalWord:
    """The typed cuspidal word with first letter a0 and last index n >= 1."""
    if eps not in (LEFT, RIGHT):
        raise ValueError("eps must be Left or Right")
    if n < 1:
        raise ValueError("n >= 1")
    return CuspidalWord(g, a0, eps, n)


def geometric_length(g: GroupPresentation, W: CuspidalWord) -> float:
    return W.length


def geometric_length_direct(g: GroupPresentation, W: CuspidalWord) -> float:
    """|W| from explicit products of all the letters (slow reference)."""
    if W.eps == SINGLETON:
        return 0.0
    letters = W.letters
    C = vertex_at_infinity_chart(g, W.xi).matrix
    other0 = g.xi_L[letters[0]] if W.eps == RIGHT else g.xi_R[letters[0]]
    v0 = C @ _proj_boundary(other0)
    last = letters[-1]
    e = g.xi_L[last] if W.eps == RIGHT else g.xi_R[last]
    vn = C @ real_word_element(g, letters[:-1]).matrix @ _proj_boundary(e)
    return float(abs(vn[0] / vn[1] - v0[0] / v0[1]))


# -- acceleration --------------------------------------------------------------


def domain(g: GroupPresentation, W: CuspidalWord) -> list:
    """Letters chi with [chi] inside domain(W), in cyclic order."""
    excluded = {SINGLETON: (0, 1, -1), LEFT: (0, 1), RIGHT: (0, -1)}[W.eps]
    ref = g.o(g.hat(W.last))
    n = g.n_letters
    bad = {(ref + e) % n for e in excluded}
    return [x for x in g.letters_by_order() if g.o(x) not in bad]


def domain_letters(g: GroupPresentation, last: str, eps: str) -> list:
    excluded = {SINGLETON: (0, 1, -1), LEFT: (0, 1), RIGHT: (0, -1)}[eps]
    ref = g.o(g.hat(last))
    n = g.n_letters
    bad = {(ref + e) % n for e in excluded}
    return [x for x in g.letters_by_order() if g.o(x) not in bad]


def domain_arc(g: GroupPresentation, W: CuspidalWord):
    """(t_start, length) of domain(W) as one arc in the t-parameter."""
    letters = domain(g, W)
    # letters form a cyclic interval; find its first element
    os_ = {g.o(x) for x in letters}
    first = next(x for x in letters if (g.o(x) - 1) % g.n_letters not in os_)
    length = sum(g.length[x] for x in letters)
    return g.t_left[first], length


def transition(g: GroupPresentation, W: CuspidalWord, Wp: CuspidalWord) -> int:
    """M_{W,W'}: 1 iff W * W' is admissible and W * (a0') is not cuspidal."""
    return int(Wp.a0 in domain(g, W))


def transition_literal(g: GroupPresentation, W: CuspidalWord, Wp: CuspidalWord) -> int:
    """The admissibility predicate evaluated on letters (reference for ``transition``)."""
    cand = W.letters + (Wp.a0,)
    if not is_admissible(g, cand):
        return 0
    return int(classify_cuspidal(g, cand) == NOT_CUSPIDAL)


def block_cylinder(g: GroupPresentation, words):
    """Endpoints of [W1..Wk]_E = F_{W1..Wk}(domain(Wk))."""
    F = DiscMoebius.identity()
    for W in words:
        F = F @ W.F
    t0, ln = domain_arc(g, words[-1])
    a = np.exp(-1j * t0)
    b = np.exp(-1j * (t0 + ln))
    return complex(F.act_boundary(a)), complex(F.act_boundary(b))


def arc_size(p: complex, q: complex) -> float:
    """Length of the positively oriented (increasing t) arc from p to q."""
    return float(np.mod(angle_t(q) - angle_t(p), 2 * np.pi))


def cuspidal_decompose(g: GroupPresentation, source, depth: int | None = None):
    """Maximal cuspidal decomposition of a letter word or of a point.

    Returns (words, truncated) where ``truncated`` flags that the last word
    reaches the end of the available letters and may continue.
    """
    if isinstance(source, (tuple, list)):
        letters = tuple(source)
    else:
        letters = expand(g, source, depth or 60)
    if not is_admissible(g, letters):
        raise BacktrackError("input word backtracks")
    out = []
    i = 0
    truncated = False
    N = len(letters)
    while i < N:
        a0 = letters[i]
        if i + 1 >= N:
            out.append(singleton(g, a0))
            truncated = True
            break
        eps = classify_cuspidal(g, letters[i : i + 2])
        if eps == NOT_CUSPIDAL:
            out.append(singleton(g, a0))
            i += 1
            continue
        k = i + 1
        while k + 1 < N and letters[k + 1] == next_letter(g, letters[k], eps):
            k += 1
        if k + 1 >= N:
            truncated = True
        out.append(CuspidalWord(g, a0, eps, k - i))
        i = k + 1
    return out, truncated


def concatenate(words) -> tuple:
    out = ()
    for W in words:
        out += W.letters
    return out


# -- alphabet W_T --------------------------------------------------------------


@dataclass
class CuspidalAlphabet:
    g: GroupPresentation = field(repr=False)
    T: float
    words: list
    ranges: dict          # family key -> (q_lo, q_hi)

    def by_letter(self, a: str) -> list:
        """W(a, T): words whose domain contains [a]."""
        return [W for W in self.words if a in domain(self.g, W)]

    def tails(self, a: str) -> list:
        """V(a, T) descriptors: (family, first q beyond T) with [a] in the domain."""
        out = []
        for f in families(self.g):
            if a in domain_letters(self.g, f.last, f.eps):
                lo, hi = self.ranges[f.key]
                out.append((f, max(hi + 1, f.q_min)))
        return out

    def __len__(self):
        return len(self.words)


def enumerate_alphabet(g: GroupPresentation, T: float) -> CuspidalAlphabet:
    if not T > 0:
        raise ValueError("T must be positive")
    words = [singleton(g, a) for a in g.letters_by_order()]
    ranges = {}
    for f in families(g):
        lo, hi = f.q_range(T)
        ranges[f.key] = (lo, hi)
        for q in range(lo, hi + 1):
            words.append(f.word(q))
        # post-check: the next word is longer than T
        if f.length(max(hi + 1, f.q_min)) <= T:
            raise RuntimeError(f"enumeration incomplete for family {f.key}")
    return CuspidalAlphabet(g, T, words, ranges)


@dataclass
class TransitionMatrix:
    words: list
    M: np.ndarray


def transition_matrix(g: GroupPresentation, words) -> TransitionMatrix:
    words = list(words)
    first = np.array([g.o(W.a0) for W in words])
    M = np.zeros((len(words), len(words)), dtype=np.int8)
    for i, W in enumerate(words):
        allowed = np.zeros(g.n_letters, dtype=bool)
        allowed[[g.o(x) for x in domain(g, W)]] = True
        M[i] = allowed[first]
    return TransitionMatrix(words, M)


def check_aperiodicity(M: TransitionMatrix):
    """(True, None) if M^2 > 0 entrywise, else (False, (W, W'')) with M^2 = 0."""
    A = M.M.astype(np.int64)
    M2 = A @ A
    bad = np.argwhere(M2 == 0)
    if len(bad) == 0:
        return True, None
    i, k = bad[0]
    return False, (M.words[i], M.words[k])


def aperiodicity_threshold(g: GroupPresentation, T_max: float = 50.0) -> float:
    """Smallest T (among word lengths) with M^2 > 0 on W_T, checked up to T_max."""
    lengths = sorted({0.0} | {float(W.length) for W in enumerate_alphabet(g, T_max).words})
    for T in lengths:
        Tq = max(T, 1e-9)
        ok, _ = check_aperiodicity(transition_matrix(g, enumerate_alphabet(g, Tq).words))
        if ok:
            return Tq
    raise RuntimeError("no aperiodic alphabet below T_max")


def periodic_point(g: GroupPresentation, words) -> complex:
    """Attracting fixed point of F_{W1} o ... o F_{Wk} (point with periodic expansion)."""
    F = DiscMoebius.identity()
    for W in words:
        F = F @ W.F
    m = F.matrix
    # fixed points of a hyperbolic disc map lie on the circle
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    disc = np.sqrt((a - d) ** 2 + 4 * b * c)
    cands = [((a - d) + disc) / (2 * c), ((a - d) - disc) / (2 * c)]
    cands = [z / abs(z) for z in cands]
    # attracting: derivative < 1
    return complex(min(cands, key=lambda z: F.dmod(z)))
