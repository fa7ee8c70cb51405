"""Labelled ideal polygons: alphabet, side pairings, arcs, cusp data.

Boundary points are parametrized by t -> exp(-i t).  The arc [a] is the right
open arc cut off by the side s_a, i.e. the part of the circle inside the
isometric circle of F_{hat a}; its left endpoint xi_L(a) belongs to it, its
right endpoint xi_R(a) does not.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .moebius import (
    INF,
    DiscMoebius,
    ExtendedPoint,
    HALF_PLANE,
    RealMoebius,
    phi,
    phi_inv,
    to_disc,
)

TWO_PI = 2.0 * np.pi
GUARD = 1e-12


class GroupSpecError(ValueError):
    pass


class UnknownVertexError(ValueError):
    pass


def angle_t(xi):
    """Parameter t in [0, 2 pi) with xi = exp(-i t)."""
    return np.mod(-np.angle(xi), TWO_PI)


@dataclass
class Alphabet:
    letters: tuple
    hat: dict
    order: dict

    @property
    def size(self) -> int:
        return len(self.letters)

    @property
    def d(self) -> int:
        return len(self.letters) // 2

    def by_order(self, k: int) -> str:
        k %= self.size
        for x, o in self.order.items():
            if o == k:
                return x
        raise KeyError(k)

    def check(self):
        """List of (name, ok, detail) for the alphabet invariants."""
        out = []
        L = set(self.letters)
        inv = all(self.hat.get(self.hat.get(x)) == x for x in L)
        fixed = any(self.hat.get(x) == x for x in L)
        closed = all(self.hat.get(x) in L for x in L)
        out.append(("hat is a fixed-point-free involution", inv and closed and not fixed and len(L) % 2 == 0, ""))
        orders = sorted(self.order.get(x, -1) for x in L)
        out.append(("cyclic order is a bijection", orders == list(range(len(L))), str(orders)))
        return out


@dataclass
class VertexData:
    xi: complex           # vertex on the unit circle
    letter: str           # vertex = xi_L(letter)
    cls: int              # vertex cycle (cusp class) index
    k: int                # cusp representative index for this class
    B: RealMoebius        # vertex = phi(B A_k inf)


@dataclass
class GroupPresentation:
    name: str
    alphabet: Alphabet
    generators: dict
    cusp_reps: tuple
    disc: dict = field(default_factory=dict)
    t_left: dict = field(default_factory=dict)
    length: dict = field(default_factory=dict)
    xi_L: dict = field(default_factory=dict)
    xi_R: dict = field(default_factory=dict)
    vertices: list = field(default_factory=list)
    mu: tuple = ()
    build_notes: list = field(default_factory=list)
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- basic accessors -------------------------------------------------
    @property
    def letters(self):
        return self.alphabet.letters

    def hat(self, x: str) -> str:
        return self.alphabet.hat[x]

    def o(self, x: str) -> int:
        return self.alphabet.order[x]

    def succ(self, x: str, step: int = 1) -> str:
        return self.alphabet.by_order(self.alphabet.order[x] + step)

    @property
    def n_letters(self) -> int:
        return self.alphabet.size

    @property
    def mu_max(self) -> float:
        return max(self.mu) if self.mu else float("nan")

    @property
    def n_cusps(self) -> int:
        return len({v.cls for v in self.vertices})

    def letters_by_order(self):
        return sorted(self.letters, key=self.o)

    # -- arcs ------------------------------------------------------------
    def local_coordinate(self, letter: str, xi):
        """Offset tau in [0, length) of xi from the left endpoint of [letter].

        Points slightly before the left endpoint (rounding) are mapped to 0.
        """
        tau = np.mod(angle_t(xi) - self.t_left[letter], TWO_PI)
        return np.where(tau > TWO_PI - 1e-9, 0.0, tau)

    def point(self, letter: str, tau):
        return np.exp(-1j * (self.t_left[letter] + np.asarray(tau, dtype=float)))

    def locate_many(self, xi) -> np.ndarray:
        """Index (into letters_by_order()) of the arc containing each point."""
        letters = self.letters_by_order()
        starts = np.array([self.t_left[x] for x in letters])
        t = angle_t(np.asarray(xi, dtype=complex))
        # shift so that the first arc starts at 0
        rel = np.mod(t - starts[0] + GUARD, TWO_PI)
        rel_starts = np.mod(starts - starts[0], TWO_PI)
        idx = np.searchsorted(rel_starts, rel, side="right") - 1
        return idx

    def locate(self, xi) -> str:
        return self.letters_by_order()[int(self.locate_many(np.array([xi]))[0])]

    def midpoint(self, letter: str) -> complex:
        return complex(self.point(letter, 0.5 * self.length[letter]))

    def in_arc(self, letter: str, xi) -> np.ndarray:
        tau = np.mod(angle_t(xi) - self.t_left[letter] + GUARD, TWO_PI)
        return tau < self.length[letter]

    # -- vertices --------------------------------------------------------
    def vertex_data(self, xi: complex, tol: float = 1e-8) -> VertexData:
        for v in self.vertices:
            if abs(v.xi - xi) < tol:
                return v
        raise UnknownVertexError(f"{xi} is not a vertex of the polygon")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "letters": [
                {
                    "label": x,
                    "hat": self.hat(x),
                    "matrix": [self.generators[x].a, self.generators[x].b, self.generators[x].c, self.generators[x].d],
                }
                for x in self.letters
            ],
            "cusp_representatives": [[A.a, A.b, A.c, A.d] for A in self.cusp_reps],
        }


def _arc_from_circle(F: DiscMoebius):
    """(t_left, length) of U_F intersected with the unit circle."""
    om = F.pole
    c = 1.0 / abs(om)
    half = float(np.arccos(min(1.0, c)))
    theta0 = float(np.angle(om))
    t1 = float(np.mod(-(theta0 + half), TWO_PI))
    if t1 > TWO_PI - GUARD:
        t1 = 0.0
    return t1, 2.0 * half


def build_presentation(name, letters, hat, matrices, cusp_reps) -> GroupPresentation:
    """Build the polygon data from the side pairing generators.

    ``matrices[x]`` is F_x with F_x(s_{hat x}) = s_x.  Arcs are computed from
    the isometric circles, the cyclic order from shared endpoints.
    """
    letters = tuple(letters)
    gens = {x: RealMoebius.from_matrix(np.asarray(matrices[x], dtype=float).reshape(2, 2)) for x in letters}
    disc = {x: to_disc(gens[x]) for x in letters}
    t_left, length, xi_L, xi_R = {}, {}, {}, {}
    notes = []
    for x in letters:
        y = hat[x]
        try:
            tl, ln = _arc_from_circle(disc[y])
        except Exception as exc:  # rotation, no isometric circle
            notes.append(f"arc of {x}: {exc}")
            tl, ln = 0.0, 0.0
        t_left[x], length[x] = tl, ln
        xi_L[x] = complex(np.exp(-1j * tl))
        xi_R[x] = complex(np.exp(-1j * (tl + ln)))
    # cyclic order by position of the left endpoints
    ordered = sorted(letters, key=lambda x: (t_left[x] - t_left[letters[0]]) % TWO_PI)
    order = {x: i for i, x in enumerate(ordered)}
    alphabet = Alphabet(letters, dict(hat), order)
    g = GroupPresentation(
        name=name,
        alphabet=alphabet,
        generators=gens,
        cusp_reps=tuple(RealMoebius.from_matrix(np.asarray(A, dtype=float).reshape(2, 2)) for A in cusp_reps),
        disc=disc,
        t_left=t_left,
        length=length,
        xi_L=xi_L,
        xi_R=xi_R,
        build_notes=notes,
    )
    try:
        _attach_vertices(g)
    except Exception as exc:
        g.build_notes.append(f"vertex data: {exc}")
    return g


def _vertex_classes(g: GroupPresentation):
    """Union-find over vertices xi_L(x) using F_a(xi_R(hat a)) = xi_L(a)."""
    parent = {x: x for x in g.letters}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = []
    for a in g.letters:
        ah = g.hat(a)
        # vertex xi_R(ah) = xi_L(succ(ah)) is sent to xi_L(a)
        edges.append((g.succ(ah), a, a))
        # vertex xi_L(ah) is sent to xi_R(a) = xi_L(succ(a))
        edges.append((ah, g.succ(a), a))
    for u, v, _ in edges:
        parent[find(u)] = find(v)
    roots = {}
    cls = {}
    for x in g.letters_by_order():
        r = find(x)
        roots.setdefault(r, len(roots))
        cls[x] = roots[r]
    return cls, edges


def _attach_vertices(g: GroupPresentation):
    cls, edges = _vertex_classes(g)
    n_cls = len(set(cls.values()))
    # match each class with a cusp representative
    rep_vertex = {}
    for k, A in enumerate(g.cusp_reps):
        z = A.a / A.c if A.c != 0 else INF
        w = phi(z) if z is not INF else 1.0 + 0j
        hit = [x for x in g.letters if abs(g.xi_L[x] - complex(w)) < 1e-8]
        if not hit:
            raise GroupSpecError(f"cusp representative {k} does not point at a polygon vertex")
        c = cls[hit[0]]
        if c in rep_vertex:
            raise GroupSpecError(f"two cusp representatives for vertex class {c}")
        rep_vertex[c] = (hit[0], k)
    if len(rep_vertex) != n_cls:
        raise GroupSpecError(f"{n_cls} vertex classes but {len(g.cusp_reps)} cusp representatives")
    # propagate B along the pairings
    B = {}
    kk = {}
    queue = []
    for c, (x, k) in rep_vertex.items():
        B[x] = RealMoebius.identity()
        kk[x] = k
        queue.append(x)
    while queue:
        u = queue.pop(0)
        for src, dst, a in edges:
            Fa = g.generators[a]
            if src == u and dst not in B:
                B[dst] = (Fa @ B[u]).normalized()
                kk[dst] = kk[u]
                queue.append(dst)
            if dst == u and src not in B:
                B[src] = (Fa.inverse() @ B[u]).normalized()
                kk[src] = kk[u]
                queue.append(src)
    g.vertices = [VertexData(g.xi_L[x], x, cls[x], kk[x], B[x]) for x in g.letters_by_order()]
    mus = [0.0] * len(g.cusp_reps)
    for c, (x, k) in rep_vertex.items():
        mus[k] = _cusp_translation(g, x, k)
    g.mu = tuple(mus)


def _cusp_translation(g: GroupPresentation, x: str, k: int) -> float:
    """Translation length of the primitive parabolic at vertex xi_L(x) in the A_k chart."""
    # left cuspidal cycle starting at x fixes xi_L(x)
    letters = [x]
    while True:
        nxt = g.succ(g.hat(letters[-1]), +1)
        if nxt == x:
            break
        letters.append(nxt)
        if len(letters) > 4 * g.n_letters:
            raise GroupSpecError("vertex cycle does not close")
    G = RealMoebius.identity()
    for y in letters:
        G = G @ g.generators[y]
    A = g.cusp_reps[k]
    P = (A.inverse() @ G @ A).normalized()
    if abs(P.c) > 1e-7 or abs(abs(P.a) - 1) > 1e-7:
        raise GroupSpecError("vertex cycle is not parabolic in the cusp chart")
    return abs(P.b / P.d)


# -- validation ---------------------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    slack: float = 0.0
    detail: str = ""


@dataclass
class ValidationReport:
    group: str
    checks: list

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c for c in self.checks if not c.passed]

    def as_rows(self):
        return [(c.name, "pass" if c.passed else "FAIL", c.slack, c.detail) for c in self.checks]


def validate(g: GroupPresentation, tol: float = 1e-9) -> ValidationReport:
    checks = []
    for name, ok, detail in g.alphabet.check():
        checks.append(Check(name, ok, 0.0, detail))
    if not all(c.passed for c in checks):
        return ValidationReport(g.name, checks)

    worst = max(abs(G.det - 1.0) for G in g.generators.values())
    checks.append(Check("unimodular generators", worst < tol, worst))

    worst = 0.0
    for a in g.letters:
        P = g.generators[a] @ g.generators[g.hat(a)]
        worst = max(worst, min(np.abs(P.matrix - np.eye(2)).max(), np.abs(P.matrix + np.eye(2)).max()))
    checks.append(Check("F_hat(a) = F_a^-1", worst < tol, worst))

    worst = 0.0
    for a in g.letters:
        F = g.disc[a]
        ah = g.hat(a)
        e1 = abs(complex(F.act_boundary(g.xi_R[ah])) - g.xi_L[a])
        e2 = abs(complex(F.act_boundary(g.xi_L[ah])) - g.xi_R[a])
        worst = max(worst, e1, e2)
    checks.append(Check("pairing F_a(s_hat a) = s_a at endpoints", worst < 1e-10, worst))

    worst = 0.0
    for a in g.letters:
        try:
            om = g.disc[g.hat(a)].pole
            r = 1.0 / abs(g.disc[g.hat(a)].beta)
            worst = max(worst, abs(abs(g.xi_L[a] - om) - r), abs(abs(g.xi_R[a] - om) - r))
        except Exception:
            worst = np.inf
    checks.append(Check("arc endpoints on isometric circle of F_hat(a)", worst < tol, worst))

    total = sum(g.length.values())
    worst_join = 0.0
    for a in g.letters:
        worst_join = max(worst_join, abs(g.xi_R[a] - g.xi_L[g.succ(a)]))
    gap = abs(total - TWO_PI)
    checks.append(Check("arcs partition the circle", worst_join < tol and gap < tol, max(worst_join, gap)))

    # no isometric circle interior contains another generator's circle
    nested = 0.0
    for a in g.letters:
        for b in g.letters:
            if a == b:
                continue
            ca, ra = g.disc[a].pole, 1.0 / abs(g.disc[a].beta)
            cb, rb = g.disc[b].pole, 1.0 / abs(g.disc[b].beta)
            # circle b inside disc a iff |ca - cb| + rb < ra
            nested = max(nested, ra - (abs(ca - cb) + rb))
    checks.append(Check("no isometric circle inside another", nested < tol, nested))

    # F_a maps the complement of [hat a] into [a]
    worst = 0.0
    bad = 0
    for a in g.letters:
        ah = g.hat(a)
        taus = np.linspace(0.0, TWO_PI - g.length[ah], 22)[1:-1]
        pts = np.exp(-1j * (g.t_left[ah] + g.length[ah] + taus))
        img = g.disc[a].act_boundary(pts)
        bad += int(np.count_nonzero(~g.in_arc(a, img)))
    checks.append(Check("F_a maps complement of [hat a] onto [a]", bad == 0, float(bad)))

    ok_vertices = len(g.vertices) == g.n_letters and not any("vertex" in n for n in g.build_notes)
    checks.append(Check("cusp representatives match vertex classes", ok_vertices, 0.0, "; ".join(g.build_notes)))
    if ok_vertices:
        worst = 0.0
        for v in g.vertices:
            A = g.cusp_reps[v.k]
            M = v.B @ A
            z = INF if abs(M.c) < 1e-14 else M.a / M.c
            w = 1.0 + 0j if z is INF else complex(phi(z))
            worst = max(worst, abs(w - v.xi))
        checks.append(Check("vertex = phi(B A_k inf)", worst < 1e-8, worst))
    return ValidationReport(g.name, checks)


# -- charts --------------------------------------------------------------------


def vertex_at_infinity_chart(g: GroupPresentation, vertex) -> RealMoebius:
    """(B A_k)^{-1}: half-plane chart sending the vertex to infinity."""
    xi = vertex.value if isinstance(vertex, ExtendedPoint) else vertex
    if isinstance(vertex, ExtendedPoint) and vertex.model == HALF_PLANE:
        xi = 1.0 + 0j if vertex.is_infinity else complex(phi(vertex.value))
    v = g.vertex_data(complex(xi))
    return (v.B @ g.cusp_reps[v.k]).inverse().normalized()


def chart_real_part(g: GroupPresentation, vertex: complex, xi) -> np.ndarray:
    """Real part, in the vertex chart, of boundary points xi != vertex."""
    C = vertex_at_infinity_chart(g, vertex)
    z = phi_inv(np.atleast_1d(np.asarray(xi, dtype=complex)))
    w = (C.a * z + C.b) / (C.c * z + C.d)
    return np.real(w)


# -- built-in groups -----------------------------------------------------------

_R2 = np.sqrt(2.0)

_BUILTINS = {
    # Gamma(2): z -> z + 2 and z -> z/(2z + 1); polygon with vertices -1, 0, 1, inf
    "gamma2": dict(
        letters=("a", "b", "A", "B"),
        hat={"a": "A", "A": "a", "b": "B", "B": "b"},
        matrices={
            "a": [[1, 2], [0, 1]],
            "A": [[1, -2], [0, 1]],
            "b": [[1, 0], [2, 1]],
            "B": [[1, 0], [-2, 1]],
        },
        # cusps inf, 0, 1
        cusp_reps=([[1, 0], [0, 1]], [[0, -1], [1, 0]], [[1, 0], [1, 1]]),
    ),
    # once punctured square torus: opposite sides of the ideal quadrilateral
    # with vertices -1, 0, 1, inf glued without shear
    "punctured_torus": dict(
        letters=("a", "b", "A", "B"),
        hat={"a": "A", "A": "a", "b": "B", "B": "b"},
        matrices={
            "a": [[1 / _R2, 1 / _R2], [1 / _R2, 3 / _R2]],
            "A": [[3 / _R2, -1 / _R2], [-1 / _R2, 1 / _R2]],
            "b": [[1 / _R2, -1 / _R2], [-1 / _R2, 3 / _R2]],
            "B": [[3 / _R2, 1 / _R2], [1 / _R2, 1 / _R2]],
        },
        cusp_reps=([[1, 0], [0, 1]],),
    ),
}


def builtin(name: str) -> GroupPresentation:
    if name not in _BUILTINS:
        raise KeyError(f"unknown built-in group {name!r}; choose from {sorted(_BUILTINS)}")
    spec = _BUILTINS[name]
    return build_presentation(name, spec["letters"], spec["hat"], spec["matrices"], spec["cusp_reps"])


def builtin_names():
    return sorted(_BUILTINS)


def modular_torus() -> GroupPresentation:
    """Commutator subgroup of SL(2,Z) with generators [[1,1],[1,2]], [[1,-1],[-1,2]].

    Its Dirichlet region at phi^{-1}(0) = i is not an ideal quadrilateral, so
    this presentation fails ``validate``.  Kept as a negative fixture.
    """
    return build_presentation(
        "modular_torus",
        ("a", "b", "A", "B"),
        {"a": "A", "A": "a", "b": "B", "B": "b"},
        {"a": [[1, 1], [1, 2]], "A": [[2, -1], [-1, 1]], "b": [[1, -1], [-1, 2]], "B": [[2, 1], [1, 1]]},
        ([[1, 0], [0, 1]],),
    )


# -- config files --------------------------------------------------------------


def parse_group_spec(data: dict) -> GroupPresentation:
    """Group from a dict with keys ``letters`` and ``cusp_representatives``.

    Each letter entry has ``label``, ``hat`` and ``matrix`` (four reals a, b, c, d).
    """
    try:
        entries = data["letters"]
        reps = data["cusp_representatives"]
    except KeyError as exc:
        raise GroupSpecError(f"missing key {exc}") from None
    if len(entries) % 2 or not entries:
        raise GroupSpecError("alphabet size must be even and positive")
    letters, hat, mats = [], {}, {}
    for e in entries:
        lab = str(e["label"])
        m = [float(v) for v in e["matrix"]]
        if len(m) != 4:
            raise GroupSpecError(f"matrix of {lab} needs four entries")
        det = m[0] * m[3] - m[1] * m[2]
        if abs(det - 1.0) > 1e-9:
            raise GroupSpecError(f"matrix of {lab} has determinant {det}")
        letters.append(lab)
        hat[lab] = str(e["hat"])
        mats[lab] = [[m[0], m[1]], [m[2], m[3]]]
    cusp = []
    for r in reps:
        m = [float(v) for v in r]
        if len(m) != 4 or abs(m[0] * m[3] - m[1] * m[2] - 1.0) > 1e-9:
            raise GroupSpecError(f"cusp representative {r} is not unimodular")
        cusp.append([[m[0], m[1]], [m[2], m[3]]])
    if any(hat[x] not in hat for x in letters):
        raise GroupSpecError("hat partner not in the alphabet")
    return build_presentation(data.get("name", "custom"), letters, hat, mats, cusp)


def load_group_spec(path) -> GroupPresentation:
    with open(Path(path)) as fh:
        return parse_group_spec(json.load(fh))
