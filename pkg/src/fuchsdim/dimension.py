"""Bowen equation, cylinder-pressure oracles and the first-order constant Theta."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from .coding import (
    LEFT,
    RIGHT,
    aperiodicity_threshold,
    domain_letters,
    enumerate_alphabet,
    families,
)
from .group_model import GroupPresentation, TWO_PI, angle_t
from .transfer import (
    ArcGrid,
    Eigendata,
    assemble,
    contraction_theta,
    leading_eigen,
    make_grid,
)


class BracketError(RuntimeError):
    pass


# -- Bowen equation -------------------------------------------------------------


@dataclass
class BowenResult:
    T: float
    s: float
    lam: float
    residual: float
    bracket: tuple
    iterations: int
    grid_m: int


def eigenvalue(g: GroupPresentation, s: float, T: float, grid: ArcGrid, v0=None, tol: float = 1e-13) -> Eigendata:
    return leading_eigen(assemble(g, s, T, grid), tol=tol, v0=v0)


def bowen_bisect(lam, s_lo: float, s_hi: float, tol: float = 1e-10, max_iter: int = 200):
    """Bisection for lam(s) = 1 with lam decreasing; returns (s, lam(s), iterations, bracket)."""
    l_lo, l_hi = lam(s_lo), lam(s_hi)
    while l_lo <= 1.0 and s_lo > 1e-3:
        s_lo *= 0.5
        l_lo = lam(s_lo)
    if not (l_lo > 1.0 > l_hi):
        raise BracketError(f"no bracket: lambda({s_lo})={l_lo}, lambda({s_hi})={l_hi}")
    a, b = s_lo, s_hi
    it = 0
    s = 0.5 * (a + b)
    lm = lam(s)
    while abs(lm - 1.0) >= tol and it < max_iter and b - a > 1e-15:
        if lm > 1.0:
            a = s
        else:
            b = s
        s = 0.5 * (a + b)
        lm = lam(s)
        it += 1
    if abs(lm - 1.0) >= tol:
        raise BracketError("bisection did not reach the tolerance")
    return s, lm, it, (s_lo, s_hi)


def solve_bowen(
    g: GroupPresentation,
    T: float,
    grid: ArcGrid | None = None,
    tol: float = 1e-10,
    s_lo: float = 0.5,
    s_hi: float = 1.0,
    max_iter: int = 200,
) -> BowenResult:
    """Bisection for lambda(s_T, T) = 1 on a verified bracket."""
    grid = grid or make_grid(g, 128)
    eig_tol = min(1e-13, tol * 1e-2)
    s, lm, it, br = bowen_bisect(lambda x: eigenvalue(g, x, T, grid, tol=eig_tol).lam, s_lo, s_hi, tol, max_iter)
    return BowenResult(T, s, lm, abs(lm - 1.0), br, it, grid.m)


# -- cylinder oracles ------------------------------------------------------------


def _deriv_extrema_on_arc(F, t0: float, ln: float):
    """Exact (inf, sup) of |D F| over the arc {exp(-i t): t0 <= t <= t0 + ln}."""
    if F.beta == 0:
        return 1.0, 1.0
    om = F.pole
    r = abs(om)
    ends = np.exp(-1j * np.array([t0, t0 + ln]))
    d_ends = np.abs(ends - om)
    d_min, d_max = d_ends.min(), d_ends.max()

    def inside(xi):
        tau = np.mod(angle_t(xi) - t0, TWO_PI)
        return tau <= ln

    near = om / r
    if inside(near):
        d_min = r - 1.0
    if inside(-near):
        d_max = r + 1.0
    c = abs(F.beta) ** 2
    return 1.0 / (c * d_max**2), 1.0 / (c * d_min**2)


def _blocks(g, words, n, start_letter):
    """All admissible blocks (W1..Wn) with [start_letter] inside domain(Wn), as element lists."""
    dom = {id(W): set(domain_letters(g, W.last, W.eps)) for W in words}
    # build backwards: last word must have start_letter in its domain
    level = [((W,), W.F) for W in words if start_letter in dom[id(W)]]
    for _ in range(n - 1):
        nxt = []
        for blk, F in level:
            first = blk[0]
            for W in words:
                if first.a0 in dom[id(W)]:
                    nxt.append(((W,) + blk, W.F @ F))
        level = nxt
        if len(level) > 10**7:
            raise MemoryError("more than 1e7 blocks")
    return level


def cylinder_pressure_dim(g: GroupPresentation, T: float, n: int, max_blocks: int = 10**7):
    """Bracket [s_inf, s_sup] for s_T from depth-n cylinder sums.

    s_sup solves max_a sum sup_[a] |D F_w|^s = 1, s_inf solves
    min_a sum inf_[a] |D F_w|^s = 1; the spectral radius lies between them.
    """
    words = enumerate_alphabet(g, T).words
    n_est = len(words) ** n
    if n_est > max_blocks * 4:
        raise MemoryError(f"about {n_est} blocks")
    sups, infs = [], []
    for a in g.letters_by_order():
        lo, hi = [], []
        for blk, F in _blocks(g, words, n, a):
            i, s_ = _deriv_extrema_on_arc(F, g.t_left[a], g.length[a])
            lo.append(i)
            hi.append(s_)
        infs.append(np.log(np.array(lo)))
        sups.append(np.log(np.array(hi)))

    def z_sup(s):
        return max(np.log(np.exp(s * v).sum()) for v in sups)

    def z_inf(s):
        return min(np.log(np.exp(s * v).sum()) for v in infs)

    s_sup = _root(z_sup)
    s_inf = _root(z_inf)
    return s_inf, s_sup


def _root(fun, lo=1e-6, hi=4.0):
    if fun(hi) > 0:
        return hi
    return brentq(fun, lo, hi, xtol=1e-14)


def single_branch_dim(ratio: float, count: int = 1) -> float:
    """Root of count * ratio^s = 1 through the same root finder."""
    return _root(lambda s: np.log(count) + s * np.log(ratio))


def _tree_logs(g, words, points_by_letter, n):
    """Log-derivatives of all admissible depth-n branches at the sample points.

    Returns a list over depth k = 0..n of (origin index, sum of log |D F|)
    so that L^k 1(x_i) = sum over origin i of exp(s * log).
    """
    dom = {id(W): domain_letters(g, W.last, W.eps) for W in words}
    letters = g.letters_by_order()
    by_letter = {a: [W for W in words if a in dom[id(W)]] for a in letters}
    xs, labs, orig = [], [], []
    for i, a in enumerate(letters):
        p = np.asarray(points_by_letter[a], dtype=complex)
        xs.append(p)
        labs.append(np.full(p.size, i))
    xs = np.concatenate(xs)
    labs = np.concatenate(labs)
    orig = np.arange(xs.size)
    logs = np.zeros(xs.size)
    out = [(orig, logs)]
    for _ in range(n):
        nx, nl, no, ng = [], [], [], []
        for i, a in enumerate(letters):
            sel = labs == i
            if not sel.any():
                continue
            x, o, lg = xs[sel], orig[sel], logs[sel]
            for W in by_letter[a]:
                nx.append(W.F.act_boundary(x))
                ng.append(lg + np.log(W.F.dmod(x)))
                no.append(o)
                nl.append(np.full(x.size, letters.index(W.a0)))
        xs, logs, orig, labs = (np.concatenate(v) for v in (nx, ng, no, nl))
        out.append((orig, logs))
        if xs.size > 5 * 10**7:
            raise MemoryError("tree too large")
    return out


def collatz_wielandt_bracket(g: GroupPresentation, T: float, s: float, n: int = 3, points: int = 8, _tree=None):
    """min/max over sample points of L^n 1 / L^{n-1} 1, a bracket for lambda(s, T)."""
    tree = _tree or _cw_tree(g, T, n, points)
    n_pts = tree[0][0].size
    sums = [np.bincount(o, weights=np.exp(s * lg), minlength=n_pts) for o, lg in tree[-2:]]
    ratios = sums[1] / sums[0]
    return float(ratios.min()), float(ratios.max())


def _cw_tree(g, T, n, points):
    words = enumerate_alphabet(g, T).words
    tau = (np.arange(points) + 0.5) / points
    pts = {a: g.point(a, tau * g.length[a]) for a in g.letters_by_order()}
    return _tree_logs(g, words, pts, n)


def collatz_wielandt_dim(g: GroupPresentation, T: float, n: int = 3, points: int = 8, tol: float = 1e-12):
    """Bracket for s_T from the Collatz-Wielandt bounds on lambda (exact branches, no grid)."""
    tree = _cw_tree(g, T, n, points)

    def root(which):
        f = lambda s: collatz_wielandt_bracket(g, T, s, n, points, _tree=tree)[which] - 1.0  # noqa: E731
        return brentq(f, 0.3, 1.2, xtol=tol)

    return root(0), root(1)


# -- delta, beta, Theta -----------------------------------------------------------


def eigendata_at_one(g: GroupPresentation, grid: ArcGrid | None = None) -> Eigendata:
    grid = grid or make_grid(g, 256)
    return leading_eigen(assemble(g, 1.0, np.inf, grid), tol=1e-13)


def integrate(eig: Eigendata, values, rule: str = "nodal") -> float:
    """Integral against mu: 'nodal' uses the left eigenvector, 'midpoint' the cell midpoints."""
    v = values.values if hasattr(values, "values") else np.asarray(values)
    if rule == "nodal":
        return float(eig.mu @ v)
    grid = eig.operator.grid
    w = grid.quadrature_weights()
    rho = eig.mu / w
    total = 0.0
    for x in grid.letters:
        b = grid.block(x)
        d = np.diff(grid.tau[x])
        r, f = rho[b], v[b]
        total += float(np.sum(d * 0.5 * (r[1:] + r[:-1]) * 0.5 * (f[1:] + f[:-1])))
    return total


def compute_delta(g: GroupPresentation, eig: Eigendata, rule: str = "nodal") -> float:
    A = assemble(g, 1.0, np.inf, eig.operator.grid, kind="A")
    Ag = A.matrix @ eig.g.values
    delta = integrate(eig, Ag, rule) / integrate(eig, eig.g.values, rule)
    if not delta < 0:
        raise ArithmeticError(f"delta = {delta} is not negative")
    return delta


def eigenvalue_slope(g: GroupPresentation, grid: ArcGrid, h: float = 1e-3) -> float:
    up = eigenvalue(g, 1.0 + h, np.inf, grid).lam
    dn = eigenvalue(g, 1.0 - h, np.inf, grid).lam
    return (up - dn) / (2 * h)


def one_sided_limit(eig: Eigendata, letter: str, side: str, k: int = 8) -> float:
    """Limit of g at an end of [letter] from inside, by linear extrapolation of samples."""
    grid = eig.operator.grid
    t = grid.tau[letter]
    h = t[1] - t[0] if side == LEFT else t[-1] - t[-2]
    d = h * 0.5 ** np.arange(1, k + 1)
    ln = grid.g.length[letter]
    tau = d if side == LEFT else ln - d
    vals = eig.g(letter, tau)
    c = np.polyfit(d, vals, 1)
    return float(c[1])


def beta_closed_form(g: GroupPresentation, eig: Eigendata) -> float:
    """Limit of T * integral(Delta_(1,T) g) from the parabolic asymptotics."""
    grid = eig.operator.grid
    total = np.zeros(grid.size)
    limits = {}
    for f in families(g):
        key = (f.a0, f.eps)
        if key not in limits:
            limits[key] = one_sided_limit(eig, f.a0, LEFT if f.eps == LEFT else RIGHT)
        shift = abs(f._length_affine[0])
        xi0, t = f.parabolic
        for a in domain_letters(g, f.last, f.eps):
            b = grid.block(a)
            xi = grid.nodes[b]
            y = f.F_V.act_boundary(xi)
            dV = f.F_V.dmod(xi)
            total[b] += shift * dV * limits[key] / (t**2 * np.abs(y - xi0) ** 2)
    beta = float(eig.mu @ total)
    return beta


def beta_sequence(g: GroupPresentation, eig: Eigendata, Ts) -> list:
    """T * integral(Delta_(1,T) g dmu) for each T."""
    out = []
    for T in Ts:
        D = assemble(g, 1.0, float(T), eig.operator.grid, kind="Delta")
        out.append(float(T) * float(eig.mu @ (D.matrix @ eig.g.values)))
    return out


def richardson(Ts, values) -> float:
    """First-order Richardson limit from the last two entries of a doubling sequence."""
    T1, T2 = Ts[-2], Ts[-1]
    v1, v2 = values[-2], values[-1]
    r = T2 / T1
    return (r * v2 - v1) / (r - 1.0)


def compute_beta(g: GroupPresentation, eig: Eigendata, Ts=(100, 200, 400, 800)):
    """(beta_closed_form, beta_richardson, sequence)."""
    seq = beta_sequence(g, eig, Ts)
    beta = beta_closed_form(g, eig)
    if not beta > 0:
        raise ArithmeticError(f"beta = {beta} is not positive")
    return beta, richardson(list(Ts), seq), seq


def theta_spectral(delta: float, beta: float) -> float:
    if not delta < 0:
        raise ValueError("delta must be negative")
    if not beta > 0:
        raise ValueError("beta must be positive")
    return beta / (-delta)


@dataclass
class RegressionFit:
    intercept: float
    slope: float
    residuals: list


def theta_regression(Ts, s_values) -> RegressionFit:
    """Least squares T (1 - s_T) = Theta + c / T."""
    Ts = np.asarray(Ts, dtype=float)
    s_values = np.asarray(s_values, dtype=float)
    if len(Ts) < 4 or Ts.max() < 8 * Ts.min():
        raise ValueError("need at least four values of T spanning a factor 8")
    y = Ts * (1.0 - s_values)
    X = np.column_stack([np.ones_like(Ts), 1.0 / Ts])
    if np.linalg.cond(X) > 1e8:
        raise ValueError("ill-conditioned fit")
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    if not coef[0] > 0:
        raise ArithmeticError(f"nonpositive intercept {coef[0]}")
    return RegressionFit(float(coef[0]), float(coef[1]), list(y - X @ coef))


@dataclass
class DimensionReport:
    group: str
    rows: list = field(default_factory=list)      # (T, s_T, residual, grid m)
    theta_spectral: float = float("nan")
    theta_regression: float = float("nan")
    delta: float = float("nan")
    beta: float = float("nan")
    beta_limit: float = float("nan")
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def dimension_report(g: GroupPresentation, Ts=(25, 50, 100, 200), m: int = 128, m_spectral: int = 256) -> DimensionReport:
    rep = DimensionReport(g.name)
    grid = make_grid(g, m)
    s_vals = []
    for T in Ts:
        r = solve_bowen(g, float(T), grid)
        rep.rows.append((float(T), r.s, r.residual, grid.m))
        s_vals.append(r.s)
    eig = eigendata_at_one(g, make_grid(g, m_spectral))
    rep.delta = compute_delta(g, eig)
    beta, beta_lim, _ = compute_beta(g, eig)
    rep.beta, rep.beta_limit = beta, beta_lim
    rep.theta_spectral = theta_spectral(rep.delta, rep.beta)
    if len(Ts) >= 4:
        rep.theta_regression = theta_regression(Ts, s_vals).intercept
    rep.diagnostics = {
        "theta_contraction": contraction_theta(g, max(Ts)),
        "aperiodicity_T0": aperiodicity_threshold(g),
        "lambda_1_inf": eig.lam,
    }
    return rep


def derivative_length_ratios(g: GroupPresentation, T: float, samples: int = 64):
    """(min, max) over cuspidal words 0 < |W| <= T and xi in domain(W) of |W|^2 |D_xi F_W|."""
    lo, hi = np.inf, 0.0
    for W in enumerate_alphabet(g, T).words:
        if W.length <= 0:
            continue
        for a in domain_letters(g, W.last, W.eps):
            tau = np.linspace(0.0, g.length[a], samples)
            d = W.F.dmod(g.point(a, tau)) * W.length**2
            lo, hi = min(lo, float(d.min())), max(hi, float(d.max()))
    return lo, hi
