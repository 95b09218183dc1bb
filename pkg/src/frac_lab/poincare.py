"""Poincare-type constants on one-dimensional domains and their line-section reductions.

The discrete constants are Rayleigh quotients

    R(u) = [u]^p_{s,p,R} / ||u||_q^p

over continuous piecewise-linear u that vanish outside a finite union of
intervals.  Minimising over a finite-dimensional subspace gives an upper
estimate of the infimum.  Lower estimates come from the closed-form bounds
obtained by comparing u with its zero set.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq
from scipy.sparse.linalg import splu

from .constants import CriticalParams, ball_volume
from .funcspace import PiecewiseFunction1D, QuadratureSpec, RadialProfile, even_extension, gagliardo_1d, gagliardo_radial, lq_norm, translate_dilate
from .funcspace.quadrature import EnergyTerms, LineMesh, LineModel, _cell_points, _legendre

__all__ = [
    "IntervalUnionDomain",
    "StripsDomain",
    "BetweenGraphsDomain",
    "SectionFamily",
    "RayleighEstimate",
    "FbcScan",
    "UniformCheck",
    "rayleigh_estimate",
    "analytic_lower_bound_1d",
    "strong_fp_bound",
    "strong_fp_verify",
    "section_lower_bound",
    "fbc_decay_scan",
    "ls_sections",
    "uniform_poincare_check",
    "augmented_rayleigh",
    "domain_from_json",
    "load_domain",
    "results_json",
]


# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class IntervalUnionDomain:
    """Finite union of disjoint open intervals, stored in ascending order."""

    intervals: tuple

    def __post_init__(self):
        iv = tuple((float(a), float(b)) for a, b in self.intervals)
        if not iv:
            raise ValueError("domain has no intervals")
        for a, b in iv:
            if not (math.isfinite(a) and math.isfinite(b) and a < b):
                raise ValueError(f"invalid interval ({a}, {b})")
        iv = tuple(sorted(iv))
        for (_, b), (c, _) in zip(iv, iv[1:]):
            if c <= b:
                raise ValueError("intervals must be disjoint with positive gaps")
        object.__setattr__(self, "intervals", iv)

    @property
    def gaps(self) -> np.ndarray:
        return np.array([c - b for (_, b), (c, _) in zip(self.intervals, self.intervals[1:])])

    @property
    def m(self) -> float:
        """Smallest gap between consecutive intervals (inf for one interval)."""
        return float(self.gaps.min()) if len(self.intervals) > 1 else math.inf

    @property
    def M(self) -> float:
        return max(b - a for a, b in self.intervals)

    @property
    def m1(self) -> float:
        """Smallest length of a bounded complementary interval."""
        return self.m

    @property
    def span(self) -> tuple[float, float]:
        return self.intervals[0][0], self.intervals[-1][1]

    def scaled(self, c: float) -> "IntervalUnionDomain":
        return IntervalUnionDomain(tuple((c * a, c * b) for a, b in self.intervals))

    def to_json(self) -> dict:
        return {"type": "intervals", "intervals": [list(i) for i in self.intervals]}


@dataclass(frozen=True)
class StripsDomain:
    """(union of intervals in coordinate ``axis``) x R in the plane."""

    intervals: tuple
    axis: int = 0

    def __post_init__(self):
        base = IntervalUnionDomain(self.intervals)
        object.__setattr__(self, "intervals", base.intervals)
        if self.axis not in (0, 1):
            raise ValueError("axis must be 0 or 1")


@dataclass(frozen=True, eq=False)
class BetweenGraphsDomain:
    """{(x, y): lower(x) < y < upper(x)} with monotone cubic profiles through the given nodes.

    Beyond the node range both profiles are continued as constants.
    """

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        up = np.asarray(self.upper, dtype=float)
        for g, name in ((lo, "lower"), (up, "upper")):
            if g.ndim != 2 or g.shape[1] != 2 or g.shape[0] < 1:
                raise ValueError(f"{name} must be a list of [x, y] nodes")
            if np.any(np.diff(g[:, 0]) <= 0):
                raise ValueError(f"{name} node abscissae must be strictly increasing")
        object.__setattr__(self, "_lo", _profile(lo))
        object.__setattr__(self, "_up", _profile(up))
        xs = np.union1d(lo[:, 0], up[:, 0])
        grid = np.linspace(xs[0], xs[-1], 4001) if xs.size > 1 else xs
        if np.any(self._up(grid) - self._lo(grid) <= 0):
            raise ValueError("upper profile must lie strictly above the lower profile")
        object.__setattr__(self, "x_range", (float(xs[0]), float(xs[-1])))
        object.__setattr__(self, "y_range", (float(min(self._lo(grid).min(), lo[:, 1].min())),
                                             float(max(self._up(grid).max(), up[:, 1].max()))))

    def lower_at(self, x):
        return self._lo(x)

    def upper_at(self, x):
        return self._up(x)


def _profile(nodes):
    if nodes.shape[0] == 1:
        c = float(nodes[0, 1])
        return lambda x: np.full(np.shape(x), c) if np.ndim(x) else c
    f = PchipInterpolator(nodes[:, 0], nodes[:, 1], extrapolate=False)
    x0, x1 = nodes[0, 0], nodes[-1, 0]
    y0, y1 = nodes[0, 1], nodes[-1, 1]

    def g(x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= x0, y0, np.where(x >= x1, y1, f(np.clip(x, x0, x1))))

    return g


def domain_from_json(obj: dict):
    kind = obj.get("type")
    if kind == "intervals":
        return IntervalUnionDomain(tuple(map(tuple, obj["intervals"])))
    if kind == "strips":
        return StripsDomain(tuple(map(tuple, obj["intervals"])), int(obj.get("axis", 0)))
    if kind == "between_graphs":
        return BetweenGraphsDomain(tuple(map(tuple, obj["lower"])), tuple(map(tuple, obj["upper"])))
    raise ValueError(f"unknown domain type {kind!r}")


def load_domain(path):
    with open(path) as fh:
        return domain_from_json(json.load(fh))


# ---------------------------------------------------------------------------
# Rayleigh quotients


@dataclass
class RayleighEstimate:
    value: float
    minimizer: PiecewiseFunction1D
    iterations: int
    residual: float
    flags: list = field(default_factory=list)
    cross_check: float | None = None
    restarts: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return "not_converged" not in self.flags


def results_json(est: RayleighEstimate, lower_bound: float | None = None) -> str:
    out = {
        "value": est.value,
        "lower_bound": lower_bound,
        "iterations": est.iterations,
        "residual": est.residual,
        "flags": list(est.flags),
    }
    if est.cross_check is not None:
        out["cross_check"] = est.cross_check
    return json.dumps(out, indent=2, sort_keys=True) + "\n"


def _domain_mesh(domain: IntervalUnionDomain, grid_n: int) -> LineMesh:
    pieces = [(np.linspace(a, b, grid_n + 1), np.zeros(grid_n + 1)) for a, b in domain.intervals]
    return LineMesh(pieces, min_cells=grid_n, grade=False)


def _lq_groups(mesh, q):
    # int |u|^q as sum w |u(node)|^q; exact for even integer q
    if float(q).is_integer() and int(q) % 2 == 0:
        order = int(q) // 2 + 1
    else:
        order = 12
    t, w = _legendre(order)
    idx, coef = _cell_points(mesh.cell_left, t)
    wt = (mesh.h[:, None] * w[None, :]).ravel()
    return [(idx, coef, wt)]


def _ball_groups(mesh, ball, sigma, order=12):
    # int_Omega |u(x)|^p int_B |x - y|^-(1+sigma) dy dx
    c, R = ball
    t, w = _legendre(order)
    idx, coef = _cell_points(mesh.cell_left, t)
    x = (mesh.x[mesh.cell_left][:, None] + mesh.h[:, None] * t[None, :]).ravel()
    d1, d2 = np.abs(x - (c - R)), np.abs(x - (c + R))
    near, far = np.minimum(d1, d2), np.maximum(d1, d2)
    ker = (near**-sigma - far**-sigma) / sigma
    wt = (mesh.h[:, None] * w[None, :]).ravel() * ker
    return [(idx, coef, wt)]


class _Quotient:
    def __init__(self, energy: EnergyTerms, norm: EnergyTerms, p, q, free, mass):
        self.E, self.N = energy, norm
        self.p, self.q = p, q
        self.free = free
        self.mass = mass

    def normalize(self, U):
        return U / self.N.energy(U) ** (1.0 / self.q)

    def value(self, U):
        return self.E.energy(U) / self.N.energy(U) ** (self.p / self.q)

    def grad(self, U):
        e, nq = self.E.energy(U), self.N.energy(U)
        r = e / nq ** (self.p / self.q)
        g = self.E.gradient(U) / nq ** (self.p / self.q) - (self.p / self.q) * r / nq * self.N.gradient(U)
        g[~self.free] = 0.0
        return r, g


def _descend(Q: _Quotient, U, max_iter, tol):
    """Normalised gradient descent with Barzilai-Borwein steps and Armijo backtracking."""
    U = Q.normalize(U)
    r, g = Q.grad(U)
    d = -g / Q.mass
    step = 1.0 / max(r, 1e-300)
    U_prev = g_prev = None
    residual = math.inf
    stall = 0
    for it in range(1, max_iter + 1):
        if U_prev is not None:
            sv, yv = U - U_prev, (g - g_prev) / Q.mass
            sy = float(np.dot(sv * Q.mass, yv))
            if sy > 0:
                step = float(np.dot(sv * Q.mass, sv)) / sy
        slope = float(np.dot(g, d))
        trial = step
        while True:
            V = Q.normalize(U + trial * d)
            rv = Q.value(V)
            if rv <= r + 1e-4 * trial * slope or trial < 1e-20:
                break
            trial *= 0.5
        U_prev, g_prev = U, g
        r_old = r
        U = V
        r, g = Q.grad(U)
        d = -g / Q.mass
        residual = math.sqrt(float(np.dot(g * g, 1.0 / Q.mass))) / r
        if residual < tol:
            return U, r, it, residual, True
        stall = stall + 1 if r_old - r <= 1e-15 * r else 0
        if stall >= 50:
            break
    return U, r, it, residual, False


def _inverse_iteration(Q_form, M_form, free, max_iter=2000, tol=1e-14):
    """Smallest eigenvalue of Q v = lam M v on the free nodes by inverse power iteration."""
    Qf = Q_form[free][:, free].tocsc()
    Mf = M_form[free][:, free].tocsr()
    lu = splu(Qf)
    v = np.ones(Qf.shape[0])
    lam = math.inf
    for it in range(1, max_iter + 1):
        w = lu.solve(Mf @ v)
        w /= math.sqrt(float(w @ (Mf @ w)))
        new = float(w @ (Qf @ w))
        v = w
        if abs(new - lam) <= tol * new:
            return new, it
        lam = new
    return lam, max_iter


def _hump(mesh):
    U = np.zeros(mesh.n_nodes)
    for s, e in zip(mesh.starts, mesh.ends):
        a, b = mesh.x[s], mesh.x[e]
        U[s : e + 1] = np.sin(math.pi * (mesh.x[s : e + 1] - a) / (b - a))
    U[~mesh.free] = 0.0
    return U


def _minimize(energy, mesh, s, p, q, restarts, seed, max_iter, tol, threads, cross_check):
    norm = EnergyTerms.from_groups(mesh, q, _lq_groups(mesh, q))
    mass = np.bincount(mesh.cell_left, mesh.h / 2, minlength=mesh.n_nodes) + np.bincount(
        mesh.cell_left + 1, mesh.h / 2, minlength=mesh.n_nodes)
    Q = _Quotient(energy, norm, p, q, mesh.free, mass)
    rng = np.random.default_rng(seed)
    starts = [_hump(mesh)]
    for _ in range(restarts):
        U = rng.uniform(0.0, 1.0, mesh.n_nodes)
        U[~mesh.free] = 0.0
        starts.append(U)

    run = lambda U0: _descend(Q, U0, max_iter, tol)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(U0) for U0 in starts]
    best = min(range(len(results)), key=lambda i: (results[i][1], i))
    U, r, it, res, ok = results[best]
    flags = [] if ok else ["not_converged"]
    oracle = None
    if cross_check and p == 2.0 and q == 2.0:
        oracle, _ = _inverse_iteration(energy.quadratic_form(), norm.quadratic_form(), mesh.free)
        if abs(r - oracle) > 1e-6 * oracle:
            flags.append("cross_check_mismatch")
    return RayleighEstimate(
        value=float(r),
        minimizer=PiecewiseFunction1D(mesh.x, U),
        iterations=int(sum(x[2] for x in results)),
        residual=float(res),
        flags=flags,
        cross_check=oracle,
        restarts=[float(x[1]) for x in results],
    )


def _check_rayleigh_args(s, p, q, grid_n):
    if not 0 < s < 1:
        raise ValueError("s must lie in (0, 1)")
    if not p > 1:
        raise ValueError("p must be > 1")
    if not q >= 1:
        raise ValueError("q must be >= 1")
    if int(grid_n) != grid_n or grid_n < 64:
        raise ValueError("grid_n must be an integer >= 64")


def rayleigh_estimate(domain: IntervalUnionDomain, s: float, p: float, q: float, grid_n: int = 64, *,
                      restarts: int = 3, seed: int = 0, max_iter: int = 4000, tol: float = 1e-6,
                      threads: int = 1, cross_check: bool = True) -> RayleighEstimate:
    """Upper estimate of inf [u]^p / ||u||_q^p over u vanishing outside the domain.

    The trial space is continuous piecewise-linear functions with ``grid_n``
    equal cells on every interval.  The descent starts from one hump per
    interval and from ``restarts`` random vectors; the lowest value wins.
    For p = q = 2 the result is compared with inverse power iteration on
    the assembled quadratic forms and ``cross_check_mismatch`` is flagged
    when they differ by more than 1e-6 relative.
    """
    _check_rayleigh_args(s, p, q, grid_n)
    mesh = _domain_mesh(domain, int(grid_n))
    energy = EnergyTerms(mesh, LineModel(s, p))
    return _minimize(energy, mesh, s, float(p), float(q), restarts, seed, max_iter, tol, threads, cross_check)


def _check_ball(domain: IntervalUnionDomain, ball):
    c, R = float(ball[0]), float(ball[1])
    if not R > 0:
        raise ValueError("ball radius must be > 0")
    for a, b in domain.intervals:
        if c - R < b and a < c + R:
            raise ValueError(f"ball ({c - R}, {c + R}) overlaps the domain interval ({a}, {b})")
    return c, R


def augmented_rayleigh(domain: IntervalUnionDomain, ball, sigma: float, s: float, p: float, q: float,
                       grid_n: int = 64, **kw) -> RayleighEstimate:
    """Upper estimate of the constant with energy over Omega x Omega plus Omega x B_R.

    The first part has kernel |x - y|^-(1+sp), the ball part |x - y|^-(1+sigma).
    The ball must not touch the domain.
    """
    _check_rayleigh_args(s, p, q, grid_n)
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    c, R = _check_ball(domain, ball)
    if any(min(abs(a - (c + R)), abs(b - (c - R))) == 0 for a, b in domain.intervals):
        raise ValueError("the ball must be at positive distance from the domain")
    mesh = _domain_mesh(domain, int(grid_n))
    energy = EnergyTerms(mesh, LineModel(s, p), exterior=False, extra=_ball_groups(mesh, (c, R), sigma))
    opts = dict(restarts=3, seed=0, max_iter=4000, tol=1e-6, threads=1, cross_check=True)
    opts.update(kw)
    return _minimize(energy, mesh, s, float(p), float(q), opts["restarts"], opts["seed"], opts["max_iter"],
                     opts["tol"], opts["threads"], opts["cross_check"])


# ---------------------------------------------------------------------------
# analytic bounds


def analytic_lower_bound_1d(domain: IntervalUnionDomain, s: float, p: float) -> float:
    """m1 / (M + m)^(1 + sp), a lower bound for the (p, p) constant of a union of at least two intervals."""
    if len(domain.intervals) < 2:
        raise ValueError("analytic_lower_bound_1d needs at least two intervals; use strong_fp_bound for one")
    if not 0 < s < 1 or not p >= 1:
        raise ValueError("need 0 < s < 1 <= p")
    return domain.m1 / (domain.M + domain.m) ** (1.0 + s * p)


def strong_fp_bound(domain, ball, sigma: float, p: float) -> float:
    """diam(Omega u B_R)^(n+sigma) / |B_R|.

    ``domain`` is an IntervalUnionDomain (n = 1) or a ball ``(center, radius)``
    in R^n; ``ball`` is ``(center, R)`` with center a number or a point.
    """
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    if not p >= 1:
        raise ValueError("p must be >= 1")
    if isinstance(domain, IntervalUnionDomain):
        c, R = _check_ball(domain, ball)
        lo, hi = domain.span
        diam = max(hi, c + R) - min(lo, c - R)
        n = 1
    else:
        c0, r0 = np.atleast_1d(np.asarray(domain[0], dtype=float)), float(domain[1])
        c1, R = np.atleast_1d(np.asarray(ball[0], dtype=float)), float(ball[1])
        if c0.shape != c1.shape:
            raise ValueError("domain and ball live in different dimensions")
        if not (r0 > 0 and R > 0):
            raise ValueError("radii must be > 0")
        dist = float(np.linalg.norm(c0 - c1))
        if dist < r0 + R:
            raise ValueError("ball overlaps the domain")
        n = c0.size
        diam = dist + r0 + R
    return diam ** (n + sigma) / ball_volume(n, R)


def strong_fp_verify(domain: IntervalUnionDomain, ball, sigma: float, p: float, samples: int = 20,
                     seed: int = 0, order: int = 16) -> np.ndarray:
    """Slack bound * RHS - LHS of the ball inequality for random tent functions.

    Each sample is a tent with random centre, width and height inside a
    random interval of the domain; u vanishes on the ball so the double
    integral reduces to int |u|^p times an explicit kernel.
    """
    c, R = _check_ball(domain, ball)
    bound = strong_fp_bound(domain, (c, R), sigma, p)
    rng = np.random.default_rng(seed)
    t, w = _legendre(order)
    out = np.empty(samples)
    for k in range(samples):
        a, b = domain.intervals[rng.integers(len(domain.intervals))]
        lo, hi = np.sort(rng.uniform(a, b, 2))
        mid = rng.uniform(lo, hi)
        height = rng.uniform(0.1, 2.0)
        lhs = rhs = 0.0
        for x0, x1, rising in ((lo, mid, True), (mid, hi, False)):
            if x1 <= x0:
                continue
            x = x0 + (x1 - x0) * t
            u = height * ((x - x0) if rising else (x1 - x)) / (x1 - x0)
            d1, d2 = np.abs(x - (c - R)), np.abs(x - (c + R))
            ker = (np.minimum(d1, d2) ** -sigma - np.maximum(d1, d2) ** -sigma) / sigma
            lhs += (x1 - x0) * float(np.dot(w, u**p))
            rhs += (x1 - x0) * float(np.dot(w, u**p * ker))
        out[k] = bound * rhs - lhs
    return out


def section_lower_bound(domain: IntervalUnionDomain, s: float, p: float) -> float:
    """Closed-form lower bound for the (p, p) constant of any interval union.

    Several intervals use the gap bound; a single interval of length L uses
    the ball bound with the adjacent interval of length L / (sp) (the best
    length for that bound), so the value is b / (L + b)^(1 + sp).
    """
    if len(domain.intervals) > 1:
        return analytic_lower_bound_1d(domain, s, p)
    L = domain.M
    b = L / (s * p)
    return b / (L + b) ** (1.0 + s * p)


# ---------------------------------------------------------------------------
# finite ball condition


@dataclass(frozen=True)
class FbcScan:
    ell: tuple
    quotient: tuple
    slope: float
    base_quotient: float


def fbc_decay_scan(base: RadialProfile, q: float, params: CriticalParams, ell_grid,
                   quad: QuadratureSpec | None = None) -> FbcScan:
    """Rayleigh quotients of x -> base((x - x_l) / l) on a space with arbitrarily large balls.

    The centres x_l = (l + 1) e_1 keep B(x_l, l) inside a half-space.  The
    slope is the least-squares fit of log quotient against log l.
    """
    ell = [float(e) for e in ell_grid]
    if any(not e > 0 for e in ell) or any(b <= a for a, b in zip(ell, ell[1:])):
        raise ValueError("ell_grid must be positive and strictly increasing")
    if base.support_radius > 1.0 + 1e-12:
        raise ValueError("base profile must be supported in the unit ball")
    if not q >= 1:
        raise ValueError("q must be >= 1")
    n, p = params.n, params.p

    def quotient(u):
        if n == 1:
            semi = gagliardo_1d(even_extension(u), params.s, p, quad)
        else:
            semi = gagliardo_radial(u, params, quad)
        return semi / lq_norm(u, q, n) ** p

    base_q = quotient(base)
    vals = []
    for e in ell:
        x_l = np.zeros(n)
        x_l[0] = e + 1.0
        vals.append(quotient(translate_dilate(base, x_l, e)))
    slope = float(np.polyfit(np.log(ell), np.log(vals), 1)[0]) if len(ell) > 1 else math.nan
    return FbcScan(tuple(ell), tuple(vals), slope, base_q)


# ---------------------------------------------------------------------------
# line sections


@dataclass
class SectionFamily:
    direction: tuple
    offsets: tuple
    sections: list
    flags: list = field(default_factory=list)


def _strip_section(dom: StripsDomain, omega, origin):
    w = omega[dom.axis]
    if abs(w) < 1e-12:
        return None
    z = origin[dom.axis]
    iv = [((a - z) / w, (b - z) / w) for a, b in dom.intervals]
    return IntervalUnionDomain(tuple(tuple(sorted(i)) for i in iv))


def _graph_section(dom: BetweenGraphsDomain, omega, origin, samples=4000, xtol=1e-10):
    wx, wy = omega
    if abs(wy) < 1e-12:
        return None
    y0, y1 = dom.y_range
    ta, tb = sorted(((y0 - origin[1]) / wy, (y1 - origin[1]) / wy))
    pad = 1e-9 * max(1.0, tb - ta)
    ta, tb = ta - pad, tb + pad

    def g_lo(t):
        return origin[1] + t * wy - dom.lower_at(origin[0] + t * wx)

    def g_up(t):
        return dom.upper_at(origin[0] + t * wx) - (origin[1] + t * wy)

    t = np.linspace(ta, tb, samples + 1)
    cuts = [ta, tb]
    for g in (g_lo, g_up):
        v = g(t)
        for k in np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]:
            cuts.append(brentq(g, t[k], t[k + 1], xtol=xtol))
        cuts.extend(t[1:-1][v[1:-1] == 0])
    cuts = np.unique(cuts)
    iv = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        mid = 0.5 * (a + b)
        if g_lo(mid) > 0 and g_up(mid) > 0:
            if iv and abs(iv[-1][1] - a) <= xtol:
                iv[-1] = (iv[-1][0], b)
            else:
                iv.append((a, b))
    iv = [i for i in iv if i[1] - i[0] > 10 * xtol]
    return IntervalUnionDomain(tuple(iv)) if iv else None


def ls_sections(domain, direction: float, offsets) -> SectionFamily:
    """Sections t -> x0 + t omega of a planar domain, omega = (cos direction, sin direction).

    The offsets parametrise x0 = offset * nu along the normal
    nu = (-sin, cos).  Directions along which a section can be a whole line
    (parallel to strips, or horizontal for a domain between graphs) are
    flagged ``parallel`` and yield no sections.  Offsets whose line misses
    the domain are flagged ``empty:<index>`` and carry None.
    """
    omega = (math.cos(direction), math.sin(direction))
    nu = (-omega[1], omega[0])
    offsets = tuple(float(o) for o in offsets)
    flags, sections = [], []
    if isinstance(domain, StripsDomain):
        cut = lambda origin: _strip_section(domain, omega, origin)
        parallel = abs(omega[domain.axis]) < 1e-12
    elif isinstance(domain, BetweenGraphsDomain):
        cut = lambda origin: _graph_section(domain, omega, origin)
        parallel = abs(omega[1]) < 1e-12
    else:
        raise TypeError("ls_sections takes a StripsDomain or a BetweenGraphsDomain")
    if parallel:
        return SectionFamily(omega, offsets, [None] * len(offsets), ["parallel"])
    for k, o in enumerate(offsets):
        sec = cut((o * nu[0], o * nu[1]))
        if sec is None:
            flags.append(f"empty:{k}")
        sections.append(sec)
    return SectionFamily(omega, offsets, sections, flags)


@dataclass
class UniformCheck:
    value: float
    bounds: list
    estimates: list
    flags: list

    def __float__(self):
        return float(self.value)


def uniform_poincare_check(family, s: float, p: float, q: float | None = None, grid_n: int | None = None,
                           threads: int = 1) -> UniformCheck:
    """Infimum over sections of the closed-form lower bounds.

    ``family`` is a SectionFamily or a list of them.  A positive value
    certifies the one-dimensional inequality uniformly over the sections.
    The closed-form bounds are for q = p; for another q the infimum of the
    Rayleigh estimates is returned instead and flagged ``upper_estimate``.
    With ``grid_n`` a Rayleigh estimate is computed for every section as well.
    """
    fams = [family] if isinstance(family, SectionFamily) else list(family)
    if not fams:
        raise ValueError("empty family")
    q = p if q is None else float(q)
    sections, flags = [], []
    for fi, fam in enumerate(fams):
        if "parallel" in fam.flags:
            flags.append(f"parallel:{fi}")
            continue
        for k, sec in enumerate(fam.sections):
            if sec is None:
                raise ValueError(f"degenerate section {k} in family {fi}")
            sections.append(sec)
    if not sections:
        raise ValueError("no usable sections")
    bounds = [section_lower_bound(sec, s, p) for sec in sections]
    estimates = []
    if grid_n is not None or q != p:
        g = 64 if grid_n is None else grid_n
        run = lambda sec: rayleigh_estimate(sec, s, p, q, g, restarts=0, cross_check=False).value
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                estimates = list(pool.map(run, sections))
        else:
            estimates = [run(sec) for sec in sections]
    if q == p:
        value = min(bounds)
    else:
        value = min(estimates)
        flags.append("upper_estimate")
    return UniformCheck(float(value), bounds, estimates, flags)
