"""Moser-type functionals of radial candidates and the scalings that relate them.

All integrals are accumulated in log space: each quadrature node contributes
log(weight) + log f(|u|) + log Psi_k(alpha |u|^q), and the sum is a
log-sum-exp.  Values whose logarithm exceeds ``OVERFLOW_EXPONENT`` are
reported through ``log_value`` only.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, roots_legendre

from .constants import CriticalParams, alpha_star, ball_volume, log_truncated_exp, surface_measure
from .funcspace import (
    QuadratureError,
    QuadratureSpec,
    RadialProfile,
    dilate,
    even_extension,
    gagliardo_1d,
    gagliardo_radial,
    lq_norm,
    moser_profile,
)

__all__ = [
    "WeightSpec",
    "FunctionalReport",
    "TakahashiReport",
    "ScanRow",
    "NORMALIZATIONS",
    "OVERFLOW_EXPONENT",
    "seminorm_p",
    "moser_functional",
    "normalize_fa1",
    "fa_candidate_value",
    "fb_candidate_value",
    "fb_rescale",
    "takahashi_transform",
    "takahashi_ratio",
    "onofri_gap",
    "blowup_scan",
    "write_scan_csv",
    "elementary_limit_gap",
]

OVERFLOW_EXPONENT = 700.0
NORMALIZATIONS = ("seminorm_ball", "full_norm_ball", "lp_normalized")
_GL_T, _GL_W = roots_legendre(8)
_GL_T = 0.5 * (1.0 + _GL_T)
_GL_W = 0.5 * _GL_W


@dataclass(frozen=True)
class WeightSpec:
    """Weight f in {1, t, log(1 + t)}."""

    kind: str = "one"

    def __post_init__(self):
        if self.kind not in ("one", "identity", "log1p"):
            raise ValueError(f"unknown weight {self.kind!r}; use one, identity or log1p")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "one":
            return np.ones_like(t)
        if self.kind == "identity":
            return t
        return np.log1p(t)

    def log(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            if self.kind == "one":
                return np.zeros_like(t)
            if self.kind == "identity":
                return np.log(t)
            return np.log(np.log1p(t))


@dataclass(frozen=True)
class FunctionalReport:
    alpha: float
    k: int
    value: float
    normalization: str
    candidate_id: str = ""
    log_value: float = -math.inf
    overflow: bool = False

    @property
    def log10_value(self) -> float:
        return self.log_value / math.log(10.0)


def seminorm_p(u: RadialProfile, params: CriticalParams, quad: QuadratureSpec | None = None) -> float:
    """[u]^p on R^n of a radial profile (even extension on the line when n = 1)."""
    quad = quad or QuadratureSpec()
    if params.n == 1:
        return gagliardo_1d(even_extension(u), params.s, params.p, quad)
    return gagliardo_radial(u, params, quad)


def _log_integral(u: RadialProfile, n: int, log_integrand, radius=None):
    """log of omega int_0^R r^(n-1) g(u(r)) dr, g given through log g; cells are cut at ``radius``."""
    r, v = u.radii, u.values
    if radius is not None and radius < r[-1]:
        keep = r < radius
        r = np.append(r[keep], radius)
        v = np.append(v[keep], u(radius))
    a, h = r[:-1], np.diff(r)
    nodes = a[:, None] + h[:, None] * _GL_T
    vals = v[:-1, None] + (v[1:] - v[:-1])[:, None] * _GL_T
    with np.errstate(divide="ignore"):
        logw = np.log(surface_measure(n) * h[:, None] * _GL_W) + (n - 1) * np.log(nodes)
    terms = logw + log_integrand(np.abs(vals))
    if np.all(np.isneginf(terms)):
        return -math.inf
    return float(logsumexp(terms))


def _add_log(a, b):
    return float(np.logaddexp(a, b))


def _report(log_value, alpha, k, normalization, candidate_id):
    overflow = log_value > OVERFLOW_EXPONENT
    value = math.inf if overflow else (math.exp(log_value) if log_value > -math.inf else 0.0)
    return FunctionalReport(alpha, k, value, normalization, candidate_id, log_value, overflow)


def _log_moser(u, alpha, k, params, weight, domain_radius):
    q = params.p / (params.p - 1.0)
    n = params.n

    def log_integrand(t):
        z = alpha * t**q
        return weight.log(t) + (z if k == 0 else log_truncated_exp(k, z))

    total = _log_integral(u, n, log_integrand, domain_radius)
    if domain_radius is not None and domain_radius > u.support_radius:
        # u = 0 on the rest of the ball: f(0) Psi_k(0) is 0 unless k = 0 and f(0) > 0
        f0 = float(weight(0.0))
        if k == 0 and f0 > 0:
            shell = ball_volume(n, domain_radius) - ball_volume(n, u.support_radius)
            total = _add_log(total, math.log(f0 * shell))
    return total


def moser_functional(u: RadialProfile, alpha: float, k: int, params: CriticalParams,
                     weight: WeightSpec | None = None, domain_radius: float | None = None,
                     candidate_id: str = "", normalization: str = "seminorm_ball") -> FunctionalReport:
    """int f(|u|) Psi_k(alpha |u|^(p/(p-1))) over R^n, or over the ball B(0, domain_radius).

    ``k = 0`` gives the plain exponential and is only meaningful on a ball.
    """
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    if int(k) != k or k < 0 or (k == 0 and domain_radius is None):
        raise ValueError("k must be an integer >= 1 (k = 0 only on a bounded ball)")
    if domain_radius is not None and not domain_radius > 0:
        raise ValueError("domain_radius must be > 0")
    weight = weight or WeightSpec()
    log_value = _log_moser(u, alpha, int(k), params, weight, domain_radius)
    return _report(log_value, alpha, int(k), normalization, candidate_id)


def normalize_fa1(u: RadialProfile, params: CriticalParams) -> RadialProfile:
    """u(l x) with l^n = ||u||_p^p, so the result has unit L^p norm and the same seminorm."""
    norm_p = lq_norm(u, params.p, params.n) ** params.p
    if norm_p == 0.0:
        raise ValueError("cannot normalise the zero function")
    ell = norm_p ** (1.0 / params.n)
    return dilate(u, ell)


def _check_constraint(value, bound, tol, what):
    if value > bound + tol:
        raise ValueError(f"{what} = {value:.6g} exceeds {bound:.6g} + {tol:g}")


def fa_candidate_value(u: RadialProfile, alpha: float, params: CriticalParams, quad: QuadratureSpec | None = None,
                       tol: float = 1e-3, candidate_id: str = "") -> FunctionalReport:
    """Psi-functional of u divided by ||u||_p^p, for a candidate with [u]^p <= 1."""
    semi = seminorm_p(u, params, quad)
    _check_constraint(semi, 1.0, tol, "[u]^p")
    norm_p = lq_norm(u, params.p, params.n) ** params.p
    if norm_p == 0.0:
        raise ValueError("the zero function has no L^p normalisation")
    k = params.k_default
    log_value = _log_moser(u, alpha, k, params, WeightSpec(), None) - math.log(norm_p)
    return _report(log_value, alpha, k, "lp_normalized", candidate_id)


def fb_candidate_value(u: RadialProfile, alpha: float, params: CriticalParams, ell_weight: float = 1.0,
                       quad: QuadratureSpec | None = None, tol: float = 1e-3,
                       candidate_id: str = "") -> FunctionalReport:
    """int Psi(alpha |u|^q) for a candidate with ell ||u||_p^p + [u]^p <= 1."""
    if not ell_weight > 0:
        raise ValueError("ell_weight must be > 0")
    if np.any(u.values):
        constraint = ell_weight * lq_norm(u, params.p, params.n) ** params.p + seminorm_p(u, params, quad)
        _check_constraint(constraint, 1.0, tol, "weighted full norm")
    k = params.k_default
    log_value = _log_moser(u, alpha, k, params, WeightSpec(), None)
    return _report(log_value, alpha, k, "full_norm_ball", candidate_id)


def fb_rescale(u: RadialProfile, ell: float, params: CriticalParams) -> RadialProfile:
    """x -> u(ell^(-1/n) x): turns the constraint ell ||u||_p^p + [u]^p into the unweighted one."""
    if not ell > 0:
        raise ValueError("ell must be > 0")
    return dilate(u, ell ** (-1.0 / params.n))


# ---------------------------------------------------------------------------
# Takahashi scaling


@dataclass(frozen=True)
class TakahashiReport:
    C: float
    ell: float
    Cp: float
    ell_n: float
    lp_norm_p_v: float
    seminorm_p_v: float
    full_norm_p_v: float
    predicted_full_norm_p: float
    norm_ok: bool
    lhs: float
    rhs: float
    log_lhs: float
    log_rhs: float
    value_rel_err: float
    value_ok: bool


def takahashi_ratio(alpha: float, alpha_eps: float, p: float) -> float:
    """(a/a_eps)^(p-1) / (1 - (a/a_eps)^(p-1)), the factor relating the two suprema."""
    cp = (alpha / alpha_eps) ** (p - 1.0)
    return cp / (1.0 - cp)


def takahashi_transform(u: RadialProfile, alpha: float, alpha_eps: float, params: CriticalParams,
                        quad: QuadratureSpec | None = None, tol: float = 1e-3):
    """v(x) = C u(l x) with C^p = (alpha/alpha_eps)^(p-1) and l^n = C^p / (1 - C^p)."""
    if not 0 < alpha < alpha_eps:
        raise ValueError("need 0 < alpha < alpha_eps")
    p, n = params.p, params.n
    Cp = (alpha / alpha_eps) ** (p - 1.0)
    ell_n = Cp / (1.0 - Cp)
    ell = ell_n ** (1.0 / n)
    if not (ell_n > 0 and ell > 0 and math.isfinite(ell)):
        raise ValueError("l^n underflows for this alpha; the scaling is degenerate")
    norm_u = lq_norm(u, p, n) ** p
    semi_u = seminorm_p(u, params, quad)
    _check_constraint(abs(norm_u - 1.0), 0.0, tol, "| ||u||_p^p - 1 |")
    _check_constraint(semi_u, 1.0, tol, "[u]^p")
    C = Cp ** (1.0 / p)
    v = dilate(u, ell).scaled(C)
    norm_v = lq_norm(v, p, n) ** p
    semi_v = seminorm_p(v, params, quad)
    full = norm_v + semi_v
    predicted = Cp * (norm_u / ell_n + semi_u)
    k = params.k_default
    log_lhs = _log_moser(u, alpha, k, params, WeightSpec(), None) - math.log(ell_n)
    log_rhs = _log_moser(v, alpha_eps, k, params, WeightSpec(), None)
    rel = abs(math.expm1(log_rhs - log_lhs)) if math.isfinite(log_lhs) else 0.0
    report = TakahashiReport(
        C=C,
        ell=ell,
        Cp=Cp,
        ell_n=ell_n,
        lp_norm_p_v=norm_v,
        seminorm_p_v=semi_v,
        full_norm_p_v=full,
        predicted_full_norm_p=predicted,
        norm_ok=bool(full <= 1.0 + tol),
        lhs=math.exp(log_lhs) if log_lhs < OVERFLOW_EXPONENT else math.inf,
        rhs=math.exp(log_rhs) if log_rhs < OVERFLOW_EXPONENT else math.inf,
        log_lhs=log_lhs,
        log_rhs=log_rhs,
        value_rel_err=rel,
        value_ok=bool(rel <= tol),
    )
    return v, report


# ---------------------------------------------------------------------------
# Onofri-type gap


def onofri_gap(u: RadialProfile, lam: float, domain_radius: float, params: CriticalParams,
               alpha: float | None = None, quad: QuadratureSpec | None = None) -> float:
    """(1/p)[u]^p - lam log( |B|^-1 int_B e^u ), B the ball of radius ``domain_radius``.

    ``lam`` must not exceed (p alpha / (p-1))^(p-1) for the configured
    alpha < alpha* (default 0.99 alpha*).
    """
    if u.support_radius > domain_radius * (1 + 1e-12):
        raise ValueError("u must be supported in the ball")
    a_star = alpha_star(params)
    alpha = 0.99 * a_star if alpha is None else alpha
    if not 0 < alpha < a_star:
        raise ValueError("alpha must lie in (0, alpha*)")
    p = params.p
    cap = (p * alpha / (p - 1.0)) ** (p - 1.0)
    if not 0 <= lam <= cap:
        raise ValueError(f"lambda must lie in [0, {cap:.6g}]")
    if not np.any(u.values):
        return 0.0
    semi = seminorm_p(u, params, quad)
    if lam == 0:
        return semi / p
    n = params.n
    vol = ball_volume(n, domain_radius)
    log_int = _log_integral_signed(u, n)
    rest = vol - ball_volume(n, u.support_radius)
    if rest > 0:
        log_int = _add_log(log_int, math.log(rest))
    return semi / p - lam * (log_int - math.log(vol))


def _log_integral_signed(u: RadialProfile, n: int) -> float:
    r, v = u.radii, u.values
    a, h = r[:-1], np.diff(r)
    nodes = a[:, None] + h[:, None] * _GL_T
    vals = v[:-1, None] + (v[1:] - v[:-1])[:, None] * _GL_T
    with np.errstate(divide="ignore"):
        logw = np.log(surface_measure(n) * h[:, None] * _GL_W) + (n - 1) * np.log(nodes)
    return float(logsumexp(logw + vals))


# ---------------------------------------------------------------------------
# blow-up scan


@dataclass(frozen=True)
class ScanRow:
    eps: float
    seminorm_p: float
    lp_norm_p: float
    value: float
    inner_ball: float
    log_value: float = -math.inf
    error: str = ""

    @property
    def overflow(self) -> bool:
        return self.log_value > OVERFLOW_EXPONENT


def _scan_row(eps, alpha, a_star, weight, params, normalization, domain_radius, nodes, quad, k):
    n, p, s = params.n, params.p, params.s
    q = p / (p - 1.0)
    u = moser_profile(params, eps, nodes)
    try:
        semi = seminorm_p(u, params, quad)
    except QuadratureError as exc:
        return ScanRow(eps, math.nan, math.nan, math.nan, math.nan, math.nan, str(exc))
    lp = lq_norm(u, p, n) ** p
    scale = semi if normalization != "full_norm_ball" else semi + lp
    v = u.scaled(scale ** (-1.0 / p))
    log_value = _log_moser(v, alpha, k, params, weight, domain_radius)
    if normalization == "lp_normalized":
        log_value -= math.log(lp / semi)
    top = math.log(1.0 / eps) ** ((n - s) / n)
    log_inner = math.log(ball_volume(n, eps)) + a_star * (top / semi ** (1.0 / p)) ** q
    inner = math.exp(log_inner) if log_inner < OVERFLOW_EXPONENT else math.inf
    value = math.exp(log_value) if log_value <= OVERFLOW_EXPONENT else math.inf
    return ScanRow(eps, semi, lp, value, inner, log_value)


def blowup_scan(alpha_frac: float, weight: WeightSpec, eps_grid, params: CriticalParams,
                normalization: str = "seminorm_ball", domain_radius: float | None = None,
                nodes: int = 400, quad: QuadratureSpec | None = None, k: int | None = None,
                threads: int = 1) -> list[ScanRow]:
    """Evaluate the Moser sequence u_eps along a decreasing eps grid.

    Each row holds [u_eps]^p, ||u_eps||_p^p, the functional at
    alpha = alpha_frac * alpha* of the normalised candidate, and the
    inner-ball integral of exp(alpha* (u_eps / [u_eps])^q) over |x| < eps.
    On a ball (``domain_radius``) the functional is int f(|v|) e^(alpha |v|^q)
    unless ``k`` is given; on R^n it is int f(|v|) Psi_k(alpha |v|^q) with
    k = ceil(p - 1) by default.
    Normalisations: v = u/[u] (seminorm_ball), v = u/||u||_{W^{s,p}}
    (full_norm_ball), or v = u/[u] with the value divided by ||v||_p^p
    (lp_normalized).
    """
    if not 0 < alpha_frac <= 1.2:
        raise ValueError("alpha_frac must lie in (0, 1.2]")
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    eps_grid = [float(e) for e in eps_grid]
    if any(b >= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise ValueError("eps_grid must be strictly decreasing")
    if k is None:
        k = 0 if domain_radius is not None else params.k_default
    if domain_radius is not None and domain_radius < 1.0:
        raise ValueError("the Moser profiles are supported in the unit ball; domain_radius must be >= 1")
    a_star = alpha_star(params)
    alpha = alpha_frac * a_star
    args = (alpha, a_star, weight, params, normalization, domain_radius, nodes, quad, k)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda e: _scan_row(e, *args), eps_grid))
    return [_scan_row(e, *args) for e in eps_grid]


SCAN_HEADER = ("eps", "seminorm_p", "lp_norm_p", "value", "inner_ball")


def write_scan_csv(rows, fh=None) -> str:
    """CSV with a trailing log10_value column whenever some row overflowed."""
    overflow = any(r.overflow for r in rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_HEADER + (("log10_value",) if overflow else ()))
    for r in rows:
        row = [repr(r.eps), repr(r.seminorm_p), repr(r.lp_norm_p), repr(r.value), repr(r.inner_ball)]
        if overflow:
            row.append(repr(r.log_value / math.log(10.0)))
        w.writerow(row)
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def elementary_limit_gap(t, C: float, p: float):
    """t / (1 + C/t)^(1/(p-1)) - t + C/(p-1), which tends to 0 as t grows."""
    t = np.asarray(t, dtype=float)
    return t / (1.0 + C / t) ** (1.0 / (p - 1.0)) - t + C / (p - 1.0)
