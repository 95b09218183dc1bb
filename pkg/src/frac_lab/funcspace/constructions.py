"""Explicit constructions behind the whole-space Moser-Trudinger argument.

A radially decreasing u is split at a radius r0 into the truncation
v = (u - u(r0)) on B(0, r0), whose seminorm does not exceed that of u, and
a bounded remainder.  The pointwise bound

    u^q <= v^q (1 + beta ||u||^p) + C,     q = n / (n - s),

with the norm taken in L^{kp/(p-1)}, follows from
(a + b)^q <= a^q + q 2^(q-1) (a^(q-1) b + b^q) and Young's inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..constants import CriticalParams, surface_measure
from .profiles import RadialProfile, even_extension, lq_norm
from .quadrature import QuadratureSpec
from .seminorm import gagliardo_1d, gagliardo_radial

__all__ = [
    "DecayReport",
    "TruncationReport",
    "radial_decay_check",
    "radial_decay_bound",
    "truncation_beta",
    "truncation_split",
    "split_radius",
    "critical_point_t2",
    "elementary_inequality_gap",
]


@dataclass(frozen=True)
class DecayReport:
    holds: bool
    min_slack: float
    max_ratio: float
    worst_radius: float
    norm: float


@dataclass(frozen=True)
class TruncationReport:
    r0: float
    u_at_r0: float
    seminorm_u: float
    seminorm_v: float
    seminorm_ok: bool
    beta: float
    C: float
    k: int
    norm_p: float
    pointwise_max_excess: float
    pointwise_ok: bool


def _decay_exponents(params, k):
    n, p = params.n, params.p
    norm_exp = k * p / (p - 1.0)
    return norm_exp, (p - 1.0) / (k * p), n * (p - 1.0) / (k * p)


def radial_decay_bound(u: RadialProfile, k: int, params: CriticalParams, r):
    """(n/omega)^((p-1)/(kp)) ||u||_{kp/(p-1)} r^(-n(p-1)/(kp))."""
    norm_exp, c_exp, r_exp = _decay_exponents(params, k)
    norm = lq_norm(u, norm_exp, params.n)
    factor = (params.n / surface_measure(params.n)) ** c_exp * norm
    return factor * np.asarray(r, dtype=float) ** -r_exp, norm


def radial_decay_check(u: RadialProfile, k: int, params: CriticalParams, rtol: float = 1e-9) -> DecayReport:
    """Check the pointwise decay bound of a nonnegative decreasing radial function at its grid radii."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not u.is_nonincreasing() or np.any(u.values < 0):
        raise ValueError("radial_decay_check needs a nonnegative nonincreasing profile")
    r = u.radii[1:]
    bound, norm = radial_decay_bound(u, k, params, r)
    vals = u.values[1:]
    slack = bound - vals
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(bound > 0, vals / bound, 0.0)
    worst = int(np.argmin(slack))
    holds = bool(np.all(vals <= bound * (1.0 + rtol)))
    return DecayReport(holds, float(slack[worst]), float(ratio.max()), float(r[worst]), norm)


def truncation_beta(params: CriticalParams, k: int, r0: float) -> float:
    """beta = n^((p-1)/k) 2^(1/(p-1)) / ((p-1) omega^((p-1)/k) r0^(n(p-1)/k))."""
    n, p = params.n, params.p
    e = (p - 1.0) / k
    return n**e * 2.0 ** (1.0 / (p - 1.0)) / ((p - 1.0) * surface_measure(n) ** e * r0 ** (n * e))


def critical_point_t2(theta: float, params: CriticalParams, k: int, r0: float) -> float:
    """Interior critical point ((1+theta) sigma beta - 1) / (beta (1 + sigma)), sigma = (n-s)/s."""
    sigma = (params.n - params.s) / params.s
    beta = truncation_beta(params, k, r0)
    return ((1.0 + theta) * sigma * beta - 1.0) / (beta * (1.0 + sigma))


def split_radius(theta: float, params: CriticalParams, k: int | None = None) -> float:
    """Smallest r0 with r0^n > n (1+theta)^(k/(p-1)) 2^(k/(p-1)^2) / omega, times 1.01."""
    if not theta > 0:
        raise ValueError("theta must be > 0")
    k = params.k_default if k is None else int(k)
    n, p = params.n, params.p
    rn = n * (1.0 + theta) ** (k / (p - 1.0)) * 2.0 ** (k / (p - 1.0) ** 2) / surface_measure(n)
    return 1.01 * rn ** (1.0 / n)


def elementary_inequality_gap(a, b, q):
    """a^q + q 2^(q-1) (a^(q-1) b + b^q) - (a + b)^q, nonnegative for a, b >= 0 and q >= 1."""
    a, b, q = (np.asarray(t, dtype=float) for t in (a, b, q))
    return a**q + q * 2.0 ** (q - 1.0) * (a ** (q - 1.0) * b + b**q) - (a + b) ** q


def _truncate(u: RadialProfile, r0: float) -> tuple[RadialProfile, float]:
    if r0 >= u.support_radius:
        return u, 0.0
    level = float(u(r0))
    inside = u.radii < r0
    r = np.append(u.radii[inside], r0)
    v = np.append(u.values[inside] - level, 0.0)
    return RadialProfile(r, v, monotone=True, center=u.center), level


def truncation_split(u: RadialProfile, r0: float, params: CriticalParams, k: int | None = None,
                     quad: QuadratureSpec | None = None, rtol: float = 1e-9):
    """Return v = (u - u(r0)) 1_{|x| <= r0} and a report on the two inequalities it satisfies."""
    if not r0 > 0:
        raise ValueError("r0 must be > 0")
    if not u.is_nonincreasing():
        raise ValueError("truncation_split needs a nonincreasing profile")
    k = params.k_default if k is None else int(k)
    v, b = _truncate(u, r0)

    quad = quad or QuadratureSpec()
    if params.n == 1:
        semi = lambda f: gagliardo_1d(even_extension(f), params.s, params.p, quad)
    else:
        semi = lambda f: gagliardo_radial(f, params, quad)
    su = semi(u)
    sv = semi(v) if v is not u else su

    n, p = params.n, params.p
    q = params.q
    beta = truncation_beta(params, k, r0)
    norm_p = lq_norm(u, k * p / (p - 1.0), n) ** p
    delta = beta * norm_p
    # q 2^(q-1) v^(q-1) b <= (lam^p / p) v^q + (q 2^(q-1) b / lam)^q / q with lam^p / p = delta
    A = q * 2.0 ** (q - 1.0)
    if b == 0.0:
        C = 0.0
    elif delta == 0.0:
        C = math.inf
    else:
        lam = (p * delta) ** (1.0 / p)
        C = A * b**q + (A * b / lam) ** q / q

    uu = np.append(u.values, u(r0))
    vv = np.maximum(uu - b, 0.0)
    lhs = uu**q
    rhs = vv**q * (1.0 + delta) + C
    excess = float(np.max(lhs - rhs)) if np.isfinite(C) else -math.inf
    scale = max(1.0, float(np.max(lhs)))
    report = TruncationReport(
        r0=float(r0),
        u_at_r0=b,
        seminorm_u=su,
        seminorm_v=sv,
        seminorm_ok=bool(sv <= su * (1.0 + max(rtol, quad.target_rel_err))),
        beta=beta,
        C=C,
        k=k,
        norm_p=norm_p,
        pointwise_max_excess=excess,
        pointwise_ok=bool(excess <= rtol * scale),
    )
    return v, report
