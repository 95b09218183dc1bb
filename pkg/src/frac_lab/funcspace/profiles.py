"""Piecewise-linear function representations and their L^q norms."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from ..constants import CriticalParams, surface_measure

__all__ = [
    "RadialProfile",
    "PiecewiseFunction1D",
    "moser_profile",
    "lq_norm",
    "lq_integral",
    "dilate",
    "translate_dilate",
    "even_extension",
    "read_profile_csv",
    "write_profile_csv",
    "read_function_csv",
    "write_function_csv",
]


def _as_grid(x, name):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError(f"{name} must be a 1-d array with at least two entries")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} must be finite")
    if np.any(np.diff(x) <= 0):
        raise ValueError(f"{name} must be strictly increasing")
    return x


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Radial function u(|x|), piecewise linear in r and zero past the last radius.

    ``radii`` start at 0 and the last value is 0, so the function is
    continuous on R^n. ``center`` only records a translation; every quantity
    computed here is translation invariant.
    """

    radii: np.ndarray
    values: np.ndarray
    monotone: bool = False
    center: tuple | None = field(default=None)

    def __post_init__(self):
        r = _as_grid(self.radii, "radii")
        v = np.asarray(self.values, dtype=float)
        if v.shape != r.shape:
            raise ValueError("radii and values must have the same length")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        if r[0] != 0.0:
            raise ValueError("radii must start at 0")
        if v[-1] != 0.0:
            raise ValueError("the last value must be 0 (compact support)")
        if self.monotone and np.any(np.diff(v) > 0):
            raise ValueError("profile flagged monotone but values increase somewhere")
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "values", v)

    @property
    def support_radius(self) -> float:
        return float(self.radii[-1])

    def __call__(self, r):
        return np.interp(np.abs(np.asarray(r, dtype=float)), self.radii, self.values, right=0.0)

    def scaled(self, factor: float) -> "RadialProfile":
        return RadialProfile(self.radii, factor * self.values, self.monotone and factor >= 0, self.center)

    def is_nonincreasing(self) -> bool:
        return bool(np.all(np.diff(self.values) <= 0))


@dataclass(frozen=True, eq=False)
class PiecewiseFunction1D:
    """Continuous piecewise-linear function on R, zero outside [x_0, x_m]."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = _as_grid(self.breakpoints, "breakpoints")
        v = np.asarray(self.values, dtype=float)
        if v.shape != x.shape:
            raise ValueError("breakpoints and values must have the same length")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        if v[0] != 0.0 or v[-1] != 0.0:
            raise ValueError("values at the first and last breakpoint must be 0")
        object.__setattr__(self, "breakpoints", x)
        object.__setattr__(self, "values", v)

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.breakpoints, self.values, left=0.0, right=0.0)

    def scaled(self, factor: float) -> "PiecewiseFunction1D":
        return PiecewiseFunction1D(self.breakpoints, factor * self.values)


def even_extension(u: RadialProfile) -> PiecewiseFunction1D:
    """The even function on R whose restriction to [0, inf) is ``u``."""
    r, v = u.radii, u.values
    x = np.concatenate((-r[:0:-1], r))
    y = np.concatenate((v[:0:-1], v))
    return PiecewiseFunction1D(x, y)


def moser_profile(params: CriticalParams, eps: float, nodes: int = 400) -> RadialProfile:
    """Moser test function concentrated at the origin.

    u = |log eps|^((n-s)/n) on [0, eps], |log r| / |log eps|^(s/n) on
    (eps, 1) and 0 from r = 1 on; the log part is sampled on a log-spaced
    grid with ``nodes`` points.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if nodes < 200:
        raise ValueError("the log part needs at least 200 nodes")
    n, s = params.n, params.s
    L = -math.log(eps)
    r = np.concatenate(([0.0], np.geomspace(eps, 1.0, nodes)))
    v = np.empty_like(r)
    v[0] = L ** ((n - s) / n)
    v[1:] = -np.log(r[1:]) / L ** (s / n)
    v[1] = v[0]
    v[-1] = 0.0
    return RadialProfile(r, v, monotone=True)


# ---------------------------------------------------------------------------
# L^q integrals of piecewise-linear functions


def _pieces(x, v):
    """Split cells at sign changes; returns (a, b, ua, ub) with ua*ub >= 0."""
    a, b, ua, ub = x[:-1], x[1:], v[:-1], v[1:]
    cross = ua * ub < 0
    if np.any(cross):
        t = ua[cross] / (ua[cross] - ub[cross])
        root = a[cross] + t * (b[cross] - a[cross])
        a = np.concatenate((a[~cross], a[cross], root))
        b = np.concatenate((b[~cross], root, b[cross]))
        ua = np.concatenate((ua[~cross], ua[cross], np.zeros(root.size)))
        ub = np.concatenate((ub[~cross], np.zeros(root.size), ub[cross]))
    keep = (ua != 0) | (ub != 0)
    return a[keep], b[keep], np.abs(ua[keep]), np.abs(ub[keep])


def _anchored(r0, h, c, q, power, nodes):
    # int_0^1 (c t)^q (r0 + h t)^power h dt; exact for polynomial weights
    t, w = roots_jacobi(nodes, 0.0, q)
    t = 0.5 * (1 + t)
    w = w * 0.5 ** (q + 1)
    rr = r0[:, None] + h[:, None] * t[None, :]
    return (c**q) * h * ((rr**power) * w[None, :]).sum(axis=1)


def lq_integral(x, v, q: float, power: int = 0) -> float:
    """int |u(r)|^q r^power dr for the piecewise-linear u through (x, v)."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    a, b, ua, ub = _pieces(x, v)
    if a.size == 0:
        return 0.0
    h = b - a
    jac_nodes = power // 2 + 2
    total = np.zeros(a.size)

    lo, hi = np.minimum(ua, ub), np.maximum(ua, ub)
    # pieces touching zero: anchor at the zero end
    zero_end = lo == 0
    far = ~zero_end & (lo >= 0.5 * hi)
    near = ~zero_end & ~far

    if np.any(zero_end):
        i = zero_end
        left_zero = ua[i] == 0
        # t measured from the zero end
        r0 = np.where(left_zero, a[i], b[i])
        hh = np.where(left_zero, h[i], -h[i])
        total[i] = np.abs(_anchored(r0, hh, hi[i], q, power, jac_nodes))
    if np.any(far):
        t, w = roots_legendre(20)
        t = 0.5 * (1 + t)
        w = 0.5 * w
        i = far
        rr = a[i][:, None] + h[i][:, None] * t
        uu = ua[i][:, None] + (ub[i] - ua[i])[:, None] * t
        total[i] = h[i] * ((uu**q) * rr**power * w).sum(axis=1)
    if np.any(near):
        # extend linearly to the root outside the cell and subtract
        i = near
        slope = (ub[i] - ua[i]) / h[i]
        root = a[i] - ua[i] / slope
        to_b = _anchored(root, b[i] - root, ub[i], q, power, jac_nodes)
        to_a = _anchored(root, a[i] - root, ua[i], q, power, jac_nodes)
        total[i] = np.abs(to_b - to_a)
    return math.fsum(total.tolist())


def lq_norm(u, q: float, n: int = 1) -> float:
    """L^q(R^n) norm of a radial profile (or of a 1-d function when n = 1)."""
    if not q >= 1:
        raise ValueError(f"q must be >= 1, got {q}")
    if isinstance(u, PiecewiseFunction1D):
        if n != 1:
            raise ValueError("a PiecewiseFunction1D lives on R; use n = 1")
        return lq_integral(u.breakpoints, u.values, q) ** (1.0 / q)
    integral = surface_measure(n) * lq_integral(u.radii, u.values, q, power=n - 1)
    return integral ** (1.0 / q)


# ---------------------------------------------------------------------------
# dilations


def dilate(u, ell: float):
    """x -> u(ell x)."""
    if not ell > 0:
        raise ValueError(f"ell must be > 0, got {ell}")
    if isinstance(u, RadialProfile):
        return RadialProfile(u.radii / ell, u.values, u.monotone, u.center)
    return PiecewiseFunction1D(u.breakpoints / ell, u.values)


def translate_dilate(u, x0, ell: float):
    """x -> u((x - x0) / ell)."""
    if not ell > 0:
        raise ValueError(f"ell must be > 0, got {ell}")
    if isinstance(u, RadialProfile):
        center = tuple(np.atleast_1d(np.asarray(x0, dtype=float)).tolist())
        return RadialProfile(u.radii * ell, u.values, u.monotone, center)
    return PiecewiseFunction1D(u.breakpoints * ell + float(x0), u.values)


# ---------------------------------------------------------------------------
# CSV formats


def write_profile_csv(u: RadialProfile, fh=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "value"])
    for r, v in zip(u.radii, u.values):
        w.writerow([repr(float(r)), repr(float(v))])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def _read_two_columns(fh, header):
    rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != list(header):
        raise ValueError(f"expected header {','.join(header)}")
    data = np.array([[float(c) for c in row] for row in rows[1:] if row], dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError("expected two numeric columns")
    return data[:, 0], data[:, 1]


def read_profile_csv(fh) -> RadialProfile:
    r, v = _read_two_columns(fh, ("r", "value"))
    return RadialProfile(r, v)


def write_function_csv(u: PiecewiseFunction1D, fh=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "value"])
    for x, v in zip(u.breakpoints, u.values):
        w.writerow([repr(float(x)), repr(float(v))])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def read_function_csv(fh) -> PiecewiseFunction1D:
    x, v = _read_two_columns(fh, ("x", "value"))
    return PiecewiseFunction1D(x, v)
