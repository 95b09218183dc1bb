"""Symmetric decreasing rearrangement of piecewise-linear functions."""

from __future__ import annotations

import numpy as np

from ..constants import surface_measure
from .profiles import PiecewiseFunction1D, RadialProfile, _pieces

__all__ = ["rearrange", "distribution_function"]


def _abs_pieces(u):
    if isinstance(u, PiecewiseFunction1D):
        return _pieces(u.breakpoints, u.values)
    return _pieces(u.radii, u.values)


def distribution_function(u, n: int, levels, strict: bool = True) -> np.ndarray:
    """Lebesgue measure of {|u| > t} (or {|u| >= t}) in R^n for every level t.

    A PiecewiseFunction1D is a function on R (n = 1); a RadialProfile is
    read as a radial function on R^n.  Level sets of a linear piece are
    intervals whose endpoints are found exactly.
    """
    if isinstance(u, PiecewiseFunction1D) and n != 1:
        raise ValueError("a PiecewiseFunction1D lives on R; use n = 1")
    pieces = _abs_pieces(u)
    levels = np.asarray(levels, dtype=float)
    step = max(1, 2_000_000 // max(1, pieces[0].size))
    parts = [_measure_block(u, n, pieces, levels[k : k + step], strict) for k in range(0, levels.size, step)]
    return np.concatenate(parts) if parts else np.zeros(0)


def _measure_block(u, n, pieces, levels, strict):
    a, b, ua, ub = pieces
    t = levels[:, None]
    lo, hi = np.minimum(ua, ub), np.maximum(ua, ub)
    flat = hi == lo
    above = (lo > t) if strict else (lo >= t)
    reach = (hi > t) if strict else (hi >= t)
    slope_span = np.where(flat, 1.0, hi - lo)
    # fraction of the piece, measured from its high end, where |u| exceeds t
    frac = np.where(above, 1.0, np.where(reach, (hi - t) / slope_span, 0.0))
    frac = np.where(flat, np.where(above, 1.0, 0.0), frac)
    high_left = ua >= ub
    r1 = np.where(high_left, a, b - frac * (b - a))
    r2 = np.where(high_left, a + frac * (b - a), b)
    if isinstance(u, PiecewiseFunction1D):
        return (r2 - r1).sum(axis=1)
    return surface_measure(n) / n * (r2**n - r1**n).sum(axis=1)


def rearrange(u, n: int, refine: int | None = None) -> RadialProfile:
    """Schwarz symmetrization u* as a monotone radial profile on R^n.

    Nodes are placed at every nodal level of |u|; the radius of a level t is
    the radius of the ball with the same measure as {|u| > t}.  For n = 1
    the result is exact.  For n >= 2 the true u* is not piecewise linear in
    r between nodal levels, so ``refine`` extra levels (default 16) are
    inserted in each gap.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    values = u.values
    levels = np.unique(np.abs(values))
    top = levels[-1]
    if top == 0.0:
        return RadialProfile(np.array([0.0, 1.0]), np.zeros(2), monotone=True)
    if refine is None:
        refine = 0 if n == 1 else 16
    if refine > 0:
        frac = np.arange(1, refine + 1) / (refine + 1)
        extra = (levels[:-1, None] + frac[None, :] * np.diff(levels)[:, None]).ravel()
        levels = np.unique(np.concatenate((levels, extra)))
    levels = levels[::-1]  # decreasing, so radii increase
    omega = surface_measure(n)
    mu_gt = distribution_function(u, n, levels, strict=True)
    mu_ge = distribution_function(u, n, levels[:-1], strict=False)  # skip t = 0
    radius = lambda mu: (n * mu / omega) ** (1.0 / n)
    r = np.empty(2 * levels.size - 1)
    v = np.empty_like(r)
    r[0::2] = radius(mu_gt)
    v[0::2] = levels
    r[1::2] = radius(mu_ge)
    v[1::2] = levels[:-1]
    # a node pair only differs on plateaus of |u|
    order = np.argsort(r, kind="stable")
    r, v = r[order], v[order]
    keep = np.concatenate(([True], np.diff(r) > 0))
    r, v = r[keep], v[keep]
    r[0] = 0.0
    v[-1] = 0.0
    v = np.minimum.accumulate(v)
    return RadialProfile(r, v, monotone=True)
