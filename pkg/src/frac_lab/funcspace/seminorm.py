"""Gagliardo seminorms of piecewise-linear and radial functions."""

from __future__ import annotations

import numpy as np

from ..constants import CriticalParams
from .profiles import PiecewiseFunction1D, RadialProfile
from .quadrature import LineMesh, LineModel, QuadratureError, QuadratureSpec, RadialModel, energy_with_error

__all__ = ["gagliardo_1d", "gagliardo_radial", "line_mesh", "radial_mesh"]


def _check_sp(s, p):
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    if not p >= 1.0:
        raise ValueError(f"p must be >= 1, got {p}")


def _padded(x, v, tail_radius, symmetric):
    if tail_radius is None:
        return x, v
    reach = max(abs(x[0]), abs(x[-1])) if symmetric else x[-1]
    if not tail_radius > reach:
        raise ValueError(f"tail_radius {tail_radius} must exceed the support radius {reach}")
    if symmetric:
        x = np.concatenate(([-tail_radius], x, [tail_radius]))
        v = np.concatenate(([0.0], v, [0.0]))
    else:
        x = np.append(x, tail_radius)
        v = np.append(v, 0.0)
    return x, v


def line_mesh(u: PiecewiseFunction1D, quad: QuadratureSpec) -> LineMesh:
    x, v = _padded(u.breakpoints, u.values, quad.tail_radius, True)
    return LineMesh([(x, v)], min_cells=quad.cells_per_dim)


def radial_mesh(u: RadialProfile, quad: QuadratureSpec) -> LineMesh:
    x, v = _padded(u.radii, u.values, quad.tail_radius, False)
    return LineMesh([(x, v)], min_cells=quad.cells_per_dim, open_left=True)


def _finish(value, error, quad, with_error):
    if error > quad.target_rel_err * abs(value):
        raise QuadratureError(
            f"estimated relative error {error / abs(value):.3e} exceeds {quad.target_rel_err:.1e}",
            value=value,
            error=error,
        )
    return (value, error) if with_error else value


def gagliardo_1d(u: PiecewiseFunction1D, s: float, p: float, quad: QuadratureSpec | None = None, *, with_error=False):
    """p-th power of the W^{s,p}(R) seminorm of a piecewise-linear function.

    Raises QuadratureError when the estimated relative error exceeds
    ``quad.target_rel_err``.
    """
    _check_sp(s, p)
    quad = quad or QuadratureSpec()
    if not np.any(u.values):
        return (0.0, 0.0) if with_error else 0.0
    mesh = line_mesh(u, quad)
    value, error = energy_with_error(mesh, LineModel(s, p), mode=quad.diagonal_mode)
    return _finish(value, error, quad, with_error)


def gagliardo_radial(u: RadialProfile, params: CriticalParams, quad: QuadratureSpec | None = None, *, with_error=False):
    """p-th power of the critical W^{s,p}(R^n) seminorm of a radial profile, n >= 2."""
    if params.n < 2:
        raise ValueError("gagliardo_radial needs n >= 2; use gagliardo_1d on the even extension")
    if not params.critical:
        raise ValueError("the radial reduction is implemented for s p = n only")
    quad = quad or QuadratureSpec()
    if not np.any(u.values):
        return (0.0, 0.0) if with_error else 0.0
    mesh = radial_mesh(u, quad)
    value, error = energy_with_error(mesh, RadialModel(params.n, params.p), mode=quad.diagonal_mode)
    return _finish(value, error, quad, with_error)
