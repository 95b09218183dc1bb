import numpy as np
import pytest

from frac_lab.funcspace import GridFunction2D, QuadratureError, direct_seminorm_2d, directional_seminorm
from frac_lab.funcspace.planar import section_values


def bump(X, Y):
    return np.maximum(0.0, 1 - X**2 - Y**2) ** 2


def skew(X, Y):
    return np.maximum(0.0, 1 - (X - 0.2) ** 2 / 0.6 - Y**2 / 0.3) ** 2


@pytest.fixture(scope="module")
def small_bump():
    return GridFunction2D.from_function(bump, box=(-1.1, 1.1, -1.1, 1.1), cells=22)


def test_validation():
    with pytest.raises(ValueError):
        GridFunction2D([0, 1, 2], [0, 1, 2], np.ones((3, 3)))
    with pytest.raises(ValueError):
        GridFunction2D([0, 1], [0, 1, 2], np.zeros((2, 3)))


def test_evaluation():
    u = GridFunction2D.from_function(bump, cells=20)
    assert u(0.0, 0.0) == pytest.approx(1.0)
    assert u(5.0, 0.0) == 0.0


def test_zero():
    u = GridFunction2D([0, 1, 2], [0, 1, 2], np.zeros((3, 3)))
    assert directional_seminorm(u, 0.5, 4.0) == 0.0


def test_rotation_invariance():
    u = GridFunction2D.from_function(skew, box=(-1.1, 1.1, -1.1, 1.1), cells=22)
    a = directional_seminorm(u, 0.5, 4.0, n_directions=8, rtol=1.0)
    b = directional_seminorm(u.rotate90(), 0.5, 4.0, n_directions=8, rtol=1.0)
    assert b == pytest.approx(a, rel=1e-3)


def test_rotate90_geometry():
    u = GridFunction2D.from_function(skew, box=(-1.1, 1.1, -1.1, 1.1), cells=22)
    v = u.rotate90()
    # v(R z) = u(z) with R the quarter turn (x, y) -> (-y, x)
    assert v(-0.0, 0.2) == pytest.approx(u(0.2, 0.0))
    assert v(-0.3, 0.1) == pytest.approx(u(0.1, 0.3))


def test_section_values_along_axis(small_bump):
    sec = section_values(small_bump, 0.0, 0.0, 0.05)
    assert sec is not None
    t, v = sec
    assert np.all(np.diff(t) > 0)
    assert v.max() == pytest.approx(1.0, abs=0.02)
    assert section_values(small_bump, 0.0, 5.0, 0.05) is None


def test_agrees_with_direct(small_bump):
    a, err = directional_seminorm(small_bump, 0.5, 4.0, n_directions=16, rtol=1.0, with_error=True)
    b = direct_seminorm_2d(small_bump, 0.5, 4.0, cells=44)
    assert a == pytest.approx(b, rel=0.05)


def test_unresolved_raises():
    u = GridFunction2D.from_function(skew, box=(-1.1, 1.1, -1.1, 1.1), cells=22)
    with pytest.raises(QuadratureError):
        directional_seminorm(u, 0.5, 4.0, n_directions=2, n_offsets=4, rtol=1e-6)


def test_rejects(small_bump):
    with pytest.raises(ValueError):
        directional_seminorm(small_bump, 1.5, 2.0)
    with pytest.raises(ValueError):
        directional_seminorm(small_bump, 0.5, 2.0, n_directions=3)
