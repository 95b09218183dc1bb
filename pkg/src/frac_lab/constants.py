"""Special constants of the critical fractional Moser-Trudinger problem.

Everything here is a closed formula or a positive series with a certified
remainder. Gamma values come from :mod:`math` (``lgamma``/``gamma``), which
is accurate to a few ulp on the ranges used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

__all__ = [
    "CriticalParams",
    "SeriesResult",
    "SeriesError",
    "surface_measure",
    "ball_volume",
    "partial_sums",
    "bbm_constant",
    "gamma_series",
    "alpha_star",
    "truncated_exp",
    "log_truncated_exp",
    "psi_polynomial_bound",
    "asymptotic_ratio",
]


class SeriesError(ArithmeticError):
    """A series could not be summed to the requested tolerance."""


@dataclass(frozen=True)
class CriticalParams:
    """Dimension ``n``, order ``s`` and exponent ``p``.

    With ``critical=True`` (the default) the relation ``s*p == n`` is enforced
    to 1e-12 relative.
    """

    n: int
    s: float
    p: float
    critical: bool = True

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n}")
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"s must lie in (0, 1), got {self.s}")
        if not self.p > 1.0:
            raise ValueError(f"p must be > 1, got {self.p}")
        if self.critical and abs(self.s * self.p - self.n) > 1e-12 * self.n:
            raise ValueError(
                f"critical relation s*p = n violated: s*p = {self.s * self.p!r}, n = {self.n}"
            )

    @classmethod
    def from_np(cls, n: int, p: float) -> "CriticalParams":
        """Critical triple with ``s = n/p``."""
        if not p > n:
            raise ValueError(f"p must exceed n for a critical triple (s = n/p < 1), got n={n}, p={p}")
        return cls(n=int(n), s=n / p, p=float(p))

    @classmethod
    def from_ns(cls, n: int, s: float) -> "CriticalParams":
        """Critical triple with ``p = n/s``."""
        return cls(n=int(n), s=float(s), p=n / s)

    @property
    def q(self) -> float:
        """Moser exponent n/(n-s), equal to the conjugate p/(p-1) when critical."""
        return self.n / (self.n - self.s)

    @property
    def k_default(self) -> int:
        """Order of the truncated exponential used when none is given: ceil(p-1)."""
        return max(1, math.ceil(self.p - 1 - 1e-12))


@dataclass(frozen=True)
class SeriesResult:
    value: float
    terms_used: int
    tail_bound: float


def surface_measure(n: int) -> float:
    """Area of the unit sphere in R^n, ``2 pi^(n/2) / Gamma(n/2)``."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n}")
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def ball_volume(n: int, radius: float = 1.0) -> float:
    return surface_measure(n) / n * radius**n


def bbm_constant(p: float, n: int) -> float:
    """Bourgain-Brezis-Mironescu constant K(p, n)."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n}")
    log_k = (
        math.log(2.0)
        + (n - 1) / 2 * math.log(math.pi)
        + math.lgamma((p + 1) / 2)
        - math.log(p)
        - math.lgamma((n + p) / 2)
    )
    return math.exp(log_k)


# ---------------------------------------------------------------------------
# gamma_{s,n} series


def _series_terms(n: int, p: float, count: int) -> np.ndarray:
    # t_k = (n+k-1)! / (k! (n+2k)^p) by the ratio recurrence; no factorials.
    k = np.arange(count - 1, dtype=float)
    ratios = (n + k) / (k + 1) * ((n + 2 * k) / (n + 2 * k + 2)) ** p
    t0 = math.exp(math.lgamma(n) - p * math.log(n))
    return t0 * np.concatenate(([1.0], np.cumprod(ratios)))


def _term_shape(n: int, p: float, z):
    # t(x) = x^-(p-n+1) * G(1/x) for integer n; G(z) = prod_j (1 + j z) * (2 + n z)^-p
    z = np.asarray(z, dtype=float)
    g = (2.0 + n * z) ** (-p)
    for j in range(1, n):
        g = g * (1.0 + j * z)
    return g


def _term_at(n: int, p: float, x: float) -> float:
    return x ** (n - 1 - p) * float(_term_shape(n, p, 1.0 / x))


def _tail_integral(n: int, p: float, a: float, order: int) -> float:
    # int_a^inf t(x) dx = int_0^{1/a} z^(p-n-1) G(z) dz, Gauss-Jacobi in z.
    beta = p - n - 1.0
    xi, w = roots_jacobi(order, 0.0, beta)
    half = 0.5 / a
    z = half * (1.0 + xi)
    return half ** (beta + 1.0) * float(np.dot(w, _term_shape(n, p, z)))


def _bracketed_tail(n: int, p: float, start: int):
    """Bracket sum_{k >= start} t_k for a convex decreasing term sequence.

    Trapezoid and midpoint comparisons give
    int_N^inf t + t(N)/2 <= tail <= int_{N-1/2}^inf t.
    """
    lo_int = _tail_integral(n, p, start, 40)
    hi_int = _tail_integral(n, p, start - 0.5, 40)
    # quadrature error estimate from a lower order rule
    lo_err = abs(lo_int - _tail_integral(n, p, start, 28))
    hi_err = abs(hi_int - _tail_integral(n, p, start - 0.5, 28))
    lower = lo_int + 0.5 * _term_at(n, p, start)
    upper = hi_int
    return lower, upper, lo_err + hi_err


def _check_convex(n: int, p: float, x: float) -> None:
    h = 0.25
    second = _term_at(n, p, x - h) - 2 * _term_at(n, p, x) + _term_at(n, p, x + h)
    if not second > 0:
        raise SeriesError(f"term sequence not convex near k={x}; tail bracket invalid")


def gamma_series(n: int, p: float, tol: float = 1e-12, max_terms: int = 1 << 22) -> SeriesResult:
    """Evaluate gamma_{s,n} = 2 w_{n-1}^2 Gamma(p+1)/n! * sum_k (n+k-1)!/(k!(n+2k)^p).

    The first ``terms_used`` terms are summed exactly; the remainder is
    bracketed between a trapezoid and a midpoint comparison integral, and
    ``tail_bound`` is half the bracket width plus the quadrature error of the
    comparison integrals (scaled by the prefactor).

    The terms decay like k^(n-1-p), so the series converges only for p > n,
    which is exactly the range s = n/p in (0, 1).
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n}")
    n = int(n)
    if not p > 1:
        raise ValueError(f"p must be > 1, got {p}")
    if not p > n:
        raise ValueError(
            f"series diverges for p <= n (need s = n/p < 1), got n={n}, p={p}"
        )
    if not tol > 0:
        raise ValueError(f"tol must be > 0, got {tol}")

    omega = surface_measure(n)
    log_pref = math.log(2.0) + 2 * math.log(omega) + math.lgamma(p + 1) - math.lgamma(n + 1)
    pref = math.exp(log_pref)

    count = max(64, 8 * n)
    while True:
        terms = _series_terms(n, p, count)
        partial = math.fsum(terms.tolist())
        _check_convex(n, p, count - 0.5)
        lower, upper, qerr = _bracketed_tail(n, p, count)
        half_width = 0.5 * (upper - lower)
        # t_k carries k rounded factors from the recurrence
        round_err = 2 * np.finfo(float).eps * (float(np.dot(np.arange(1, count + 1), terms)) + partial)
        bound = float(pref * (abs(half_width) + qerr + round_err))
        value = pref * (partial + 0.5 * (lower + upper))
        if bound <= tol:
            return SeriesResult(value=value, terms_used=count, tail_bound=bound)
        if count >= max_terms:
            raise SeriesError(
                f"gamma_series(n={n}, p={p}) reached {count} terms with tail bound "
                f"{bound:.3e} > tol {tol:.3e}"
            )
        count *= 2


def partial_sums(n: int, p: float, count: int) -> np.ndarray:
    """Prefactor-scaled partial sums S_1..S_count (diagnostic)."""
    omega = surface_measure(n)
    pref = 2 * omega**2 * math.gamma(p + 1) / math.factorial(n)
    return pref * np.cumsum(_series_terms(n, p, count))


def alpha_star(params: CriticalParams, rtol: float = 1e-11) -> float:
    """Critical exponent n * gamma_{s,n}^(s/(n-s))."""
    if not params.critical:
        raise ValueError("alpha_star needs critical parameters (s*p = n)")
    rough = gamma_series(params.n, params.p, tol=math.inf)
    gamma = gamma_series(params.n, params.p, tol=rtol * rough.value).value
    return params.n * gamma ** (params.s / (params.n - params.s))


# ---------------------------------------------------------------------------
# truncated exponential Psi_k


def _ascending_tail(k: int, z: np.ndarray) -> np.ndarray:
    # sum_{j >= k} z^j / j!, all terms positive
    with np.errstate(divide="ignore"):
        logz = np.where(z > 0, np.log(np.where(z > 0, z, 1.0)), -np.inf)
    term = np.exp(k * logz - math.lgamma(k + 1))
    total = term.copy()
    j = k
    while True:
        j += 1
        term = term * z / j
        total += term
        if not np.any(term > 1e-17 * total):
            break
    return total


def _head_sum(k: int, z: np.ndarray) -> np.ndarray:
    total = np.ones_like(z)
    term = np.ones_like(z)
    for j in range(1, k):
        term = term * z / j
        total = total + term
    return total


def truncated_exp(k: int, z):
    """Psi_k(z) = e^z - sum_{j<k} z^j/j! for z >= 0.

    Uses the ascending series below z = k (where the subtraction would cancel)
    and the direct difference above it. Overflows to ``inf`` past z ~ 709; use
    :func:`log_truncated_exp` there.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"k must be an integer >= 1, got {k}")
    k = int(k)
    arr = np.asarray(z, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("truncated_exp requires z >= 0")
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    small = flat < k
    if np.any(small):
        out[small] = _ascending_tail(k, flat[small])
    big = ~small
    if np.any(big):
        zb = flat[big]
        with np.errstate(over="ignore"):
            out[big] = np.exp(zb) - _head_sum(k, zb)
    out = out.reshape(np.shape(arr))
    return float(out) if np.ndim(arr) == 0 else out


def log_truncated_exp(k: int, z):
    """Natural log of Psi_k(z); finite for every z > 0 (``-inf`` at z = 0)."""
    if int(k) != k or k < 1:
        raise ValueError(f"k must be an integer >= 1, got {k}")
    k = int(k)
    arr = np.asarray(z, dtype=float)
    if np.any(arr < 0):
        raise ValueError("log_truncated_exp requires z >= 0")
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    small = flat < max(k, 30.0)
    if np.any(small):
        with np.errstate(divide="ignore"):
            out[small] = np.log(truncated_exp(k, flat[small]))
    big = ~small
    if np.any(big):
        zb = flat[big]
        # e^-z * sum_{j<k} z^j/j!, every summand far below 1 here
        j = np.arange(k, dtype=float)[:, None]
        head = np.exp(j * np.log(zb)[None, :] - zb[None, :] - np.array(
            [math.lgamma(i + 1) for i in range(k)])[:, None]).sum(axis=0)
        out[big] = zb + np.log1p(-head)
    out = out.reshape(np.shape(arr))
    return float(out) if np.ndim(arr) == 0 else out


def psi_polynomial_bound(k: int, M: float) -> float:
    """Smallest C with Psi_k(z) <= C z^k on (0, M].

    Psi_k(z)/z^k = sum_{j>=k} z^(j-k)/j! is increasing, so the sup sits at M.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"k must be an integer >= 1, got {k}")
    if not M > 0:
        raise ValueError(f"M must be > 0, got {M}")
    # shifted ascending series avoids dividing two tiny numbers for small M
    total, term, j = 0.0, 1.0 / math.factorial(int(k)), int(k)
    while True:
        total += term
        j += 1
        term *= M / j
        if term <= 1e-17 * total:
            return total


def asymptotic_ratio(s: float, n: int) -> float:
    """(1-s) gamma_{s,n} / K(n/s, n); tends to the sphere area as s -> 1."""
    if not 0 < s < 1:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    p = n / s
    gamma = gamma_series(n, p, tol=math.inf)
    gamma = gamma_series(n, p, tol=1e-12 * gamma.value)
    return (1 - s) * gamma.value / bbm_constant(p, n)
