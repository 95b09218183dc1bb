"""Acceptance checks shared by ``frac-lab verify`` and the test suite.

Every check is deterministic: random inputs come from fixed seeds and the
report holds no timings, so two runs print identical text.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import CriticalParams, asymptotic_ratio, bbm_constant, gamma_series, surface_measure
from .functionals import WeightSpec, blowup_scan, normalize_fa1, seminorm_p, takahashi_transform
from .funcspace import (
    GridFunction2D,
    PiecewiseFunction1D,
    RadialProfile,
    dilate,
    direct_seminorm_2d,
    directional_seminorm,
    even_extension,
    gagliardo_1d,
    lq_norm,
    moser_profile,
    rearrange,
)
from .poincare import (
    BetweenGraphsDomain,
    IntervalUnionDomain,
    StripsDomain,
    analytic_lower_bound_1d,
    fbc_decay_scan,
    ls_sections,
    rayleigh_estimate,
    uniform_poincare_check,
)

__all__ = ["CheckResult", "CHECKS", "SUITES", "run_checks", "format_report"]


@dataclass
class CheckResult:
    key: str
    title: str
    passed: bool
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.key:<3} {status}  {self.title}"


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def format_report(results) -> str:
    out = []
    for r in results:
        out.append(r.line())
        for k in sorted(r.details):
            out.append(f"    {k} = {_fmt(r.details[k])}")
    passed = sum(r.passed for r in results)
    out.append(f"{passed}/{len(results)} checks passed")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------


def check_1(seed: int = 0):
    g = gamma_series(1, 2.0).value
    k = bbm_constant(2.0, 2)
    w = surface_measure(2)
    d = {
        "gamma_1_2": g,
        "gamma_err": abs(g - 2 * math.pi**2),
        "bbm_2_2_err": abs(k - math.pi / 2),
        "surface_2_exact": w == 2 * math.pi,
    }
    ok = d["gamma_err"] < 1e-9 and d["bbm_2_2_err"] < 1e-12 and d["surface_2_exact"]
    return [CheckResult("1", "constant exactness", ok, d)]


def check_2(seed: int = 0):
    ratios = [asymptotic_ratio(s, 2) for s in (0.9, 0.99, 0.999)]
    errs = [abs(r / (2 * math.pi) - 1) for r in ratios]
    ok = all(b < a for a, b in zip(errs, errs[1:])) and errs[-1] < 0.05
    return [CheckResult("2", "asymptotic ratio tends to 2 pi", ok, {"ratios": ratios, "rel_errors": errs})]


def check_3(seed: int = 0):
    params = CriticalParams.from_np(1, 2.0)
    g = 2 * math.pi**2
    eps = [1e-2, 1e-3, 1e-4]
    vals = [gagliardo_1d(even_extension(moser_profile(params, e)), params.s, params.p) for e in eps]
    excess = np.array([v / g - 1 for v in vals])
    x = np.array([1 / math.log(1 / e) for e in eps])
    c = float(excess @ x / (x @ x))
    resid = excess - c * x
    r2 = 1 - float(resid @ resid) / float(((excess - excess.mean()) ** 2).sum())
    common = {"seminorm_p": vals, "ratio_minus_1": excess.tolist(), "fit_c": c, "fit_r2": r2}
    return [
        CheckResult("3a", "Moser excess fits c/log(1/eps)", r2 > 0.99, dict(common)),
        CheckResult("3b", "Moser ratio [u_eps]^2/(2 pi^2) exceeds 1", bool(np.all(excess > 0)), dict(common)),
    ]


def _random_function(rng):
    m = int(rng.integers(4, 14))
    a = rng.uniform(-2.0, 0.0)
    b = a + rng.uniform(0.5, 3.0)
    x = np.sort(rng.uniform(a, b, m))
    x = np.concatenate(([a], x, [b]))
    x = np.unique(x)
    v = rng.normal(size=x.size)
    v[0] = v[-1] = 0.0
    return PiecewiseFunction1D(x, v)


def check_4(seed: int = 0, count: int = 100):
    rng = np.random.default_rng((seed, 4))
    worst_ps, worst_norm, failures = -math.inf, 0.0, 0
    for k in range(count):
        u = _random_function(rng)
        s, p = (0.5, 2.0) if k % 2 == 0 else (0.25, 4.0)
        us = rearrange(u, 1)
        su = gagliardo_1d(u, s, p)
        ss = gagliardo_1d(even_extension(us), s, p)
        ps = ss / su - 1
        norm_err = max(abs(lq_norm(us, q, 1) / lq_norm(u, q, 1) - 1) for q in (1, 2, 4))
        worst_ps = max(worst_ps, ps)
        worst_norm = max(worst_norm, norm_err)
        failures += int(ps > 1e-6 or norm_err > 1e-6)
    d = {"functions": count, "max_seminorm_ratio_minus_1": worst_ps, "max_norm_rel_err": worst_norm, "failures": failures}
    return [CheckResult("4", "Polya-Szego and equimeasurability", failures == 0, d)]


def check_5(seed: int = 0):
    rows, ok = {}, True
    cases = [
        ("moser_n1", CriticalParams.from_np(1, 2.0), moser_profile(CriticalParams.from_np(1, 2.0), 1e-2)),
        ("moser_n2", CriticalParams.from_np(2, 4.0), moser_profile(CriticalParams.from_np(2, 4.0), 1e-2)),
    ]
    r = np.linspace(0, 1, 33)
    cases.append(("bump_n2", CriticalParams.from_np(2, 3.0), RadialProfile(r, (1 - r**2) ** 2, monotone=True)))
    for name, params, u in cases:
        n, p = params.n, params.p
        s0 = seminorm_p(u, params)
        l0 = lq_norm(u, p, n) ** p
        for ell in (2.0, 5.0):
            v = dilate(u, ell)
            ds = abs(seminorm_p(v, params) / s0 - 1)
            dl = abs(lq_norm(v, p, n) ** p / (l0 * ell**-n) - 1)
            rows[f"{name}_ell{int(ell)}_seminorm_rel"] = ds
            rows[f"{name}_ell{int(ell)}_lp_rel"] = dl
            ok &= ds < 1e-3 and dl < 1e-3
    return [CheckResult("5", "critical scale invariance", bool(ok), rows)]


def check_6(seed: int = 0):
    per = IntervalUnionDomain(tuple((2.0 * k, 2.0 * k + 1.0) for k in range(4)))
    lb = analytic_lower_bound_1d(per, 0.5, 2.0)
    est = rayleigh_estimate(per, 0.5, 2.0, 2.0, 64)
    unit = rayleigh_estimate(IntervalUnionDomain(((0.0, 1.0),)), 0.5, 2.0, 2.0, 64)
    rel = abs(unit.value - unit.cross_check) / unit.cross_check
    d = {
        "periodic_lower_bound": lb,
        "periodic_estimate": est.value,
        "unit_estimate": unit.value,
        "unit_eigen_oracle": unit.cross_check,
        "unit_rel_diff": rel,
        "converged": est.converged and unit.converged,
    }
    ok = lb == 0.25 and est.value >= 0.25 and rel < 1e-6 and d["converged"]
    return [CheckResult("6", "Poincare sandwich and eigen oracle", bool(ok), d)]


def check_7(seed: int = 0):
    r = np.linspace(0, 1, 41)
    base = RadialProfile(r, (1 - r**2) ** 2, monotone=True)
    params = CriticalParams.from_np(1, 2.0)
    out, d = [], {}
    ok = True
    for q in (2.0, 4.0):
        scan = fbc_decay_scan(base, q, params, [1, 2, 4, 8, 16])
        target = -params.n * params.p / q
        rel = abs(scan.slope / target - 1)
        d[f"q{int(q)}_slope"] = scan.slope
        d[f"q{int(q)}_target"] = target
        ok &= rel < 0.01
    out.append(CheckResult("7", "finite-ball counterexample slope", bool(ok), d))
    return out


def check_8(seed: int = 0):
    grid = [10 ** (-k / 2) for k in range(2, 9)]
    p4 = CriticalParams.from_np(2, 4.0)
    rows = blowup_scan(1.0, WeightSpec("identity"), grid, p4, "lp_normalized", None)
    vals = [r.value for r in rows]
    inc = all(b > a for a, b in zip(vals, vals[1:]))
    ratio = vals[-1] / vals[0]
    a = CheckResult("8a", "blow-up at alpha*, weight t", inc and ratio >= 10,
                    {"values": vals, "last_over_first": ratio, "normalization": "lp_normalized", "n": 2, "p": 4.0})
    rows = blowup_scan(0.5, WeightSpec("one"), grid, p4, "seminorm_ball", 1.0)
    vals = [r.value for r in rows]
    inner = [r.inner_ball for r in rows]
    spread = max(vals) / min(vals)
    delta = 0.5 * inner[0]
    b = CheckResult("8b", "bounded at alpha*/2 on the unit ball", spread <= 2.0, {"values": vals, "max_over_min": spread})
    c = CheckResult("8c", "inner-ball integral bounded below", min(inner) >= delta,
                    {"inner_ball": inner, "delta": delta})
    return [a, b, c]


def _random_candidate(rng, params):
    m = int(rng.integers(4, 10))
    r = np.concatenate(([0.0], np.sort(rng.uniform(0.05, 0.95, m)), [1.0]))
    v = np.concatenate((np.sort(rng.uniform(0.1, 2.0, m + 1))[::-1], [0.0]))
    u = RadialProfile(r, v, monotone=True)
    u = u.scaled(seminorm_p(u, params) ** (-1.0 / params.p))
    return normalize_fa1(u, params)


def check_9(seed: int = 0, count: int = 20):
    from .constants import alpha_star

    rng = np.random.default_rng((seed, 9))
    worst_norm, worst_val, failures = 0.0, 0.0, 0
    for k in range(count):
        params = CriticalParams.from_np(1, 2.0) if k % 2 == 0 else CriticalParams.from_np(2, 4.0)
        u = _random_candidate(rng, params)
        a_star = alpha_star(params)
        alpha_eps = a_star * rng.uniform(0.9, 0.99)
        alpha = alpha_eps * rng.uniform(0.2, 0.9)
        _, rep = takahashi_transform(u, alpha, alpha_eps, params)
        worst_norm = max(worst_norm, rep.full_norm_p_v - 1)
        worst_val = max(worst_val, rep.value_rel_err)
        failures += int(not (rep.norm_ok and rep.value_ok))
    d = {"candidates": count, "max_full_norm_minus_1": worst_norm, "max_value_rel_err": worst_val, "failures": failures}
    return [CheckResult("9", "Takahashi scaling algebra", failures == 0, d)]


def _bump(X, Y):
    return np.clip(1 - X**2 - Y**2, 0, None) ** 2


def _elliptic_bump(X, Y):
    return np.clip(1 - ((X - 0.1) / 0.8) ** 2 - ((Y + 0.05) / 0.6) ** 2, 0, None) ** 2 * (1 + 0.5 * X)


def check_10(seed: int = 0):
    d, ok = {}, True
    for name, f in (("round", _bump), ("elliptic", _elliptic_bump)):
        u = GridFunction2D.from_function(f, (-1.1, 1.1, -1.1, 1.1), 44)
        disc = []
        for lev in (0, 1):
            a = directional_seminorm(u, 0.5, 4.0, 16 * 2**lev, 44 * 2**lev, 2 * 2**lev, rtol=1.0)
            b = direct_seminorm_2d(u, 0.5, 4.0, 44 * 2**lev)
            disc.append(abs(a - b) / b)
            d[f"{name}_level{lev}_directional"] = a
            d[f"{name}_level{lev}_direct"] = b
        d[f"{name}_discrepancy"] = disc
        ok &= disc[0] < 0.05 and disc[1] < 0.05 and disc[1] <= 0.5 * disc[0]
    return [CheckResult("10", "line-section formula against direct quadrature", bool(ok), d)]


def check_11(seed: int = 0):
    strips = StripsDomain(tuple((2.0 * k, 2.0 * k + 1.0) for k in range(6)), axis=0)
    graphs = BetweenGraphsDomain(((-2.0, 0.0), (0.0, 0.5), (2.0, 0.0)), ((-2.0, 1.5), (0.0, 1.2), (2.0, 1.5)))
    d, ok = {}, True
    for name, dom in (("strips", strips), ("between_graphs", graphs)):
        dirs = [math.pi * (j + 0.5) / 8 for j in range(8)]
        fams = [ls_sections(dom, t, np.linspace(-0.5, 0.5, 3)) for t in dirs]
        res = uniform_poincare_check(fams, 0.5, 2.0, grid_n=64)
        sandwich = all(b <= e for b, e in zip(res.bounds, res.estimates))
        d[f"{name}_inf_bound"] = res.value
        d[f"{name}_sections"] = len(res.bounds)
        d[f"{name}_min_estimate"] = min(res.estimates)
        d[f"{name}_sandwich"] = sandwich
        ok &= res.value > 0 and sandwich and not res.flags
    return [CheckResult("11", "LS-domain certificate over 8 directions", bool(ok), d)]


CHECKS = {
    "1": check_1,
    "2": check_2,
    "3": check_3,
    "4": check_4,
    "5": check_5,
    "6": check_6,
    "7": check_7,
    "8": check_8,
    "9": check_9,
    "10": check_10,
    "11": check_11,
}

SUITES = {"all": tuple(CHECKS), "quick": ("1", "2", "5", "6", "7")}


def run_checks(keys=None, seed: int = 0):
    keys = SUITES["all"] if keys is None else keys
    results = []
    for k in keys:
        results.extend(CHECKS[k](seed=seed))
    return results
