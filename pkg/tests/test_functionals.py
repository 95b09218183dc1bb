import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from frac_lab.constants import CriticalParams, alpha_star, ball_volume, surface_measure, truncated_exp
from frac_lab.funcspace import QuadratureSpec, RadialProfile, lq_norm, moser_profile
from frac_lab.functionals import (
    WeightSpec,
    blowup_scan,
    elementary_limit_gap,
    fa_candidate_value,
    fb_candidate_value,
    fb_rescale,
    moser_functional,
    normalize_fa1,
    onofri_gap,
    seminorm_p,
    takahashi_ratio,
    takahashi_transform,
    write_scan_csv,
)

LOOSE = QuadratureSpec(target_rel_err=1.0)
P1 = CriticalParams.from_np(1, 2.0)
P2 = CriticalParams.from_np(2, 4.0)


def random_candidate(seed, nodes=6):
    rng = np.random.default_rng(seed)
    r = np.concatenate(([0.0], np.sort(rng.uniform(0.05, 1.5, nodes - 1))))
    v = np.sort(rng.uniform(0.05, 2.0, nodes))[::-1].copy()
    v[-1] = 0.0
    return RadialProfile(r, v, monotone=True)


def unit_seminorm(u, params):
    return u.scaled(seminorm_p(u, params, LOOSE) ** (-1.0 / params.p))


def quad_oracle(u, alpha, k, params, f=lambda t: 1.0, radius=None):
    q = params.p / (params.p - 1)
    n = params.n
    g = lambda r: f(u(r)) * truncated_exp(k, alpha * abs(float(u(r))) ** q) * r ** (n - 1)
    total = sum(quad(g, a, b, epsabs=0, epsrel=1e-12)[0] for a, b in zip(u.radii[:-1], u.radii[1:]))
    return surface_measure(n) * total


class TestWeight:
    def test_values(self):
        t = np.array([0.0, 1.0, 3.0])
        np.testing.assert_array_equal(WeightSpec("one")(t), [1, 1, 1])
        np.testing.assert_array_equal(WeightSpec("identity")(t), t)
        np.testing.assert_allclose(WeightSpec("log1p")(t), np.log1p(t))

    def test_rejects(self):
        with pytest.raises(ValueError):
            WeightSpec("square")


class TestMoserFunctional:
    def test_zero(self):
        u = RadialProfile([0.0, 1.0], [0.0, 0.0])
        assert moser_functional(u, 1.0, 1, P1).value == 0.0

    @pytest.mark.parametrize("params", [P1, P2, CriticalParams.from_np(3, 4.5)])
    @pytest.mark.parametrize("kind", ["one", "identity", "log1p"])
    def test_quad_oracle(self, params, kind):
        u = random_candidate(params.n)
        f = {"one": lambda t: 1.0, "identity": lambda t: t, "log1p": math.log1p}[kind]
        k = params.k_default
        rep = moser_functional(u, 2.0, k, params, WeightSpec(kind))
        assert rep.value == pytest.approx(quad_oracle(u, 2.0, k, params, f), rel=1e-6)
        assert rep.k == k and rep.alpha == 2.0

    def test_bounded_by_sup(self):
        u = random_candidate(3)
        alpha, k = 1.5, 2
        top = float(u.values.max())
        vol = ball_volume(2, u.support_radius)
        cap = vol * top * truncated_exp(k, alpha * top ** (4 / 3))
        assert moser_functional(u, alpha, k, P2, WeightSpec("identity")).value <= cap

    def test_overflow_log_space(self):
        u = RadialProfile([0.0, 0.5, 1.0], [40.0, 20.0, 0.0])
        rep = moser_functional(u, 10.0, 1, P1)
        assert rep.overflow and rep.value == math.inf
        assert math.isfinite(rep.log_value) and rep.log_value > 700
        assert rep.log10_value == pytest.approx(rep.log_value / math.log(10))

    def test_rejects(self):
        u = random_candidate(0)
        with pytest.raises(ValueError):
            moser_functional(u, 0.0, 1, P1)
        with pytest.raises(ValueError):
            moser_functional(u, 1.0, 0, P1)

    @pytest.mark.parametrize("seed", range(20))
    def test_monotone_in_alpha_and_k(self, seed):
        u = random_candidate(seed)
        params = P2 if seed % 2 else P1
        kmax = params.k_default + 1
        for k in range(1, kmax + 1):
            vals = [moser_functional(u, a, k, params).value for a in (0.1, 0.5, 1.0, 2.0, 4.0)]
            assert all(a <= b for a, b in zip(vals, vals[1:]))
        for a in (0.5, 2.0):
            by_k = [moser_functional(u, a, k, params).value for k in range(1, kmax + 1)]
            assert all(x >= y for x, y in zip(by_k, by_k[1:]))


class TestFA:
    def test_normalize_identity(self):
        r = np.linspace(0, 1, 11)
        u = RadialProfile(r, 1 - r)
        u = u.scaled(lq_norm(u, 2.0, 1) ** -1)
        v = normalize_fa1(u, P1)
        np.testing.assert_allclose(v.radii, u.radii, rtol=1e-12)

    @pytest.mark.parametrize("params", [P1, P2])
    def test_normalize_moser(self, params):
        u = unit_seminorm(moser_profile(params, 1e-2), params)
        v = normalize_fa1(u, params)
        assert lq_norm(v, params.p, params.n) == pytest.approx(1.0, rel=1e-6)
        assert seminorm_p(v, params, LOOSE) == pytest.approx(seminorm_p(u, params, LOOSE), rel=1e-3)

    def test_normalize_rejects_zero(self):
        with pytest.raises(ValueError):
            normalize_fa1(RadialProfile([0.0, 1.0], [0.0, 0.0]), P1)

    @pytest.mark.parametrize("params", [P1, P2])
    def test_fa1_equals_fa(self, params):
        u = unit_seminorm(random_candidate(4), params)
        a = fa_candidate_value(u, 0.5 * alpha_star(params), params, LOOSE)
        b = fa_candidate_value(normalize_fa1(u, params), 0.5 * alpha_star(params), params, LOOSE)
        assert b.value == pytest.approx(a.value, rel=1e-3)
        assert a.normalization == "lp_normalized"

    def test_constraint_enforced(self):
        u = random_candidate(5).scaled(10.0)
        with pytest.raises(ValueError):
            fa_candidate_value(u, 1.0, P1, LOOSE)

    def test_grows_at_critical_exponent(self):
        a_star = alpha_star(P1)
        vals = [fa_candidate_value(unit_seminorm(moser_profile(P1, e), P1), a_star, P1, LOOSE).log_value
                for e in (1e-2, 1e-4, 1e-6)]
        assert vals[0] < vals[1] < vals[2]


class TestFB:
    def test_zero(self):
        assert fb_candidate_value(RadialProfile([0.0, 1.0], [0.0, 0.0]), 1.0, P1).value == 0.0

    @pytest.mark.parametrize("params", [P1, P2])
    def test_scaling_identity(self, params):
        ell = 2.0
        u = random_candidate(6)
        # scale so that ell ||u||_p^p + [u]^p = 1
        total = ell * lq_norm(u, params.p, params.n) ** params.p + seminorm_p(u, params, LOOSE)
        u = u.scaled(total ** (-1.0 / params.p))
        alpha = 0.5 * alpha_star(params)
        weighted = fb_candidate_value(u, alpha, params, ell_weight=ell, quad=LOOSE)
        w = fb_rescale(u, ell, params)
        plain = fb_candidate_value(w, alpha, params, quad=LOOSE)
        assert plain.value == pytest.approx(ell * weighted.value, rel=1e-3)

    def test_constraint_enforced(self):
        u = random_candidate(7).scaled(10.0)
        with pytest.raises(ValueError):
            fb_candidate_value(u, 1.0, P2, quad=LOOSE)
        with pytest.raises(ValueError):
            fb_rescale(u, 0.0, P2)


@pytest.fixture(scope="module")
def candidate():
    return normalize_fa1(unit_seminorm(moser_profile(P2, 1e-2), P2), P2)


class TestTakahashi:
    def test_half_gives_unit_scale(self, candidate):
        a_eps = 0.9 * alpha_star(P2)
        alpha = a_eps * 0.5 ** (1 / (P2.p - 1))
        v, rep = takahashi_transform(candidate, alpha, a_eps, P2, LOOSE)
        assert rep.Cp == pytest.approx(0.5, rel=1e-14)
        assert rep.ell_n == pytest.approx(1.0, rel=1e-13)
        assert rep.norm_ok and rep.full_norm_p_v <= 1 + 1e-3
        assert rep.value_ok
        assert rep.full_norm_p_v == pytest.approx(rep.predicted_full_norm_p, rel=1e-3)

    def test_ratio(self):
        assert takahashi_ratio(1.0, 2.0, 2.0) == pytest.approx(1.0)

    def test_rejects(self, candidate):
        with pytest.raises(ValueError):
            takahashi_transform(candidate, 2.0, 1.0, P2)
        with pytest.raises(ValueError):
            takahashi_transform(candidate, 1e-300, 1.0, P2)


class TestOnofri:
    def test_zero(self):
        assert onofri_gap(RadialProfile([0.0, 1.0], [0.0, 0.0]), 1.0, 1.0, P1) == 0.0

    def test_lambda_zero(self):
        u = random_candidate(1)
        g = onofri_gap(u, 0.0, 2.0, P1, quad=LOOSE)
        assert g == pytest.approx(seminorm_p(u, P1, LOOSE) / 2)
        assert g >= 0

    def test_log_term_oracle(self):
        u = random_candidate(2)
        lam = 1.0
        semi = seminorm_p(u, P2, LOOSE)
        R = 2.0
        integral = surface_measure(2) * quad(lambda r: math.exp(float(u(r))) * r, 0, R,
                                             points=list(u.radii), epsrel=1e-12, limit=200)[0]
        ref = semi / 4 - lam * math.log(integral / ball_volume(2, R))
        assert onofri_gap(u, lam, R, P2, quad=LOOSE) == pytest.approx(ref, rel=1e-8)

    def test_bounded_along_moser(self):
        lam = 1.0
        gaps = [onofri_gap(moser_profile(P1, e), lam, 1.0, P1, quad=LOOSE) for e in (1e-1, 1e-2, 1e-3, 1e-4)]
        assert all(math.isfinite(g) for g in gaps)
        assert min(gaps) > -10

    def test_rejects(self):
        u = random_candidate(3)
        with pytest.raises(ValueError):
            onofri_gap(u, 1.0, 0.1, P1)
        with pytest.raises(ValueError):
            onofri_gap(u, 1e9, 2.0, P1)


class TestScan:
    def test_rows_and_csv(self):
        rows = blowup_scan(1.0, WeightSpec("identity"), [1e-1, 1e-2], P1, quad=LOOSE)
        assert [r.eps for r in rows] == [1e-1, 1e-2]
        text = write_scan_csv(rows)
        assert text.splitlines()[0] == "eps,seminorm_p,lp_norm_p,value,inner_ball"
        assert all(r.inner_ball > 0 for r in rows)

    def test_overflow_column(self):
        rows = blowup_scan(1.2, WeightSpec("one"), [1e-1, 1e-30], P1, quad=LOOSE)
        text = write_scan_csv(rows)
        if any(r.overflow for r in rows):
            assert text.splitlines()[0].endswith(",log10_value")

    def test_bounded_below_critical(self):
        rows = blowup_scan(0.5, WeightSpec("one"), [1e-1, 1e-2, 1e-3, 1e-4], P1, domain_radius=1.0, quad=LOOSE)
        vals = [r.value for r in rows]
        assert max(vals) / min(vals) < 2

    @pytest.mark.parametrize("kw", [dict(alpha_frac=0.0), dict(alpha_frac=1.5), dict(eps_grid=[1e-2, 1e-1]),
                                    dict(normalization="other"), dict(domain_radius=0.5)])
    def test_rejects(self, kw):
        args = dict(alpha_frac=1.0, weight=WeightSpec(), eps_grid=[1e-1, 1e-2], params=P1)
        args.update(kw)
        with pytest.raises(ValueError):
            blowup_scan(**args)


def test_elementary_limit():
    gaps = np.abs(elementary_limit_gap([1e3, 1e4, 1e5], 1.0, 2.0))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-4


@given(st.floats(1.0, 1e6), st.floats(0.1, 5.0), st.floats(1.5, 6.0))
def test_elementary_limit_sign(t, C, p):
    # t (1 + C/t)^(-1/(p-1)) >= t - C/(p-1) by convexity of x^(-1/(p-1))
    assert elementary_limit_gap(t, C, p) >= -1e-9 * t
