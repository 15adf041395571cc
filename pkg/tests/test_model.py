"""Disorder laws, inter-arrival laws, and disorder sampling."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from copolymer.model import CopolymerParams, DisorderLaw, InterArrivalLaw

from _oracles import log_mgf_quadrature, zeta_partial_plus_tail

GAUSS = DisorderLaw.gaussian()
RADEMACHER = DisorderLaw.rademacher()
UNIFORM = DisorderLaw.uniform_bounded()

# frozen oracle values (quadrature / partial sum + Euler-Maclaurin tail)
LOG_COSH_2 = 1.3250027473578645
K1_ZETA_HALF = 0.3827933839994266
TAIL1_ZETA_HALF = 0.6172066160005734
LOG_MGF_UNIFORM_2 = 1.5275208697151812


class TestLogMgf:
    def test_zero_is_zero(self):
        for law in (GAUSS, RADEMACHER, UNIFORM):
            assert law.log_mgf(0.0) == 0.0

    def test_gaussian_closed_form(self):
        assert GAUSS.log_mgf(-2.0) == pytest.approx(2.0, abs=1e-14)
        assert GAUSS.log_mgf(3.0) == pytest.approx(4.5, abs=1e-14)

    def test_rademacher_frozen(self):
        assert RADEMACHER.log_mgf(2.0) == pytest.approx(LOG_COSH_2, abs=1e-12)

    def test_uniform_frozen_and_small_t(self):
        assert UNIFORM.log_mgf(2.0) == pytest.approx(LOG_MGF_UNIFORM_2, abs=1e-12)
        # series branch: log(sinh(x)/x) ~ x^2/6 near 0
        t = 1e-6
        assert UNIFORM.log_mgf(t) == pytest.approx(3.0 * t * t / 6.0, rel=1e-6)

    @pytest.mark.parametrize("law,kind", [
        (GAUSS, "gaussian"), (RADEMACHER, "rademacher"), (UNIFORM, "uniform_bounded"),
    ])
    def test_matches_quadrature_oracle(self, law, kind):
        ts = np.linspace(-10.0, 10.0, 81)
        for t in ts:
            assert law.log_mgf(float(t)) == pytest.approx(
                log_mgf_quadrature(kind, float(t)), abs=1e-10
            )

    @given(
        t0=st.floats(-8, 8),
        dt=st.floats(1e-3, 2.0),
        kind=st.sampled_from(["gaussian", "rademacher", "uniform_bounded"]),
    )
    @settings(max_examples=60, deadline=None)
    def test_convexity_second_difference(self, t0, dt, kind):
        law = DisorderLaw.from_name(kind if kind != "uniform_bounded" else "uniform")
        f = [law.log_mgf(t0 - dt), law.log_mgf(t0), law.log_mgf(t0 + dt)]
        assert f[0] - 2 * f[1] + f[2] >= -1e-9

    def test_vectorized_matches_scalar(self):
        ts = np.array([-3.0, 0.0, 1.5])
        out = GAUSS.log_mgf(ts)
        assert np.allclose(out, [GAUSS.log_mgf(float(t)) for t in ts])


class TestInterArrival:
    def test_zeta_pmf_frozen(self):
        law = InterArrivalLaw.zeta_tail(0.5)
        assert law.pmf(1) == pytest.approx(K1_ZETA_HALF, abs=1e-12)
        # oracle route: partial sum + integral tail
        assert law.pmf(1) == pytest.approx(1.0 / zeta_partial_plus_tail(1.5), abs=1e-9)

    def test_srw_first_returns(self):
        law = InterArrivalLaw.srw_return()
        assert law.pmf(2) == pytest.approx(0.5, abs=1e-15)
        assert law.pmf(3) == 0.0
        assert law.pmf(4) == pytest.approx(1.0 / 8.0, abs=1e-15)
        assert law.alpha == 0.5 and law.period == 2

    def test_tail_values(self):
        z = InterArrivalLaw.zeta_tail(0.5)
        s = InterArrivalLaw.srw_return()
        for law in (z, s):
            assert law.tail(0) == 1.0
        assert s.tail(1) == 1.0  # first return is at least 2
        assert s.tail(2) == pytest.approx(0.5, abs=1e-15)
        assert s.tail(3) == pytest.approx(0.5, abs=1e-15)
        assert z.tail(1) == pytest.approx(TAIL1_ZETA_HALF, abs=1e-12)

    @pytest.mark.parametrize("law", [
        InterArrivalLaw.zeta_tail(0.3),
        InterArrivalLaw.zeta_tail(0.5),
        InterArrivalLaw.zeta_tail(0.8),
        InterArrivalLaw.srw_return(),
    ])
    def test_normalization_to_1e6(self, law):
        n = 10 ** 6
        total = float(np.exp(law.log_pmf_array(n)[1:]).sum()) + law.tail(n)
        assert abs(total - 1.0) < 1e-12

    @pytest.mark.parametrize("law", [
        InterArrivalLaw.zeta_tail(0.5),
        InterArrivalLaw.srw_return(),
    ])
    def test_tail_nonincreasing_pmf_nonnegative(self, law):
        tail = law.tail_array(20_000)
        assert tail[0] == 1.0
        assert np.all(np.diff(tail) <= 1e-15)
        pmf = np.exp(law.log_pmf_array(20_000))
        assert np.all(pmf >= 0.0)
        # tail array agrees with scalar tail
        for n in (0, 1, 2, 3, 17, 1024, 19_999):
            assert tail[n] == pytest.approx(law.tail(n), rel=1e-12)

    def test_zeta_polynomial_exactness(self):
        # K(n) n^(1+alpha) = 1/zeta(1+alpha) by construction
        for alpha in (0.3, 0.5, 0.8, 2.0):
            law = InterArrivalLaw.zeta_tail(alpha)
            c = law.pmf(1)
            for n in (1, 7, 103, 10_001, 999_937):
                assert law.pmf(n) * n ** (1 + alpha) == pytest.approx(c, rel=1e-12)

    def test_tail_asymptotics_within_one_percent(self):
        law = InterArrivalLaw.zeta_tail(0.5)
        c = law.pmf(1)
        for n in (10_000, 100_000):
            assert law.pmf(n) * n ** 1.5 == pytest.approx(c, rel=0.01)

    def test_gamma_tail_bounds_bracket_truth(self):
        # direct summation to 2e6 plus the law's own remainder bound must
        # bracket-match pmf_gamma_tail_bounds at a small cutoff
        gamma = 0.9
        n_cut = 512
        n_far = 2_000_000
        for law in (InterArrivalLaw.zeta_tail(0.5), InterArrivalLaw.srw_return()):
            pmf = np.exp(law.log_pmf_array(n_far))
            direct = float(np.sum(pmf[n_cut + 1:] ** gamma))
            far_lo, far_hi = law.pmf_gamma_tail_bounds(n_far, gamma)
            lo, hi = law.pmf_gamma_tail_bounds(n_cut, gamma)
            assert lo <= direct + far_hi + 1e-12
            assert direct + far_lo <= hi + 1e-12

    def test_gamma_tail_exact_for_zeta(self):
        import mpmath as mp
        law = InterArrivalLaw.zeta_tail(0.5)
        gamma = 0.9
        lo, hi = law.pmf_gamma_tail_bounds(1000, gamma)
        assert lo == hi
        truth = float(mp.zeta(mp.mpf(gamma) * mp.mpf("1.5"), 1001) / mp.zeta(mp.mpf("1.5")) ** mp.mpf(gamma))
        assert lo == pytest.approx(truth, rel=1e-12)

    def test_invalid_construction(self):
        with pytest.raises(ValueError):
            InterArrivalLaw.zeta_tail(0.0)
        with pytest.raises(ValueError):
            DisorderLaw.uniform_bounded(-1.0)
        with pytest.raises(ValueError):
            InterArrivalLaw.from_name("cauchy")


class TestSampling:
    def test_deterministic_replay(self):
        a = GAUSS.sample(5, 42, 0)
        b = GAUSS.sample(5, 42, 0)
        assert np.array_equal(a.omega, b.omega)
        c = GAUSS.sample(5, 42, 1)
        assert not np.array_equal(a.omega, c.omega)
        d = GAUSS.sample(5, 43, 0)
        assert not np.array_equal(a.omega, d.omega)

    def test_rademacher_clt(self):
        s = RADEMACHER.sample(10 ** 6, 7, 3)
        assert set(np.unique(s.omega)) == {-1.0, 1.0}
        assert abs(s.omega.mean()) < 4.0 / math.sqrt(10 ** 6)

    def test_uniform_unit_variance(self):
        s = UNIFORM.sample(10 ** 6, 7, 4)
        assert abs(s.omega.var() - 1.0) < 0.01
        assert np.max(np.abs(s.omega)) <= math.sqrt(3.0) + 1e-12

    def test_gaussian_moments(self):
        s = GAUSS.sample(10 ** 6, 11, 0)
        assert abs(s.omega.mean()) < 4e-3
        assert abs(s.omega.var() - 1.0) < 1e-2

    def test_invalid_size(self):
        with pytest.raises(ValueError):
            GAUSS.sample(0, 1, 0)
        with pytest.raises(ValueError):
            GAUSS.sample(-3, 1, 0)


class TestParams:
    def test_validation(self):
        CopolymerParams(0.0, 0.0)
        with pytest.raises(ValueError):
            CopolymerParams(-0.1, 0.0)
        with pytest.raises(ValueError):
            CopolymerParams(1.0, -0.5)
