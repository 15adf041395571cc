"""Partition tables: oracle equivalence, inequalities, annealed limits, dumps."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from copolymer.model import CopolymerParams, DisorderLaw, InterArrivalLaw
from copolymer.partition import (
    brute_force_log_partition,
    build_annealed_table,
    build_partition_table,
    dump_table,
    free_log_z_at,
    load_table,
    window_log_partition,
)

from _oracles import enumerate_log_tilted_expectation, renewal_mass_function

GAUSS = DisorderLaw.gaussian()
ZETA_HALF = InterArrivalLaw.zeta_tail(0.5)
SRW = InterArrivalLaw.srw_return()


def _random_instance(rng, law):
    if law.period == 2:
        n = 2 * int(rng.integers(1, 9))
    else:
        n = int(rng.integers(2, 17))
    omega = rng.standard_normal(n)
    params = CopolymerParams(float(rng.uniform(0, 3)), float(rng.uniform(0, 2)))
    return omega, params, n


class TestForwardTable:
    def test_lambda_zero_free_is_one(self):
        omega = GAUSS.sample(50, 1, 0)
        for law in (ZETA_HALF, SRW):
            table = build_partition_table(omega, CopolymerParams(0.0, 0.9), law)
            assert table.log_z_free == pytest.approx(0.0, abs=1e-12)

    def test_lambda_zero_constrained_is_renewal_mass(self):
        omega = GAUSS.sample(40, 2, 0)
        for law in (ZETA_HALF, SRW):
            table = build_partition_table(omega, CopolymerParams(0.0, 0.0), law)
            u = renewal_mass_function(np.exp(law.log_pmf_array(40)), 40)
            assert np.exp(table.log_zc) == pytest.approx(u, abs=1e-12)

    def test_length_one_closed_form(self):
        omega = np.array([0.37])
        lam, h = 1.2, 0.4
        table = build_partition_table(omega, CopolymerParams(lam, h), ZETA_HALF)
        expected = math.log((1.0 + math.exp(-2 * lam * (0.37 + h))) / 2.0)
        assert table.log_z_free == pytest.approx(expected, abs=1e-12)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(202)
        for _ in range(20):
            for law in (ZETA_HALF, SRW, InterArrivalLaw.zeta_tail(0.8)):
                omega, params, n = _random_instance(rng, law)
                table = build_partition_table(omega, params, law)
                bf_c = brute_force_log_partition(omega, params, law, True)
                bf_f = brute_force_log_partition(omega, params, law, False)
                assert table.log_zc[n] == pytest.approx(bf_c, abs=1e-10)
                assert table.log_z_free == pytest.approx(bf_f, abs=1e-10)

    @given(
        n=st.integers(2, 12),
        lam=st.floats(0.0, 3.0),
        h=st.floats(0.0, 2.0),
        seed=st.integers(0, 2 ** 31),
    )
    @settings(max_examples=25, deadline=None)
    def test_matches_brute_force_property(self, n, lam, h, seed):
        omega = np.random.default_rng(seed).standard_normal(n)
        params = CopolymerParams(lam, h)
        table = build_partition_table(omega, params, ZETA_HALF)
        assert table.log_z_free == pytest.approx(
            brute_force_log_partition(omega, params, ZETA_HALF, False), abs=1e-10
        )

    def test_intermediate_free_close(self):
        rng = np.random.default_rng(5)
        omega = rng.standard_normal(14)
        params = CopolymerParams(1.1, 0.6)
        table = build_partition_table(omega, params, ZETA_HALF)
        for n in (3, 7, 11, 14):
            assert free_log_z_at(table, ZETA_HALF, n) == pytest.approx(
                brute_force_log_partition(omega[:n], params, ZETA_HALF, False), abs=1e-10
            )

    def test_odd_length_rejected_for_srw(self):
        omega = GAUSS.sample(7, 3, 0)
        with pytest.raises(ValueError, match="period"):
            build_partition_table(omega, CopolymerParams(1.0, 0.0), SRW)

    def test_brute_force_length_guard(self):
        omega = GAUSS.sample(23, 3, 0)
        with pytest.raises(ValueError, match="22"):
            brute_force_log_partition(omega, CopolymerParams(1.0, 0.0), ZETA_HALF, True)


class TestInequalities:
    def test_sandwich_constrained_below_free(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            omega, params, n = _random_instance(rng, ZETA_HALF)
            table = build_partition_table(omega, params, ZETA_HALF)
            assert table.log_zc[n] <= table.log_z_free + 1e-12

    def test_sandwich_ratio_bounded_by_c_times_n(self):
        # fit the constant at N <= 12, then check the bound at N = 16
        rng = np.random.default_rng(8)
        log_c = -np.inf
        for _ in range(40):
            n = int(rng.integers(2, 13))
            omega = rng.standard_normal(n)
            params = CopolymerParams(float(rng.uniform(0, 2)), float(rng.uniform(0, 1.5)))
            t = build_partition_table(omega, params, ZETA_HALF)
            log_c = max(log_c, t.log_z_free - t.log_zc[n] - math.log(n))
        for _ in range(40):
            omega = rng.standard_normal(16)
            params = CopolymerParams(float(rng.uniform(0, 2)), float(rng.uniform(0, 1.5)))
            t = build_partition_table(omega, params, ZETA_HALF)
            gap = t.log_z_free - t.log_zc[16]
            assert gap <= log_c + math.log(16) + math.log(2.0)

    def test_monotone_nonincreasing_in_h(self):
        rng = np.random.default_rng(9)
        omega = rng.standard_normal(60)
        prev = math.inf
        for h in (0.0, 0.3, 0.7, 1.2, 2.0):
            t = build_partition_table(omega, CopolymerParams(1.0, h), ZETA_HALF)
            assert t.log_z_free <= prev + 1e-12
            prev = t.log_z_free

    def test_convex_in_h(self):
        rng = np.random.default_rng(10)
        omega = rng.standard_normal(40)
        hs = np.linspace(0.0, 2.0, 21)
        vals = [
            build_partition_table(omega, CopolymerParams(1.3, float(h)), ZETA_HALF).log_z_free
            for h in hs
        ]
        second = np.diff(vals, 2)
        assert np.all(second >= -1e-8)

    def test_tilting_identity_small(self):
        rng = np.random.default_rng(11)
        for _ in range(8):
            n = 10
            omega = rng.standard_normal(n)
            lam = float(rng.uniform(0.2, 2.0))
            h0, h1 = sorted(rng.uniform(0.0, 1.5, size=2))
            lhs = build_partition_table(omega, CopolymerParams(lam, h0), ZETA_HALF).log_z_free
            z1 = build_partition_table(omega, CopolymerParams(lam, h1), ZETA_HALF).log_z_free
            tilt = enumerate_log_tilted_expectation(
                omega, CopolymerParams(lam, h1), ZETA_HALF, 2.0 * lam * (h1 - h0)
            )
            rhs = z1 + tilt
            assert abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0) < 1e-10


class TestWindows:
    def test_empty_window(self):
        omega = GAUSS.sample(10, 4, 0)
        assert window_log_partition(omega, CopolymerParams(1.0, 0.2), ZETA_HALF, 4, 4, True) == 0.0

    def test_full_window_matches_table(self):
        omega = GAUSS.sample(12, 5, 0)
        params = CopolymerParams(0.8, 0.1)
        table = build_partition_table(omega, params, ZETA_HALF)
        assert window_log_partition(omega, params, ZETA_HALF, 0, 12, False) == pytest.approx(
            float(table.log_zc[12]), abs=1e-12
        )
        assert window_log_partition(omega, params, ZETA_HALF, 0, 12, True) == pytest.approx(
            table.log_z_free, abs=1e-12
        )

    def test_interior_window_matches_brute_force(self):
        omega = GAUSS.sample(12, 6, 0)
        params = CopolymerParams(1.4, 0.5)
        got = window_log_partition(omega, params, ZETA_HALF, 3, 9, True)
        expected = brute_force_log_partition(omega.omega[3:9], params, ZETA_HALF, False)
        assert got == pytest.approx(expected, abs=1e-10)

    def test_invalid_window(self):
        omega = GAUSS.sample(10, 7, 0)
        with pytest.raises(ValueError):
            window_log_partition(omega, CopolymerParams(1.0, 0.0), ZETA_HALF, 5, 3, True)


class TestAnnealed:
    def test_lambda_zero(self):
        t = build_annealed_table(GAUSS, CopolymerParams(0.0, 0.4), ZETA_HALF, 100)
        assert t.log_az_free == pytest.approx(0.0, abs=1e-12)
        assert t.q == 0.0

    def test_zero_tilt_at_annealed_criticality(self):
        # h = h_c^ann(1) = 1 for gaussian charges
        t = build_annealed_table(GAUSS, CopolymerParams(1.0, 1.0), ZETA_HALF, 2000)
        assert t.q == pytest.approx(0.0, abs=1e-14)
        assert -0.01 <= t.log_az_free / 2000 <= 0.0

    def test_localized_annealed_growth(self):
        # (1/N) log E Z -> (2 lam^2 - 2 lam h)_+ = 1 at lam=1, h=0.5
        t = build_annealed_table(GAUSS, CopolymerParams(1.0, 0.5), ZETA_HALF, 2000)
        assert t.log_az_free / 2000 == pytest.approx(1.0, abs=0.02)

    def test_matches_mc_average(self):
        # annealed bound: sample mean of log Z <= log E Z + 3 stderr, and
        # the sample mean of Z itself should match E Z within CI
        law = ZETA_HALF
        params = CopolymerParams(0.7, 0.3)
        n = 128
        at = build_annealed_table(GAUSS, params, law, n)
        logs = []
        for k in range(300):
            omega = GAUSS.sample(n, 99, k)
            logs.append(build_partition_table(omega, params, law).log_z_free)
        logs = np.array(logs)
        assert logs.mean() <= at.log_az_free + 3.0 * logs.std(ddof=1) / math.sqrt(len(logs))
        z = np.exp(logs)
        assert abs(z.mean() - math.exp(at.log_az_free)) <= 4.0 * z.std(ddof=1) / math.sqrt(len(z))


class TestDump:
    def test_round_trip(self, tmp_path):
        omega = GAUSS.sample(37, 8, 0)
        params = CopolymerParams(1.7, 0.9)
        table = build_partition_table(omega, params, ZETA_HALF)
        path = tmp_path / "table.cplt"
        dump_table(table, path)
        back = load_table(path)
        assert back.n_max == table.n_max
        assert back.lam == table.lam and back.h == table.h
        assert back.law_kind == table.law_kind
        assert back.alpha == table.alpha and back.period == table.period
        assert back.log_z_free == table.log_z_free
        assert np.array_equal(back.log_zc, table.log_zc)
        assert np.array_equal(back.charge_prefix, table.charge_prefix)
        assert back.matches(omega.omega, params, ZETA_HALF)

    def test_reject_garbage(self, tmp_path):
        path = tmp_path / "bad.cplt"
        path.write_bytes(b"NOPE" + b"\x00" * 64)
        with pytest.raises(ValueError):
            load_table(path)
