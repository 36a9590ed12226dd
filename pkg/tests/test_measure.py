import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import binomial_cell, brute_bracket, cylinder_table
from bcmf.errors import DomainError, PreconditionError
from bcmf.expansions import EPSequence, Params, pi
from bcmf.measure import (
    Enclosure,
    Interval,
    cylinder_ball_bounds,
    enclose_many,
    local_dim_estimate,
    mesh_profile,
    nu_ball,
    nu_balls,
    nu_enclosure,
    sample_point,
    sample_points,
)


class TestEnclosure:
    def test_full_support_depth0(self):
        P = Params(0.6, 0.3)
        assert nu_enclosure(P, Interval(0.0, 1.5), 0) == Enclosure(1.0, 1.0)
        assert nu_enclosure(P, Interval(-1.0, 2.0), 0) == Enclosure(1.0, 1.0)

    def test_disjoint(self):
        assert nu_enclosure(Params(0.6, 0.3), Interval(-2.0, -1.0), 5) == Enclosure(0.0, 0.0)
        assert nu_ball(Params(0.6, 0.3), -1.0, 0.5) == Enclosure(0.0, 0.0)

    def test_depth_exhausted_is_trivial(self):
        e = nu_enclosure(Params(0.6, 0.5), Interval(0.2, 0.9), 0)
        assert (e.lo, e.hi) == (0.0, 1.0)

    def test_half_at_lambda_half(self):
        e = nu_enclosure(Params(0.5, 1 / 3), Interval(0.0, 0.5), 20)
        assert 1 / 3 in e
        assert e.width <= 1e-6

    def test_bad_interval(self):
        with pytest.raises(DomainError):
            Interval(1.0, 0.0)
        with pytest.raises(DomainError):
            nu_ball(Params(0.6, 0.5), 0.3, 0.0)

    @pytest.mark.parametrize("p", [1 / 3, 0.5])
    def test_binomial_oracle(self, p):
        P = Params(0.5, p)
        for n in range(0, 9):
            ks = np.arange(2**n)
            lo, hi = enclose_many(P, ks / 2**n, (ks + 1) / 2**n, depth=40)
            for k in ks:
                exact = binomial_cell(p, int(k), n)
                assert Fraction(lo[k]) <= exact <= Fraction(hi[k])
                assert hi[k] - lo[k] <= 1e-9

    @pytest.mark.parametrize("lam, p", [(0.6, 0.5), (0.57, 1 / 3), (0.7, 0.2)])
    def test_brute_force_bracket(self, lam, p, rng):
        n = 12
        table = cylinder_table(lam, p, n)
        top = lam / (1 - lam)
        for _ in range(20):
            a, b = np.sort(rng.uniform(-0.1, top + 0.1, 2))
            e = nu_enclosure(Params(lam, p), Interval(a, b), n)
            inside, touch = brute_bracket(table, a, b)
            assert inside - 1e-12 <= e.lo <= e.hi <= touch + 1e-12

    def test_s0s0_image(self):
        P = Params(0.6, 0.5)
        e = nu_enclosure(P, Interval(0.0, 0.54), 30)
        assert e.lo >= 0.25
        table = cylinder_table(0.6, 0.5, 14)
        for J in ((0.0, 0.36), (0.0, 0.54)):
            e = nu_enclosure(P, Interval(*J), 30)
            inside, touch = brute_bracket(table, *J)
            assert inside - 1e-12 <= e.lo and e.hi <= touch + 1e-12

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-0.2, 1.7), st.floats(0.0, 1.0), st.sampled_from([0.55, 0.6, 0.65]), st.floats(0.05, 0.95))
    def test_depth_monotone(self, a, length, lam, p):
        P, J = Params(lam, p), Interval(a, a + length)
        shallow, deep = nu_enclosure(P, J, 8), nu_enclosure(P, J, 16)
        assert 0.0 <= deep.lo <= deep.hi <= 1.0
        assert deep.width <= shallow.width + 1e-15
        assert shallow.lo <= deep.lo + 1e-15 and deep.hi <= shallow.hi + 1e-15

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.0, 1.0), st.floats(0.0, 0.5), st.floats(0.0, 0.3), st.floats(0.05, 0.95))
    def test_inclusion_monotone(self, a, length, grow, p):
        P = Params(0.6, p)
        small = nu_enclosure(P, Interval(a, a + length), 14)
        big = nu_enclosure(P, Interval(a - grow, a + length + grow), 14)
        assert small.lo <= big.hi + 1e-15

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.0, 1.5), st.floats(0.0, 0.7), st.floats(0.05, 0.95))
    def test_reflection(self, a, length, p):
        lam, top = 0.6, 1.5
        b = a + length
        e1 = nu_enclosure(Params(lam, p), Interval(a, b), 14)
        e2 = nu_enclosure(Params(lam, 1 - p), Interval(top - b, top - a), 14)
        assert max(e1.lo, e2.lo) <= min(e1.hi, e2.hi) + 1e-12

    def test_threads_do_not_change_results(self):
        P = Params(0.6, 1 / 3)
        a = np.linspace(0, 1.4, 1500)
        one = enclose_many(P, a, a + 0.05, depth=14, threads=1)
        four = enclose_many(P, a, a + 0.05, depth=14, threads=4)
        assert np.array_equal(one[0], four[0]) and np.array_equal(one[1], four[1])


class TestCylinderBounds:
    def test_example(self):
        cb = cylinder_ball_bounds(Params(0.6, 0.5), EPSequence.parse("|10"), 4)
        assert cb.hi == 1 / 16
        assert cb.delta == pytest.approx(0.0375)
        assert cb.N == 9
        assert cb.c_delta == 2.0**-9
        assert cb.lo == 2.0**-13

    def test_all_zeros(self):
        cb = cylinder_ball_bounds(Params(0.55, 0.3), EPSequence.parse("|0"), 7)
        assert cb.hi == pytest.approx(0.3**7)

    def test_requires_unique(self):
        with pytest.raises(PreconditionError):
            cylinder_ball_bounds(Params(0.57, 0.5), EPSequence.parse("|1100"), 3)

    def test_constructive_N(self):
        for lam, lit in ((0.58, "|10"), (0.55, "0|10"), (0.6, "000|10")):
            cb = cylinder_ball_bounds(Params(lam, 0.4), EPSequence.parse(lit), 5)
            A = math.log(1 / (cb.delta * (1 - lam)))
            assert cb.N * math.log(1 / lam) > A
            assert (cb.N - 1) * math.log(1 / lam) <= A or cb.N == 0

    @pytest.mark.parametrize("lam, p, lit", [(0.58, 1 / 3, "|10"), (0.6, 0.5, "|10"), (0.55, 0.3, "00|10")])
    def test_ball_enclosure_meets_symbolic_bracket(self, lam, p, lit):
        P, s = Params(lam, p), EPSequence.parse(lit)
        x = pi(s, lam)
        for n in range(0, 16):
            cb = cylinder_ball_bounds(P, s, n)
            e = nu_ball(P, x, cb.radius, 40)
            assert max(e.lo, cb.lo) <= min(e.hi, cb.hi)
            if n <= 12:
                assert e.hi <= cb.hi


class TestLocalDim:
    def test_unbiased(self):
        est = local_dim_estimate(Params(0.58, 0.5), EPSequence.parse("|10"), (5, 25))
        assert est.slope == pytest.approx(math.log(2) / abs(math.log(0.58)), abs=0.05)
        assert est.residual >= 0

    def test_biased(self):
        est = local_dim_estimate(Params(0.57, 1 / 3), EPSequence.parse("|10"), (5, 25))
        want = (math.log(1 / 3) + math.log(2 / 3)) / (2 * math.log(0.57))
        assert est.slope == pytest.approx(want, abs=0.05)
        assert est.predicted == pytest.approx(want)

    def test_predicted_formula(self):
        est = local_dim_estimate(Params(0.54, 1 / 3), EPSequence.parse("|001"), (3, 12))
        want = (2 / 3 * math.log(1 / 3) + 1 / 3 * math.log(2 / 3)) / math.log(0.54)
        assert est.predicted == pytest.approx(want)

    def test_numeric_source(self):
        est = local_dim_estimate(Params(0.58, 0.5), EPSequence.parse("|10"), (3, 15), source="numeric")
        assert est.slope == pytest.approx(math.log(2) / abs(math.log(0.58)), abs=0.05)

    def test_bad_range(self):
        with pytest.raises(DomainError):
            local_dim_estimate(Params(0.58, 0.5), EPSequence.parse("|10"), (5, 5))


class TestSampling:
    def test_deterministic(self):
        a = sample_points(0.6, 0.5, 30, 5, np.random.default_rng(3))
        b = sample_points(0.6, 0.5, 30, 5, np.random.default_rng(3))
        assert np.array_equal(a, b)
        assert sample_point(0.6, 0.5, 30, np.random.default_rng(3)) == a[0]

    def test_degenerate_bias(self):
        x = sample_point(0.6, 0.0, 40, np.random.default_rng(0))
        assert x == pytest.approx(1.5 - 0.6**40 * 1.5)
        assert sample_point(0.6, 1.0, 40, np.random.default_rng(0)) == 0.0

    def test_mean(self):
        lam, n = 0.6, 10**5
        xs = sample_points(lam, 0.5, 60, n, np.random.default_rng(11))
        se = xs.std() / math.sqrt(n)
        assert abs(xs.mean() - lam / (2 * (1 - lam))) < 3 * se

    def test_bad_args(self):
        with pytest.raises(DomainError):
            sample_point(0.6, 1.5, 10, np.random.default_rng(0))
        with pytest.raises(DomainError):
            sample_point(0.6, 0.5, 0, np.random.default_rng(0))


class TestMesh:
    def test_binomial_cells(self):
        prof = mesh_profile(Params(0.5, 1 / 3), 2.0**-5)
        assert len(prof) == 16
        for j, (lo, hi) in enumerate(zip(prof.lo, prof.hi)):
            exact = binomial_cell(1 / 3, j, 4)
            assert Fraction(lo) <= exact <= Fraction(hi)
        assert prof.lo.sum() <= 1 + 1e-12 and prof.hi.sum() >= 1 - 1e-12

    def test_total_mass(self):
        prof = mesh_profile(Params(0.6, 0.3), 0.01, depth=20)
        assert prof.lo.sum() <= 1.0 <= prof.hi.sum() + 1e-12
        assert prof.centers[0] == pytest.approx(0.01)

    def test_refinement(self):
        P = Params(0.6, 0.3)
        shallow = mesh_profile(P, 0.02, depth=15)
        deep = mesh_profile(P, 0.02, depth=30)
        assert (deep.hi - deep.lo).sum() < (shallow.hi - shallow.lo).sum()

    def test_radius_too_big(self):
        with pytest.raises(PreconditionError):
            mesh_profile(Params(0.6, 0.3), 0.75)

    def test_balls_batch(self):
        P = Params(0.6, 0.5)
        lo, hi = nu_balls(P, [0.3, 0.9], 0.05)
        e = nu_ball(P, 0.9, 0.05)
        assert (lo[1], hi[1]) == (e.lo, e.hi)
