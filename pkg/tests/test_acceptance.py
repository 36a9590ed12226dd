"""Acceptance criteria, one test each.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary lists
one PASS/FAIL line per criterion.
"""

import json
import math
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from oracles import binomial_cell, brute_bracket, cylinder_table
from bcmf.expansions import (
    EPSequence,
    Params,
    Status,
    freq_words,
    gap_distance,
    local_dim_formula,
    membership_U,
    pi,
    solve_constant,
)
from bcmf.measure import Interval, cylinder_ball_bounds, enclose_many, local_dim_estimate, nu_ball, nu_enclosure
from bcmf.spectrum import (
    coarse_spectrum,
    exact_binomial_spectrum,
    holder_bound,
    mesh_maxima,
    spectrum_curve,
    typical_dim,
    typical_dim_mc,
)

THIRD = "0.3333333333333333"


def bcmf(*argv) -> bytes:
    proc = subprocess.run([sys.executable, "-m", "bcmf", *argv], capture_output=True, check=True)
    return proc.stdout


class Timer:
    def __init__(self, limit):
        self.limit = limit

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        if exc[0] is None:
            assert self.elapsed < self.limit, f"took {self.elapsed:.1f}s, limit {self.limit}s"


def thue_morse_residual(x: float, terms: int = 400) -> float:
    # sum_{n>=1} t_n x^n - 1 with t_n the parity of the binary digit sum of n
    return math.fsum(x**n for n in range(1, terms) if bin(n).count("1") % 2) - 1


@pytest.mark.acceptance(1, "constants")
def test_constants():
    solve_constant.cache_clear()
    with Timer(1.0):
        assert solve_constant("golden") == pytest.approx(0.618034, abs=1e-6)
        assert solve_constant("beta_one") == pytest.approx(0.554958, abs=1e-5)
        kl = solve_constant("komornik_loreti")
        assert kl == pytest.approx(0.5598, abs=1e-3)
        assert abs(thue_morse_residual(kl)) <= 1e-10
        assert solve_constant("multinacci", k=3) == pytest.approx(0.543689, abs=1e-5)


@pytest.mark.acceptance(2, "oracle equivalence at lambda = 1/2")
def test_binomial_oracle():
    with Timer(30.0):
        for p in (1 / 3, 0.5):
            params = Params(0.5, p)
            for n in range(13):
                ks = np.arange(2**n)
                lo, hi = enclose_many(params, ks / 2**n, (ks + 1) / 2**n, depth=40)
                assert np.all(hi - lo <= 1e-9)
                for k in range(2**n):
                    exact = binomial_cell(p, k, n)
                    assert Fraction(lo[k]) <= exact <= Fraction(hi[k]), (p, n, k)


@pytest.mark.acceptance(3, "brute-force cylinder bracket")
def test_brute_force_bracket():
    rng = np.random.default_rng(3)
    with Timer(60.0):
        for lam, p in ((0.6, 0.5), (0.57, 1 / 3)):
            table = cylinder_table(lam, p, 16)
            top = lam / (1 - lam)
            params = Params(lam, p)
            for _ in range(50):
                a = rng.uniform(-0.05, top)
                b = a + rng.uniform(0.0, top / 3)
                e = nu_enclosure(params, Interval(a, b), depth=16)
                lo, hi = brute_bracket(table, a, b)
                assert lo - 1e-12 <= e.lo <= e.hi <= hi + 1e-12, (lam, p, a, b)


@pytest.mark.acceptance(4, "unbiased local dimension at a unique expansion")
def test_unbiased_local_dimension():
    lam, params, seq = 0.58, Params(0.58, 0.5), EPSequence.parse("|10")
    with Timer(30.0):
        assert membership_U(seq, lam).status is Status.IN
        assert gap_distance(seq, lam) > 0
        est = local_dim_estimate(params, seq, (5, 25))
        assert est.slope == pytest.approx(1.27246, abs=0.05)
        x = pi(seq, lam)
        for n in range(16):
            cb = cylinder_ball_bounds(params, seq, n)
            e = nu_ball(params, x, cb.radius, 40)
            assert cb.lo <= e.lo and e.hi <= cb.hi, n


@pytest.mark.acceptance(5, "biased local dimension at a unique expansion")
def test_biased_local_dimension():
    with Timer(30.0):
        est = local_dim_estimate(Params(0.57, 1 / 3), EPSequence.parse("|10"), (5, 25))
        assert est.slope == pytest.approx(1.33786, abs=0.05)


@pytest.mark.acceptance(6, "prescribed-frequency word construction")
def test_frequency_words():
    lam, p = 0.54, 1 / 3
    rng = np.random.default_rng(6)
    with Timer(10.0):
        fw = freq_words(lam)
        assert (fw.k, fw.u0, fw.u1) == (0, "110", "001")
        assert fw.freq_interval == (Fraction(1, 3), Fraction(2, 3))
        d = [local_dim_formula(f, p, lam) for f in (1 / 3, 0.5, 2 / 3)]
        assert min(d[0], d[2]) <= d[1] <= max(d[0], d[2])
        pair = (fw.u0, fw.u1)
        failures = []
        for _ in range(100):
            pre = rng.integers(0, 2, rng.integers(0, 4))
            per = rng.integers(0, 2, rng.integers(1, 6))
            s = EPSequence("".join(pair[i] for i in pre), "".join(pair[i] for i in per))
            if membership_U(s, lam, depth=200).status is not Status.IN:
                failures.append(str(s))
        assert not failures, f"{len(failures)}/100 concatenations not unique, e.g. {failures[0]}"


@pytest.mark.acceptance(7, "bound curves near lambda = 1/2")
def test_bound_curves():
    gaps = []
    with Timer(10.0):
        for lam in ("0.501", "0.5001"):
            doc = json.loads(bcmf("spectrum", "bounds", "--lambda", lam, "--p", THIRD, "--alpha-steps", "200"))
            curves = {name: {pt["alpha"]: pt["f"] for pt in doc[name]["points"]} for name in ("lower", "upper", "exact")}
            lower, upper, exact = curves["lower"], curves["upper"], curves["exact"]
            assert len(upper) == 200
            assert lower and all(f <= upper[a] for a, f in lower.items())
            assert all(f <= exact[a] + 1e-9 for a, f in lower.items() if a in exact)
            assert all(upper[a] >= f - 1e-6 for a, f in exact.items())
            gaps.append(doc["meta"]["sup_gap"])
        assert gaps[1] < gaps[0]


@pytest.mark.acceptance(8, "exact spectrum identities")
def test_exact_identities():
    h = -(1 / 3 * math.log(1 / 3) + 2 / 3 * math.log(2 / 3)) / math.log(2)
    with Timer(1.0):
        curve = spectrum_curve([1 / 3, 2 / 3], 0.5, q_grid=np.linspace(-40, 40, 801))
        pts = {pt.q: pt for pt in curve.points}
        assert pts[1.0].f == pytest.approx(pts[1.0].alpha, abs=1e-9)
        assert pts[1.0].alpha == pytest.approx(h, abs=1e-9)
        assert round(pts[1.0].alpha, 6) == 0.918296
        assert pts[0.0].f == pytest.approx(1.0, abs=1e-12)
        assert pts[40.0].alpha == pytest.approx(0.584963, abs=1e-3)
        assert pts[-40.0].alpha == pytest.approx(1.584963, abs=1e-3)
        assert curve.meta["concavity_defect"] <= 1e-9


@pytest.mark.acceptance(9, "coarse spectrum at lambda = 1/2")
def test_coarse_spectrum():
    alphas = [0.92, 1.085, 1.25]
    with Timer(60.0):
        curve = coarse_spectrum(Params(0.5, 1 / 3), [2.0**-12], alphas, eps=0.05)
        assert list(curve.alpha) == alphas
        assert np.all(np.abs(curve.f - exact_binomial_spectrum(1 / 3, alphas)) <= 0.1)


@pytest.mark.acceptance(10, "uniform Hoelder bound")
def test_holder_bound():
    with Timer(120.0):
        h = holder_bound(0.51)
        assert h["delta"] == pytest.approx(0.823527, abs=1e-6)
        assert h["k_used"] == 5
        delta = h["delta"]
        rows = mesh_maxima(0.51, 0.5, range(6, 15), depth=40)
        ratios = {row["n"]: row["max_hi"] / row["r"] ** delta for row in rows}
        C = max(ratios[n] for n in range(6, 11))
        assert all(ratios[n] <= C for n in range(11, 15)), ratios
        slope = np.polyfit(np.log([r["r"] for r in rows]), np.log([r["max_hi"] for r in rows]), 1)[0]
        assert slope >= delta - 0.02
        near = holder_bound(0.708)
        assert near["boost"] >= 2 and near["delta"] > holder_bound(0.6)["delta"]


@pytest.mark.acceptance(11, "typical local dimensions")
def test_typical_dimensions(record_property):
    with Timer(120.0):
        t = typical_dim(0.6, 1 / 3, 0.25)
        assert t["J_interval"][0] == pytest.approx(0.793745, abs=1e-6)
        assert t["J_interval"][1] == 1.0
        mc = typical_dim_mc(0.5, 1 / 3, 0.25, samples=200, rng=np.random.default_rng(11))
        want = typical_dim(0.5, 1 / 3, 0.25)["H"] / math.log(2)
        assert mc["mean_slope"] == pytest.approx(want, abs=0.05)
        # non-gating
        diag = typical_dim_mc(0.55, 1 / 3, 1 / 3, samples=50, rng=np.random.default_rng(11))
        record_property("diagnostic", f"lambda=0.55 Monte-Carlo: mean slope {diag['mean_slope']:.4f} "
                        f"(sd {diag['sd']:.4f}), predicted {diag['predicted']:.4f}")


DETERMINISM_RUNS = [
    ["constants", "--tol", "1e-10"],
    ["constants", "--format", "csv"],
    ["measure", "--lambda", "0.5", "--p", THIRD, "--a", "0.25", "--b", "0.5"],
    ["unique", "--lambda", "0.58", "--seq", "|10"],
    ["gap", "--lambda", "0.58", "--seq", "|10"],
    ["localdim", "--lambda", "0.58", "--p", "0.5", "--seq", "|10", "--nmin", "5", "--nmax", "25"],
    ["localdim", "--lambda", "0.57", "--p", THIRD, "--seq", "|10", "--format", "csv"],
    ["words", "freq", "--lambda", "0.54"],
    ["spectrum", "bounds", "--lambda", "0.501", "--p", THIRD, "--format", "csv"],
    ["spectrum", "bounds", "--lambda", "0.5001", "--p", THIRD],
    ["spectrum", "exact", "--lambda", "0.5", "--p", THIRD],
    ["spectrum", "coarse", "--lambda", "0.5", "--p", THIRD, "--r", "0.000244140625", "--alpha-steps", "40"],
    ["mesh", "--lambda", "0.51", "--p", "0.5", "--r", "0.0078125", "--format", "csv"],
    ["holder", "--lambda", "0.51", "--nmin", "6", "--nmax", "10"],
    ["typical", "--lambda", "0.6", "--p", THIRD, "--q", "0.25"],
    ["typical-mc", "--lambda", "0.5", "--p", THIRD, "--q", "0.25", "--samples", "50", "--seed", "7"],
]


@pytest.mark.acceptance(12, "byte-identical CLI reruns")
def test_determinism():
    for argv in DETERMINISM_RUNS:
        first = bcmf(*argv)
        # a different thread count must not change the bytes either
        extra = ["--threads", "1"] if argv[0] in ("mesh", "holder", "typical-mc") or argv[1:2] == ["coarse"] else []
        assert first and bcmf(*argv) == first, argv
        if extra:
            assert bcmf(*argv, *extra) == first, argv
