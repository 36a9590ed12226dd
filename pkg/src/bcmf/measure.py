"""Rigorous and statistical evaluation of biased Bernoulli convolutions.

The enclosure engine walks the self-similarity recursion

    nu(J) = p * nu(S_0^{-1} J) + (1 - p) * nu(S_1^{-1} J)

breadth first over a whole batch of query intervals at once.  Each branch
carries an inner and an outer approximation of its pulled-back interval
(directed rounding keeps them honest) plus lower/upper bounds of its weight.
A branch stops as soon as its inner interval covers the support (weight goes
to both sides of the bracket) or its outer interval meets the support in at
most one point (nothing is added: the measure has no atoms).  Branches still
open when ``depth`` runs out add their weight to the upper side only.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rounding as rd
from .errors import DomainError, PreconditionError
from .expansions import (
    DEFAULT_DEPTH,
    EPSequence,
    Params,
    digit_freq,
    gap_distance,
    local_dim_formula,
    pi,
)

ENCLOSURE_DEPTH = 40
CHUNK_CELLS = 512


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not self.a <= self.b:
            raise DomainError(f"interval endpoints out of order: [{self.a}, {self.b}]")


@dataclass(frozen=True)
class Enclosure:
    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __contains__(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    def to_json(self) -> dict:
        return {"lo": self.lo, "hi": self.hi}


def _directed_sums(cells, vals, n, down):
    """Per-cell sums of nonnegative floats, rounded in the given direction."""
    out = np.zeros(n)
    if cells.size == 0:
        return out
    order = np.argsort(cells, kind="stable")
    cells, vals = cells[order], vals[order]
    bounds = np.flatnonzero(np.diff(cells)) + 1
    starts = np.concatenate(([0], bounds))
    stops = np.concatenate((bounds, [cells.size]))
    for c, i, j in zip(cells[starts], starts, stops):
        chunk = vals[i:j].tolist()
        s = math.fsum(chunk)
        if math.fsum(chunk + [-s]) != 0.0:
            s = math.nextafter(s, -math.inf if down else math.inf)
        out[c] = s
    return out


def _enclose(lam, p, a_in, b_in, a_out, b_out, depth):
    n = len(a_in)
    a_in, b_in = np.array(a_in, float), np.array(b_in, float)
    a_out, b_out = np.array(a_out, float), np.array(b_out, float)
    top = float(rd.div_up(lam, rd.sub_down(1.0, lam)))
    p_lo = p_hi = float(p)
    q_lo, q_hi = float(rd.sub_down(1.0, p)), float(rd.sub_up(1.0, p))

    cell = np.arange(n)
    w_lo, w_hi = np.ones(n), np.ones(n)
    lo_c, lo_w, hi_c, hi_w = [], [], [], []
    for level in range(depth + 1):
        inside = (a_in <= 0.0) & (b_in >= top)
        null = (b_out <= 0.0) | (a_out >= top)
        if inside.any():
            lo_c.append(cell[inside])
            lo_w.append(w_lo[inside])
            hi_c.append(cell[inside])
            hi_w.append(w_hi[inside])
        keep = ~(inside | null)
        cell, w_lo, w_hi = cell[keep], w_lo[keep], w_hi[keep]
        a_in, b_in, a_out, b_out = a_in[keep], b_in[keep], a_out[keep], b_out[keep]
        if cell.size == 0:
            break
        if level == depth:
            hi_c.append(cell)
            hi_w.append(w_hi)
            break
        # digit 0: divide by lam; digit 1: divide then subtract 1
        a_in0, b_in0 = rd.div_up(a_in, lam), rd.div_down(b_in, lam)
        a_out0, b_out0 = rd.div_down(a_out, lam), rd.div_up(b_out, lam)
        a_in = np.concatenate((a_in0, rd.sub_up(a_in0, 1.0)))
        b_in = np.concatenate((b_in0, rd.sub_down(b_in0, 1.0)))
        a_out = np.concatenate((a_out0, rd.sub_down(a_out0, 1.0)))
        b_out = np.concatenate((b_out0, rd.sub_up(b_out0, 1.0)))
        w_lo = np.concatenate((rd.mul_down(w_lo, p_lo), rd.mul_down(w_lo, q_lo)))
        w_hi = np.concatenate((rd.mul_up(w_hi, p_hi), rd.mul_up(w_hi, q_hi)))
        cell = np.concatenate((cell, cell))

    def gather(cs, ws):
        if not cs:
            return np.empty(0, int), np.empty(0)
        return np.concatenate(cs), np.concatenate(ws)

    lo = _directed_sums(*gather(lo_c, lo_w), n, down=True)
    hi = _directed_sums(*gather(hi_c, hi_w), n, down=False)
    return np.clip(lo, 0.0, 1.0), np.clip(hi, 0.0, 1.0)


def enclose_many(params: Params, a_in, b_in, a_out=None, b_out=None, depth=ENCLOSURE_DEPTH, threads=None):
    """Batch enclosures of nu(J_i); returns arrays ``lo, hi``.

    ``[a_in, b_in]`` must lie inside each true query interval and
    ``[a_out, b_out]`` must contain it; pass only the first pair when the
    endpoints are exact floats.
    """
    if depth < 0:
        raise DomainError("depth must be >= 0")
    a_in, b_in = np.atleast_1d(np.asarray(a_in, float)), np.atleast_1d(np.asarray(b_in, float))
    a_out = a_in if a_out is None else np.atleast_1d(np.asarray(a_out, float))
    b_out = b_in if b_out is None else np.atleast_1d(np.asarray(b_out, float))
    n = len(a_in)
    chunks = [slice(i, min(i + CHUNK_CELLS, n)) for i in range(0, n, CHUNK_CELLS)]

    def run(s):
        return _enclose(params.lam, params.p, a_in[s], b_in[s], a_out[s], b_out[s], depth)

    if threads and threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(s) for s in chunks]
    if not parts:
        return np.empty(0), np.empty(0)
    return np.concatenate([x for x, _ in parts]), np.concatenate([y for _, y in parts])


def nu_enclosure(params: Params, J: Interval, depth: int = ENCLOSURE_DEPTH) -> Enclosure:
    """Certified bracket [lo, hi] for nu(J) with J closed."""
    lo, hi = enclose_many(params, [J.a], [J.b], depth=depth)
    return Enclosure(float(lo[0]), float(hi[0]))


def ball_bounds(x, r):
    """Inner and outer float approximations of the balls [x - r, x + r]."""
    x, r = np.asarray(x, float), np.asarray(r, float)
    return rd.sub_up(x, r), rd.add_down(x, r), rd.sub_down(x, r), rd.add_up(x, r)


def nu_balls(params: Params, x, r, depth: int = ENCLOSURE_DEPTH, threads=None):
    """Batch version of :func:`nu_ball`; ``x`` and ``r`` broadcast."""
    x, r = np.broadcast_arrays(np.asarray(x, float), np.asarray(r, float))
    if np.any(r <= 0):
        raise DomainError("radius must be positive")
    return enclose_many(params, *ball_bounds(x.ravel(), r.ravel()), depth=depth, threads=threads)


def nu_ball(params: Params, x: float, r: float, depth: int = ENCLOSURE_DEPTH) -> Enclosure:
    lo, hi = nu_balls(params, [x], [r], depth)
    return Enclosure(float(lo[0]), float(hi[0]))


@dataclass(frozen=True)
class CylinderBounds:
    delta: float
    n: int
    radius: float
    N: int
    c_delta: float
    lo: float
    hi: float

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "n": self.n,
            "radius": self.radius,
            "N": self.N,
            "c_delta": self.c_delta,
            "lo": self.lo,
            "hi": self.hi,
        }


def cylinder_ball_bounds(params: Params, seq: EPSequence, n: int, depth: int = DEFAULT_DEPTH) -> CylinderBounds:
    """Symbolic bracket for nu(B(x, delta lam^n)) at a certified unique point.

    ``hi`` is the weight of the length-``n`` cylinder of ``seq``; ``lo``
    scales it by c_delta = min(p, 1-p)^N, where N is the least integer with
    N log(1/lam) > log(1 / (delta (1 - lam))).
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    lam, p = params.lam, params.p
    delta = gap_distance(seq, lam, depth)
    l0 = seq.count(0, n)
    hi = p**l0 * (1.0 - p) ** (n - l0)
    A = math.log(1.0 / (delta * (1.0 - lam)))
    N = max(0, math.floor(A / math.log(1.0 / lam)) + 1)
    c = min(p, 1.0 - p) ** N
    return CylinderBounds(delta, n, delta * lam**n, N, c, c * hi, hi)


@dataclass
class DimEstimate:
    slope: float
    intercept: float
    residual: float
    points: list[tuple[float, float, float]]
    predicted: float | None = None
    dropped: list[int] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "predicted": self.predicted,
            "dropped": self.dropped,
            "points": [{"log_r": a, "log_lo": b, "log_hi": c} for a, b, c in self.points],
        }


def fit_log_log(log_r, log_lo, log_hi) -> tuple[float, float, float]:
    """Least-squares line through the log-midpoints; returns slope, intercept, rms residual."""
    x = np.asarray(log_r, float)
    y = 0.5 * (np.asarray(log_lo, float) + np.asarray(log_hi, float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return float(slope), float(intercept), resid


def local_dim_estimate(
    params: Params,
    seq: EPSequence,
    n_range: tuple[int, int],
    source: str = "symbolic",
    depth: int = ENCLOSURE_DEPTH,
) -> DimEstimate:
    """Regress log nu(B(x, delta lam^n)) on log(delta lam^n) for n in n_range.

    ``source="symbolic"`` uses the cylinder bracket, ``"numeric"`` uses
    certified ball enclosures (points whose lower bound is 0 are dropped).
    """
    n0, n1 = n_range
    if not 0 <= n0 < n1:
        raise DomainError(f"n_range must satisfy 0 <= nmin < nmax, got {n_range}")
    if source not in ("symbolic", "numeric"):
        raise DomainError(f"unknown source {source!r}")
    ns = list(range(n0, n1 + 1))
    bounds = [cylinder_ball_bounds(params, seq, n) for n in ns]
    radii = np.array([b.radius for b in bounds])
    if source == "symbolic":
        lo = np.array([b.lo for b in bounds])
        hi = np.array([b.hi for b in bounds])
    else:
        lo, hi = nu_balls(params, pi(seq, params.lam), radii, depth)
    keep = lo > 0
    dropped = [n for n, k in zip(ns, keep) if not k]
    if keep.sum() < 2:
        raise PreconditionError("fewer than two usable scales; increase depth")
    pts = [
        (math.log(r), math.log(max(a, 1e-300)), math.log(b))
        for r, a, b, k in zip(radii, lo, hi, keep)
        if k
    ]
    slope, intercept, resid = fit_log_log(*zip(*pts))
    pred = local_dim_formula(float(digit_freq(seq)), params.p, params.lam)
    return DimEstimate(slope, intercept, resid, pts, pred, dropped)


def sample_points(lam: float, q: float, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` truncated random series sum_{k<=n} i_k lam^k with P(i_k = 0) = q."""
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"q must lie in [0, 1], got {q}")
    if n < 1:
        raise DomainError("n must be >= 1")
    digits = rng.random((size, n)) >= q
    return digits.astype(float) @ (lam ** np.arange(1, n + 1))


def sample_point(lam: float, q: float, n: int, rng: np.random.Generator) -> float:
    return float(sample_points(lam, q, n, 1, rng)[0])


@dataclass
class MeshProfile:
    """Enclosures of nu on the cells [2(j-1) r, 2 j r], j = 1..m."""

    r: float
    lo: np.ndarray
    hi: np.ndarray
    params: Params | None = None
    depth: int | None = None

    def __len__(self):
        return len(self.lo)

    @property
    def centers(self) -> np.ndarray:
        return (2.0 * np.arange(1, len(self) + 1) - 1.0) * self.r

    def rows(self):
        for j, (c, a, b) in enumerate(zip(self.centers, self.lo, self.hi), start=1):
            yield j, float(c), float(a), float(b)


def mesh_profile(params: Params, r: float, depth: int = ENCLOSURE_DEPTH, threads=None) -> MeshProfile:
    top = params.lam / (1.0 - params.lam)
    if not 0.0 < r < top / 2.0:
        raise PreconditionError(f"need 0 < r < |I|/2 = {top / 2}, got {r}")
    m = math.ceil(top / (2.0 * r))
    left = 2.0 * np.arange(m, dtype=float)
    right = left + 2.0
    lo, hi = enclose_many(
        params,
        rd.mul_up(left, r),
        rd.mul_down(right, r),
        rd.mul_down(left, r),
        rd.mul_up(right, r),
        depth=depth,
        threads=threads,
    )
    return MeshProfile(r, lo, hi, params, depth)
