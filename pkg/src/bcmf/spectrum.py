"""Multifractal spectra of Bernoulli convolutions and related bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PreconditionError, RangeError
from .expansions import Params, multinacci_index, solve_constant
from .measure import MeshProfile, mesh_profile, nu_balls, fit_log_log, sample_points

LAMBDA_STAR = 0.66847
Q_MAX = 40.0
K_CAP = 40
CONCAVITY_TOL = 1e-9
WINDOW_SLACK = 1e-12
BISECT_TOL = 1e-12


def default_q_grid(q_max: float = Q_MAX) -> np.ndarray:
    near0 = np.geomspace(1e-4, 0.05, 12)
    grid = np.concatenate((np.linspace(-q_max, q_max, 801), near0, -near0))
    return np.unique(grid)


@dataclass(frozen=True)
class SpectrumPoint:
    q: float
    alpha: float
    f: float
    clipped: bool = False


@dataclass
class SpectrumCurve:
    points: list[SpectrumPoint]
    meta: dict = field(default_factory=dict)

    @property
    def alpha(self) -> np.ndarray:
        return np.array([pt.alpha for pt in self.points])

    @property
    def f(self) -> np.ndarray:
        return np.array([pt.f for pt in self.points])

    def __len__(self):
        return len(self.points)

    def interp(self, alpha, outside=np.nan) -> np.ndarray:
        """Linear interpolation in alpha; ``outside`` beyond the curve's range."""
        return np.interp(alpha, self.alpha, self.f, left=outside, right=outside)

    def to_json(self) -> dict:
        return {
            "meta": self.meta,
            "points": [{"q": pt.q, "alpha": pt.alpha, "f": pt.f} for pt in self.points],
        }


def _logsumexp(x, counts=None):
    x = np.asarray(x, float)
    m = x.max()
    c = np.ones_like(x) if counts is None else np.asarray(counts, float)
    return m + math.log(float(np.sum(c * np.exp(x - m))))


def osc_spectrum_point(weights, rho: float, q: float, counts=None, q_max: float = Q_MAX) -> SpectrumPoint:
    """Legendre point (alpha(q), f(q)) for equal-ratio ``rho`` maps with ``weights``.

    ``counts`` gives multiplicities when several maps share a weight.
    """
    w = np.asarray(weights, float)
    if w.size == 0 or np.any((w <= 0) | (w >= 1)):
        raise DomainError("weights must lie in (0, 1)")
    if not 0 < rho < 1:
        raise DomainError(f"rho must lie in (0, 1), got {rho}")
    clipped = abs(q) > q_max
    qq = math.copysign(q_max, q) if clipped else float(q)
    lw = np.log(w)
    c = np.ones_like(lw) if counts is None else np.asarray(counts, float)
    x = qq * lw
    log_W = _logsumexp(x, c)
    soft = c * np.exp(x - log_W)
    lr = math.log(rho)
    alpha = float(np.dot(soft, lw)) / lr
    f = qq * alpha - log_W / lr
    return SpectrumPoint(float(q), alpha, float(f), clipped)


def _concavity_defect(alpha, f) -> float:
    if len(alpha) < 3:
        return 0.0
    a0, a1, a2 = alpha[:-2], alpha[1:-1], alpha[2:]
    t = (a1 - a0) / (a2 - a0)
    chord = f[:-2] + t * (f[2:] - f[:-2])
    return float(np.max(chord - f[1:-1]))


def spectrum_curve(weights, rho: float, q_grid=None, counts=None, q_max: float = Q_MAX, kind="exact", meta=None) -> SpectrumCurve:
    """Map :func:`osc_spectrum_point` over ``q_grid`` and return an alpha-sorted curve."""
    grid = default_q_grid(q_max) if q_grid is None else np.asarray(q_grid, float)
    if not np.all(np.isfinite(grid)):
        raise DomainError("q grid must be finite")
    pts = [osc_spectrum_point(weights, rho, q, counts, q_max) for q in sorted(grid, reverse=True)]
    kept: list[SpectrumPoint] = []
    for pt in pts:
        if not kept or pt.alpha > kept[-1].alpha:
            kept.append(pt)
    curve = SpectrumCurve(kept, {"kind": kind, "rho": rho, **(meta or {})})
    defect = _concavity_defect(curve.alpha, curve.f)
    curve.meta["clipped"] = any(pt.clipped for pt in kept)
    curve.meta["concavity_defect"] = max(defect, 0.0)
    if kind == "exact" and defect > CONCAVITY_TOL:
        raise PreconditionError(f"spectrum not concave (defect {defect:.3g})")
    return curve


def binary_entropy2(t):
    t = np.asarray(t, float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(t * np.log2(t) + (1 - t) * np.log2(1 - t))
    return np.where((t == 0) | (t == 1), 0.0, h)


def exact_binomial_spectrum(p: float, alpha):
    """Closed-form f of the binomial measure on [0, 1]; NaN outside its support."""
    if not 0 < p < 1:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    alpha = np.asarray(alpha, float)
    a0, a1 = -math.log2(1 - p), -math.log2(p)
    if a0 == a1:
        return np.where(alpha == 1.0, 1.0, np.nan)
    t = (alpha - a0) / (a1 - a0)
    inside = (t >= 0) & (t <= 1)
    return np.where(inside, binary_entropy2(np.clip(t, 0, 1)), np.nan)


def binomial_support(p: float) -> tuple[float, float]:
    a, b = -math.log2(1 - p), -math.log2(p)
    return min(a, b), max(a, b)


def _sigma_m(p: float, m: int):
    """Distinct weights of non-constant words of length m, with multiplicities."""
    j = np.arange(1, m)
    logs = j * math.log(p) + (m - j) * math.log(1 - p)
    counts = np.array([math.comb(m, int(i)) for i in j], float)
    return logs, counts


def eta_k(p: float, m: int, tol: float = BISECT_TOL) -> float:
    """Exponent eta with sum over non-constant length-m words of p_i^eta equal to 1."""
    if m < 2:
        raise DomainError("m must be >= 2")
    if not 0 < p < 1:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    logs, counts = _sigma_m(p, m)

    def g(eta):
        return _logsumexp(eta * logs, counts)

    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def lower_bound_curve(lam: float, p: float, k: int | None = None, q_grid=None) -> SpectrumCurve:
    """Lower bound for f_{lam,p} from the separated sub-system of non-constant m-words."""
    params = Params(lam, p)
    if lam <= 0.5:
        raise DomainError("lambda must exceed 1/2")
    if k is None:
        k = multinacci_index(lam)
        if k is None or k < 3:
            raise RangeError(f"no admissible k for lambda={lam}")
        k = min(k, K_CAP)
    if k < 3:
        raise DomainError("k must be >= 3")
    if lam >= solve_constant("multinacci", k=k):
        raise RangeError(f"lambda={lam} is not below the multinacci number g_{k}")
    m = k // 2
    if m < 2:
        raise PreconditionError(f"k={k} gives words of length {m}; need k >= 4")
    eta = eta_k(params.p, m)
    logs, counts = _sigma_m(params.p, m)
    w = np.exp(eta * logs)
    base = spectrum_curve(w, lam**m, q_grid, counts, kind="lower_bound")
    pts = [SpectrumPoint(pt.q, pt.alpha / eta, pt.f, pt.clipped) for pt in base.points]
    meta = {"kind": "lower_bound", "lambda": lam, "p": p, "k": k, "m": m, "eta": eta,
            "clipped": base.meta["clipped"]}
    return SpectrumCurve(pts, meta)


def lambda_k_max(lam: float) -> int | None:
    """Largest k >= 2 with 2 lam - 1 < lam^(k-1) (1 - lam), or None."""
    if not 0.5 < lam < 1:
        raise DomainError(f"lambda must lie in (1/2, 1), got {lam}")
    gap = 2 * lam - 1
    k, rhs = 1, 1 - lam
    while rhs * lam > gap:
        rhs *= lam
        k += 1
    return k if k >= 2 else None


def upper_bound_curve(lam: float, p: float, alpha_grid) -> SpectrumCurve:
    """Window supremum of the lam = 1/2 spectrum; f = 0 with a flag off its support."""
    Params(lam, p)
    k = lambda_k_max(lam)
    if k is None:
        raise RangeError(f"no admissible k for lambda={lam}")
    c = abs(math.log2(lam))
    a_lo, a_hi = binomial_support(p)
    peak = -0.5 * (math.log2(p) + math.log2(1 - p))
    pts, outside = [], []
    for a in np.asarray(alpha_grid, float):
        # widen outward so rounding never shrinks the window
        w0, w1 = c * a - WINDOW_SLACK, c * a + 1.0 / k + WINDOW_SLACK
        if w1 < a_lo or w0 > a_hi:
            pts.append(SpectrumPoint(math.nan, float(a), 0.0))
            outside.append(float(a))
            continue
        best = min(max(peak, w0, a_lo), w1, a_hi)
        pts.append(SpectrumPoint(math.nan, float(a), float(exact_binomial_spectrum(p, best))))
    meta = {"kind": "upper_bound", "lambda": lam, "p": p, "k": k, "log2_factor": c,
            "out_of_support": outside}
    return SpectrumCurve(pts, meta)


def figure_alpha_grid(p: float, lam: float, steps: int = 200) -> np.ndarray:
    a_lo, a_hi = binomial_support(p)
    c = abs(math.log2(lam))
    return np.linspace(a_lo / c - 0.1, a_hi / c + 0.1, steps)


def resample(curve: SpectrumCurve, alpha_grid) -> SpectrumCurve:
    """Curve values at ``alpha_grid`` by linear interpolation; points off its range are dropped."""
    grid = np.asarray(alpha_grid, float)
    a = curve.alpha
    q = np.array([pt.q for pt in curve.points])
    inside = (grid >= a[0]) & (grid <= a[-1])
    g = grid[inside]
    fv, qv = np.interp(g, a, curve.f), np.interp(g, a, q)
    pts = [SpectrumPoint(float(x), float(y), float(z)) for x, y, z in zip(qv, g, fv)]
    return SpectrumCurve(pts, dict(curve.meta))


def spectrum_bounds(lam: float, p: float, alpha_grid=None, k=None, q_grid=None) -> dict[str, SpectrumCurve]:
    """Lower, upper and the exact lam = 1/2 curve on one alpha grid."""
    grid = figure_alpha_grid(p, lam) if alpha_grid is None else np.asarray(alpha_grid, float)
    lower = resample(lower_bound_curve(lam, p, k, q_grid), grid)
    upper = upper_bound_curve(lam, p, grid)
    exact = resample(spectrum_curve([p, 1 - p], 0.5, q_grid, meta={"p": p, "lambda": 0.5}), grid)
    return {"lower": lower, "upper": upper, "exact": exact}


def sup_gap(lower: SpectrumCurve, upper: SpectrumCurve) -> float:
    """Largest upper - lower over the alphas where both curves are defined."""
    common, il, iu = np.intersect1d(lower.alpha, upper.alpha, return_indices=True)
    if common.size == 0:
        return math.nan
    return float(np.max(upper.f[iu] - lower.f[il]))


@dataclass(frozen=True)
class CoarseCounts:
    n_plus: int
    n_minus: int
    n_joint: int
    r: float
    alpha_plus: float
    alpha_minus: float
    scale: float

    def to_json(self) -> dict:
        return {
            "n_plus": self.n_plus,
            "n_minus": self.n_minus,
            "n_joint": self.n_joint,
            "r": self.r,
            "alpha_plus": self.alpha_plus,
            "alpha_minus": self.alpha_minus,
            "scale": self.scale,
        }


def coarse_counts(profile: MeshProfile, alpha_plus: float, alpha_minus: float, scale: float | None = None, permissive: bool = False) -> CoarseCounts:
    """Cells with measure >= s^alpha_plus and <= s^alpha_minus.

    ``s`` defaults to the cell diameter 2r.  Certified mode compares the
    enclosure ``lo`` for the first count and ``hi`` for the second, so both
    counts are lower bounds of the true ones; ``permissive`` uses midpoints.
    """
    if len(profile) == 0:
        raise PreconditionError("empty mesh profile")
    s = 2.0 * profile.r if scale is None else scale
    lo, hi = profile.lo, profile.hi
    if permissive:
        lo = hi = 0.5 * (profile.lo + profile.hi)
    with np.errstate(over="ignore", under="ignore"):
        t_plus, t_minus = s**alpha_plus, s**alpha_minus
    n_plus = int(np.count_nonzero(lo >= t_plus))
    n_minus = int(np.count_nonzero(hi <= t_minus))
    return CoarseCounts(n_plus, n_minus, min(n_plus, n_minus), profile.r, alpha_plus, alpha_minus, s)


def coarse_spectrum(params: Params, r_list, alpha_grid, eps: float = 0.05, depth: int = 40, threads=None, permissive=False, profiles=None) -> SpectrumCurve:
    """Finite-scale coarse spectrum: max over r of log N(alpha+eps, alpha-eps; r) / -log(2r)."""
    r_list = [float(r) for r in r_list]
    if any(b >= a for a, b in zip(r_list, r_list[1:])):
        raise DomainError("r_list must be strictly decreasing")
    if eps <= 0:
        raise DomainError("eps must be positive")
    grid = np.asarray(alpha_grid, float)
    if profiles is None:
        profiles = [mesh_profile(params, r, depth, threads) for r in r_list]
    table = []
    best = np.full(grid.shape, -np.inf)
    for prof in profiles:
        s = 2.0 * prof.r
        row = []
        for i, a in enumerate(grid):
            cc = coarse_counts(prof, a + eps, a - eps, s, permissive)
            val = math.log(cc.n_joint) / -math.log(s) if cc.n_joint > 0 else -math.inf
            best[i] = max(best[i], val)
            row.append(cc.n_joint)
        table.append({"r": prof.r, "n_joint": row})
    pts = [SpectrumPoint(math.nan, float(a), float(v)) for a, v in zip(grid, best) if v > -math.inf]
    meta = {
        "kind": "coarse",
        "lambda": params.lam,
        "p": params.p,
        "eps": eps,
        "r_list": r_list,
        "depth": depth,
        "permissive": permissive,
        "empirical": True,
        "empty_alpha": [float(a) for a, v in zip(grid, best) if v == -math.inf],
        "table": table,
    }
    return SpectrumCurve(pts, meta)


def _delta0(mu: float) -> tuple[float, int | None]:
    k = lambda_k_max(mu)
    if k is None:
        return 0.0, None
    return (k - 1) * math.log(2) / (k * abs(math.log(mu))), k


def holder_bound(lam: float) -> dict:
    """Uniform Hoelder exponent for the unbiased measure, boosted by convolution."""
    if not 0.5 < lam < 1:
        raise DomainError(f"lambda must lie in (1/2, 1), got {lam}")
    best, k_used, boost = 0.0, None, 1
    j = 1
    while lam**j > 0.5:
        d0, k = _delta0(lam**j)
        val = j * d0 - (j - 1)
        if k is not None and val > best:
            best, k_used, boost = val, k, j
        j += 1
    return {"delta": best, "k_used": k_used, "boost": boost}


def mesh_maxima(lam: float, p: float, levels, depth: int = 40, threads=None) -> list[dict]:
    """max_j hi_j over the mesh at r = 2^-n for each n in ``levels``."""
    params = Params(lam, p)
    out = []
    for n in levels:
        prof = mesh_profile(params, 2.0**-n, depth, threads)
        out.append({"n": int(n), "r": 2.0**-n, "max_hi": float(prof.hi.max())})
    return out


def typical_dim(lam: float, p: float, q: float) -> dict:
    for name, v in (("lambda", lam), ("p", p), ("q", q)):
        if not 0 < v < 1:
            raise DomainError(f"{name} must lie in (0, 1), got {v}")
    H = -q * math.log(p) - (1 - q) * math.log(1 - p)
    L = abs(math.log(lam))
    h = -q * math.log(q) - (1 - q) * math.log(1 - q)
    return {
        "H": H,
        "predicted": min(H / L, 1.0),
        "J_interval": [math.log(max(p, 1 - p)) / math.log(lam), 1.0],
        "regime": "singular" if H < L else "dimension_one",
        "alpha": H / L,
        "spectrum_lower": h / L,
    }


def typical_dim_mc(
    lam: float,
    p: float,
    q: float,
    samples: int = 200,
    n_digits: int = 60,
    radii=None,
    depth: int = 60,
    rng: np.random.Generator | None = None,
    threads=None,
) -> dict:
    """Monte-Carlo local-dimension slopes at points drawn from the q-biased measure.

    Diagnostic only: the matching statement holds for almost every lambda.
    """
    params = Params(lam, p)
    if not 0 < q < 1:
        raise DomainError(f"q must lie in (0, 1), got {q}")
    rng = np.random.default_rng(0) if rng is None else rng
    radii = 2.0 ** -np.arange(6, 31) if radii is None else np.asarray(radii, float)
    xs = sample_points(lam, q, n_digits, samples, rng)
    X = np.repeat(xs, len(radii))
    R = np.tile(radii, samples)
    lo, hi = nu_balls(params, X, R, depth, threads)
    lo, hi = lo.reshape(samples, -1), hi.reshape(samples, -1)
    slopes = []
    for a, b in zip(lo, hi):
        keep = a > 0
        if keep.sum() < 2:
            continue
        slopes.append(fit_log_log(np.log(radii[keep]), np.log(a[keep]), np.log(b[keep]))[0])
    slopes = np.array(slopes)
    expected = typical_dim(lam, p, q)
    return {
        "mean_slope": float(slopes.mean()) if slopes.size else math.nan,
        "sd": float(slopes.std(ddof=1)) if slopes.size > 1 else math.nan,
        "used": int(slopes.size),
        "samples": samples,
        "predicted": expected["predicted"],
        "exact_regime": lam == 0.5,
        "above_lambda_star": lam >= LAMBDA_STAR,
        "diagnostic": True,
    }
