"""Command-line entry point: ``bcmf <command> [flags]``."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import expansions as ex
from . import measure as ms
from . import spectrum as sp
from .errors import BcmfError
from .serialize import emit


def _real(text):
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a real number, got {text!r}")


def _positive(kind):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a positive {kind.__name__}, got {text!r}")
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
        return v

    return parse


def _count(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return v


def _seq(text):
    try:
        return ex.EPSequence.parse(text)
    except BcmfError as exc:
        raise argparse.ArgumentTypeError(str(exc))


LAM = P = Q = _real


def _common(parser, *, out=True, threads=False):
    if out:
        parser.add_argument("--format", choices=("json", "csv"), default="json")
        parser.add_argument("--out", default=None, help="output file (default: stdout)")
    if threads:
        parser.add_argument("--threads", type=_positive(int), default=os.cpu_count() or 1)


def _alpha_grid(parser):
    parser.add_argument("--alpha-min", type=float)
    parser.add_argument("--alpha-max", type=float)
    parser.add_argument("--alpha-steps", type=_positive(int), default=200)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bcmf", description="Multifractal analysis of Bernoulli convolutions.")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constants", help="golden, beta_1, Komornik-Loreti and multinacci constants")
    c.add_argument("--tol", type=_positive(float), default=1e-12)
    _common(c)

    c = sub.add_parser("expand", help="greedy or lazy digits of x, or of 1 with --one")
    c.add_argument("--lambda", dest="lam", type=LAM, required=True)
    c.add_argument("--x", type=float)
    c.add_argument("--one", action="store_true", help="expansion of 1 in base 1/lambda")
    c.add_argument("--quasi", action="store_true", help="quasi-greedy form for --one")
    c.add_argument("--mode", choices=("greedy", "lazy"), default="greedy")
    c.add_argument("--n", type=_count, default=40)
    c.add_argument("--tol", type=_positive(float), default=ex.TERMINATION_TOL)
    _common(c)

    c = sub.add_parser("unique", help="unique-expansion verdict for an eventually periodic sequence")
    c.add_argument("--lambda", dest="lam", type=LAM, required=True)
    c.add_argument("--seq", type=_seq, required=True)
    c.add_argument("--depth", type=_count, default=ex.DEFAULT_DEPTH)
    _common(c)

    c = sub.add_parser("gap", help="distance of the orbit from the overlap gap")
    c.add_argument("--lambda", dest="lam", type=LAM, required=True)
    c.add_argument("--seq", type=_seq, required=True)
    c.add_argument("--depth", type=_count, default=ex.DEFAULT_DEPTH)
    _common(c)

    c = sub.add_parser("measure", help="enclosure of nu([a, b])")
    c.add_argument("--lambda", dest="lam", type=LAM, required=True)
    c.add_argument("--p", type=P, required=True)
    c.add_argument("--a", type=float, required=True)
    c.add_argument("--b", type=float, required=True)
    c.add_argument("--depth", type=_count, default=ms.ENCLOSURE_DEPTH)
    _common(c)

    c = sub.add_parser("ball", help="enclosure of nu([x - r, x + r])")
    c.add_argument("--lambda", dest="lam", type=LAM, required=True)
    c.add_argument("--p", type=P, required=True)
    where = c.add_mutually_exclusive_group(required=True)
    where.add_argument("--x", type=float)
    where.add_argument("--seq", type=_seq, help="centre at the projection of SEQ")
    c.add_argument("--r", type=_positive(float), required=True)
    c.add_argument("--depth", type=_count, default=ms.ENCLOSURE_DEPTH)
    _common(c)

    c = sub.add_parser("localdim", help="local-dimension regression at a unique-expansion point")
    c.add_argument("--lambda", dest="lam", type=LAM, required=True)
    c.add_argument("--p", type=P, required=True)
    c.add_argument("--seq", type=_seq, required=True)
    c.add_argument("--nmin", type=_count, default=5)
    c.add_argument("--nmax", type=_count, default=25)
    c.add_argument("--source", choices=("symbolic", "numeric"), default="symbolic")
    c.add_argument("--depth", type=_count, default=ms.ENCLOSURE_DEPTH)
    _common(c)

    c = sub.add_parser("mesh", help="enclosures on the 2r-mesh of the support")
    c.add_argument("--lambda", dest="lam", type=LAM, required=True)
    c.add_argument("--p", type=P, required=True)
    c.add_argument("--r", type=_positive(float), required=True)
    c.add_argument("--depth", type=_count, default=ms.ENCLOSURE_DEPTH)
    _common(c, threads=True)

    spectra = sub.add_parser("spectrum", help="exact, bounding and coarse spectra")
    ssub = spectra.add_subparsers(dest="kind", required=True)
    c = ssub.add_parser("exact", help="Legendre spectrum for lambda <= 1/2")
    c.add_argument("--lambda", dest="lam", type=LAM, required=True)
    c.add_argument("--p", type=P, required=True)
    c.add_argument("--q-max", type=_positive(float), default=sp.Q_MAX)
    _common(c)
    c = ssub.add_parser("bounds", help="lower and upper bounds with the lambda = 1/2 curve")
    c.add_argument("--lambda", dest="lam", type=LAM, required=True)
    c.add_argument("--p", type=P, required=True)
    c.add_argument("--k", type=_positive(int))
    _alpha_grid(c)
    _common(c)
    c = ssub.add_parser("coarse", help="mesh-count spectrum estimate")
    c.add_argument("--lambda", dest="lam", type=LAM, required=True)
    c.add_argument("--p", type=P, required=True)
    c.add_argument("--r", type=_positive(float), action="append", required=True,
                   help="mesh radius; repeat for several scales")
    c.add_argument("--eps", type=_positive(float), default=0.05)
    c.add_argument("--depth", type=_count, default=ms.ENCLOSURE_DEPTH)
    c.add_argument("--permissive", action="store_true", help="use enclosure midpoints")
    _alpha_grid(c)
    _common(c, threads=True)

    c = sub.add_parser("holder", help="uniform Hoelder exponent, optionally with a mesh scan")
    c.add_argument("--lambda", dest="lam", type=LAM, required=True)
    c.add_argument("--p", type=P, default=0.5)
    c.add_argument("--nmin", type=_count)
    c.add_argument("--nmax", type=_count)
    c.add_argument("--depth", type=_count, default=ms.ENCLOSURE_DEPTH)
    _common(c, threads=True)

    c = sub.add_parser("typical", help="typical local dimension predictions")
    c.add_argument("--lambda", dest="lam", type=LAM, required=True)
    c.add_argument("--p", type=P, required=True)
    c.add_argument("--q", type=Q, required=True)
    _common(c)

    c = sub.add_parser("typical-mc", help="Monte-Carlo local dimension (diagnostic)")
    c.add_argument("--lambda", dest="lam", type=LAM, required=True)
    c.add_argument("--p", type=P, required=True)
    c.add_argument("--q", type=Q, required=True)
    c.add_argument("--samples", type=_positive(int), default=200)
    c.add_argument("--n", type=_positive(int), default=60, help="digits per sample point")
    c.add_argument("--nmin", type=_count, default=6)
    c.add_argument("--nmax", type=_count, default=30)
    c.add_argument("--depth", type=_count, default=60)
    c.add_argument("--seed", type=int, default=0)
    _common(c, threads=True)

    words = sub.add_parser("words", help="word constructions with prescribed digit frequency")
    wsub = words.add_subparsers(dest="kind", required=True)
    for name in ("freq", "multinacci"):
        c = wsub.add_parser(name)
        c.add_argument("--lambda", dest="lam", type=LAM, required=True)
        _common(c)
    return parser


def _grid(args, default):
    lo = default[0] if args.alpha_min is None else args.alpha_min
    hi = default[-1] if args.alpha_max is None else args.alpha_max
    if not lo < hi:
        raise BcmfError(f"need --alpha-min < --alpha-max, got {lo} and {hi}")
    return np.linspace(lo, hi, args.alpha_steps)


def _constants(args):
    out = {
        "golden": ex.solve_constant("golden", args.tol),
        "beta1": ex.solve_constant("beta_one", args.tol),
        "komornik_loreti": ex.solve_constant("komornik_loreti", args.tol),
    }
    for k in range(2, 9):
        out[f"multinacci_{k}"] = ex.solve_constant("multinacci", args.tol, k)
    if args.format == "csv":
        return [{"name": k, "value": v} for k, v in out.items()]
    return out


def _expand(args):
    if args.one:
        digits = ex.greedy_one(args.lam, args.n, quasi=args.quasi, tol=args.tol)
        return {"lambda": args.lam, "x": 1.0, "mode": "quasi_greedy" if args.quasi else "greedy", "digits": digits}
    if args.x is None:
        raise BcmfError("expand needs --x or --one")
    digits = ex.beta_digits(args.x, args.lam, args.mode, args.n)
    return {"lambda": args.lam, "x": args.x, "mode": args.mode, "digits": digits}


def _unique(args):
    v = ex.membership_U(args.seq, args.lam, args.depth)
    out = {"seq": str(args.seq), "lambda": args.lam, "status": v.status.value}
    if args.format == "csv":
        out.update(shift=v.shift, position=v.position)
    else:
        out["witness"] = v.to_json().get("witness")
    return out


def _gap(args):
    d = ex.gap_distance(args.seq, args.lam, args.depth)
    return {"seq": str(args.seq), "lambda": args.lam, "delta": d, "x": ex.pi(args.seq, args.lam)}


def _measure(args):
    return ms.nu_enclosure(ex.Params(args.lam, args.p), ms.Interval(args.a, args.b), args.depth)


def _ball(args):
    x = ex.pi(args.seq, args.lam) if args.seq is not None else args.x
    return ms.nu_ball(ex.Params(args.lam, args.p), x, args.r, args.depth)


def _localdim(args):
    est = ms.local_dim_estimate(
        ex.Params(args.lam, args.p), args.seq, (args.nmin, args.nmax), args.source, args.depth
    )
    if args.format == "csv":
        return [{"log_r": a, "log_lo": b, "log_hi": c} for a, b, c in est.points]
    return est


def _mesh(args):
    return ms.mesh_profile(ex.Params(args.lam, args.p), args.r, args.depth, args.threads)


def _spectrum(args):
    if args.kind == "exact":
        if args.lam > 0.5:
            raise BcmfError(f"exact spectrum needs lambda <= 1/2, got {args.lam}")
        return sp.spectrum_curve([args.p, 1 - args.p], args.lam, sp.default_q_grid(args.q_max),
                                 q_max=args.q_max, meta={"lambda": args.lam, "p": args.p})
    if args.kind == "bounds":
        grid = _grid(args, sp.figure_alpha_grid(args.p, args.lam, 2))
        curves = sp.spectrum_bounds(args.lam, args.p, grid, args.k)
        if args.format == "csv":
            return curves
        return {
            "meta": {"lambda": args.lam, "p": args.p, "alpha_steps": args.alpha_steps,
                     "sup_gap": sp.sup_gap(curves["lower"], curves["upper"])},
            **curves,
        }
    params = ex.Params(args.lam, args.p)
    grid = _grid(args, (0.0, 2.0))
    r_list = sorted(set(args.r), reverse=True)
    return sp.coarse_spectrum(params, r_list, grid, args.eps, args.depth, args.threads, args.permissive)


def _holder(args):
    out = sp.holder_bound(args.lam)
    if args.nmax is not None:
        nmin = 6 if args.nmin is None else args.nmin
        if not nmin <= args.nmax:
            raise BcmfError("need --nmin <= --nmax")
        scan = sp.mesh_maxima(args.lam, args.p, range(nmin, args.nmax + 1), args.depth, args.threads)
        d = out["delta"]
        for row in scan:
            row["ratio"] = row["max_hi"] / row["r"] ** d
        if args.format == "csv":
            return scan
        out = {**out, "p": args.p, "scan": scan, "C": max(row["ratio"] for row in scan)}
    return out


def _typical(args):
    out = sp.typical_dim(args.lam, args.p, args.q)
    if args.format == "csv":
        a, b = out.pop("J_interval")
        out.update(J_lo=a, J_hi=b)
    return out


def _typical_mc(args):
    if not args.nmin < args.nmax:
        raise BcmfError("need --nmin < --nmax")
    radii = 2.0 ** -np.arange(args.nmin, args.nmax + 1)
    rng = np.random.default_rng(args.seed)
    out = sp.typical_dim_mc(args.lam, args.p, args.q, args.samples, args.n, radii, args.depth, rng, args.threads)
    out["seed"] = args.seed
    return out


def _words(args):
    w = ex.freq_words(args.lam) if args.kind == "freq" else ex.multinacci_words(args.lam)
    out = w.to_json()
    if args.format == "csv":
        out = {k: (v if not isinstance(v, list) else " ".join(map(str, v))) for k, v in out.items()}
    return out


HANDLERS = {
    "constants": _constants,
    "expand": _expand,
    "unique": _unique,
    "gap": _gap,
    "measure": _measure,
    "ball": _ball,
    "localdim": _localdim,
    "mesh": _mesh,
    "spectrum": _spectrum,
    "holder": _holder,
    "typical": _typical,
    "typical-mc": _typical_mc,
    "words": _words,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        # out-of-range parameters are domain errors (exit 1), not usage errors
        for flag, attr in (("--lambda", "lam"), ("--p", "p"), ("--q", "q")):
            v = getattr(args, attr, None)
            if v is not None and not 0 < v < 1:
                raise BcmfError(f"{flag} must lie in (0, 1), got {v}")
        result = HANDLERS[args.command](args)
        emit(result, args.format, args.out)
    except (BcmfError, ValueError, OSError) as exc:
        print(f"bcmf {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
