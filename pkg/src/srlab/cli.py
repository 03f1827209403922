"""Command-line entry point: ``srlab <subcommand> ...``.

Exit status: 0 success, 1 precondition error, 2 numerical failure,
64 usage error.  Results go to ``--out`` (CSV when the name ends in
``.csv``, JSON otherwise) and a JSON summary is printed to stdout.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, is_dataclass

import numpy as np

from . import config
from .errors import NumericalFailure, PreconditionError
from .maps import (ConjugatedMap, load_map, map_from_dict, trig_diffeo, validate_expanding)

EXIT_OK, EXIT_PRECONDITION, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# io helpers


def _clean(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return _clean(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    return str(obj)


def _emit(payload, out=None, rows=None, header=None):
    """Write ``rows`` as CSV or ``payload`` as JSON to ``out``; print the payload."""
    data = _clean(payload)
    if out:
        if out.endswith(".csv"):
            if rows is None:
                raise PreconditionError("this command has no CSV output; use a .json name")
            with open(out, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(header)
                w.writerows(rows)
        else:
            with open(out, "w") as fh:
                json.dump(data, fh, indent=2, sort_keys=True)
                fh.write("\n")
    json.dump(data, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _fmt(v):
    return f"{v:.17g}" if isinstance(v, float) else v


def read_map(path):
    """A map file: a plain map specification, or
    ``{"base": spec, "normalize": bool, "conjugate_by": {"sine": [...], "cosine": [...]}}``
    (normalization is applied before the extra conjugation)."""
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise PreconditionError(f"{path}: invalid JSON ({exc})") from None
    if "base" not in data:
        return load_map(path)
    m = map_from_dict(data["base"])
    if data.get("normalize"):
        from .normalization import normalize_map

        m = normalize_map(m)
    conj = data.get("conjugate_by")
    if conj:
        m = ConjugatedMap(m, [trig_diffeo(tuple(conj.get("sine", ())), tuple(conj.get("cosine", ())))])
    return m


def _coeffs(text):
    if not text:
        return ()
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"bad coefficient list {text!r}") from None


def _trig_function(sine, cosine):
    s, c = _coeffs(sine), _coeffs(cosine)

    def D(x):
        x = np.asarray(x, float)
        out = np.zeros_like(x)
        for j, a in enumerate(s, 1):
            out += a * np.sin(2 * np.pi * j * x)
        for j, b in enumerate(c, 1):
            out += b * np.cos(2 * np.pi * j * x)
        return out

    return D


def _sparsity_params(args, d):
    from .spectrum import SparsityParams, default_sparsity_parameters

    beta0, gamma0, _ = default_sparsity_parameters(d)
    return SparsityParams(args.beta if args.beta is not None else beta0,
                          args.gamma if args.gamma is not None else gamma0,
                          args.cbeta, args.cgamma)


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args):
    m = read_map(args.map)
    rep = validate_expanding(m, args.grid)
    _emit(rep.as_dict(), args.out)


def cmd_orbits(args):
    from .orbits import enumerate_periodic

    recs = enumerate_periodic(read_map(args.map), args.period, args.primitive)
    rows = [[r.code, _fmt(r.point), r.period, _fmt(r.log_multiplier), f"{r.residual:.3e}"] for r in recs]
    _emit({"period": args.period, "count": len(recs),
           "max_residual": max(r.residual for r in recs)},
          args.out, rows, ["code", "point", "period", "log_multiplier", "residual"])


def cmd_spectrum(args):
    from .spectrum import length_spectrum

    spec = length_spectrum(read_map(args.map), args.max_level)
    rows = []
    for n in sorted(spec.levels):
        from .spectrum import _word

        for v, val in zip(spec.sorted_codes[n], spec.levels[n]):
            rows.append([n, _fmt(float(val)), _word(int(v), spec.degree, n)])
    _emit({"levels": spec.max_level, "entries": len(rows), "Lambda": spec.Lambda,
           "Omega": spec.Omega}, args.out, rows, ["level", "value", "code"])


def cmd_sparsity(args):
    from .spectrum import length_spectrum, sparsity_classify

    m = read_map(args.map)
    params = _sparsity_params(args, m.degree)
    verdict = sparsity_classify(length_spectrum(m, args.max_level), params)
    out = verdict.as_dict()
    out["params"] = asdict(params)
    _emit(out, args.out)


def cmd_marking(args):
    from .reconstruction import map_distance
    from .spectrum import code_marking, length_spectrum, recover_marking

    f, g = read_map(args.f), read_map(args.g)
    sf, sg = length_spectrum(f, args.max_level), length_spectrum(g, args.max_level)
    if args.oracle:
        table = code_marking(sf, sg, list(range(1, args.max_level + 1)))
        delta1 = math.nan
    else:
        delta1 = args.delta1 if args.delta1 is not None else map_distance(f, g)[1]
        table = recover_marking(sf, sg, delta1, _sparsity_params(args, f.degree), args.eta,
                                kappa0=args.kappa0)
    rows = [[k, r.code, _fmt(r.lambda_f), _fmt(r.lambda_g), _fmt(r.discrepancy)]
            for k in table.periods() for r in table.rows[k]]
    summary = {"delta1": delta1, "recovered_up_to": table.recovered_up_to,
               "requested_depth": table.requested_depth, "kappa0": table.kappa0,
               "code_consistent": table.code_consistent, "truncated": table.truncated,
               "oracle_assisted": table.oracle_assisted,
               "max_discrepancy": table.max_discrepancy(),
               "within_thresholds": table.within_thresholds()}
    _emit(summary, args.out, rows, ["period", "code", "lambda_f", "lambda_g", "discrepancy"])


def cmd_messenger(args):
    from .messengers import hybrid_messenger, messenger, messenger_survey

    m = read_map(args.map)
    if args.survey:
        res = [messenger_survey(m, n, p, q) for n in range(1, args.survey + 1)
               for p in range(1, args.p + 1) for q in range(1, args.q + 1)]
        _emit({"surveys": res, "all_bounds_ok": all(s.expansion_bounds_ok for s in res)}, args.out)
    elif args.hybrid:
        _emit(hybrid_messenger(m, args.hybrid, args.t, args.p).as_dict(), args.out)
    else:
        if not (args.minus and args.plus):
            raise UsageError("messenger needs --minus and --plus (or --hybrid / --survey)")
        _emit(messenger(m, args.minus, args.plus, args.p, args.q).as_dict(), args.out)


def cmd_livsic(args):
    from .livsic import (barrier_function, coboundary_residual, default_truncation,
                         fit_decay_rate, livsic_from_periodic_data, periodic_obstruction)
    from .sampled import SampledFunction

    g = read_map(args.map)
    fn = _trig_function(args.sine, args.cosine)
    if args.coboundary:
        v = fn

        def fn(x, _v=v):
            x = np.asarray(x, float)
            return _v(np.asarray(g.jet(x.reshape(-1), 0)[0]).reshape(x.shape)) - _v(x)
    D = SampledFunction.from_callable(fn, args.grid)
    S = args.truncation or default_truncation(g)
    u = barrier_function(g, D, S, args.grid)
    out = {"obstruction": {m: periodic_obstruction(g, D, m) for m in range(1, args.max_period + 1)},
           "truncation": S, "tail_bound": u.meta["tail_bound"],
           "residual": coboundary_residual(g, D, u)}
    if args.levels:
        lo, hi = (int(t) for t in args.levels.split(":"))
        reps = [livsic_from_periodic_data(g, D, n, S) for n in range(lo, hi + 1)]
        out["periodic_data"] = [r.as_dict() for r in reps]
        if len(reps) >= 2:
            out["fitted_exponent"] = fit_decay_rate([r.n for r in reps], [r.residual for r in reps])
    _emit(out, args.out)


def cmd_normalize(args):
    from .normalization import invariant_density, lebesgue_identity_residual, normalize_map

    m = read_map(args.map)
    dens = invariant_density(m, args.grid, args.tol)
    nm = normalize_map(m, dens)
    rows = [[_fmt(float(x)), _fmt(float(t))] for x, t in zip(dens.density.grid, dens.values)]
    _emit({"iterations": dens.iterations, "last_change": dens.last_change,
           "fixed_point_residual": dens.residual,
           "identity_residual": lebesgue_identity_residual(nm)},
          args.out, rows, ["x", "theta"])


def cmd_whitney(args):
    from .orbits import enumerate_batch
    from .whitney import extend_correspondence

    f, g = read_map(args.f), read_map(args.g)
    src = enumerate_batch(g, args.period).points
    dst = enumerate_batch(f, args.period).points
    w = extend_correspondence(src, dst, args.r)
    x = np.arange(args.samples) / args.samples
    J = w.h.jet(x, 1)
    rows = [[_fmt(float(a)), _fmt(float(b)), _fmt(float(c))] for a, b, c in zip(x, J[0], J[1])]
    _emit({"degree": w.degree, "downgraded": w.downgraded, "A": w.A, "o": w.o,
           "norms": w.norms, "divided": w.divided, "divided_bounds": w.divided_bounds,
           "divided_within_bounds": w.divided_within_bounds, "interpolation_error": w.interpolation_error,
           "min_derivative": w.min_derivative, "notes": w.notes},
          args.out, rows, ["x", "h", "h_prime"])


def cmd_reconstruct(args):
    from .reconstruction import ReconstructionConfig, run_scheme

    f, g = read_map(args.f), read_map(args.g)
    cfg = ReconstructionConfig(kappa0=args.kappa0, max_k=args.max_k, mode=args.mode, r=args.r,
                               tau=args.tau, oracle_depth=args.oracle_depth)
    res = run_scheme(f, g, cfg)
    series = [d.as_dict() for d in res.diagnostics]
    payload = {"stop_reason": res.stop_reason, "final_error": res.final_error,
               "decay_factor": res.decay_factor, "oracle_assisted": res.oracle_assisted,
               "holder_exponent": res.oracle.holder_exponent if res.oracle else None,
               "series": series}
    if args.out and not args.out.endswith(".csv"):
        stem = args.out[:-5] if args.out.endswith(".json") else args.out
        with open(stem + ".csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "h_c0", "distance_c0", "distance_c1", "rolle_bound", "phi_c0",
                        "psi_c0", "cauchy", "oracle_error"])
            for d in res.diagnostics:
                w.writerow([d.k, _fmt(d.h_norms[0]), _fmt(d.distance_c0), _fmt(d.distance_c1),
                            _fmt(d.rolle_bound), _fmt(d.phi_c0), _fmt(d.psi_c0), _fmt(d.cauchy),
                            _fmt(d.oracle_error)])
    _emit(payload, args.out)


def cmd_counterexample(args):
    from .counterexample import build_pair, find_multiplier_mismatch, verify_isospectral

    pair = build_pair(args.epsilon)
    f, g = pair
    iso = verify_isospectral(f, g, args.max_level, args.tol)
    rows = find_multiplier_mismatch(f, g, min(args.max_level, args.table_level))
    table = [[r.code, _fmt(r.lambda_f), _fmt(r.lambda_g), _fmt(r.discrepancy)] for r in rows]
    _emit({"epsilon": pair.epsilon, "degenerate": pair.degenerate,
           "isospectral": iso.isospectral, "per_level_distance": iso.per_level,
           "mismatches": [asdict(r) for r in rows[:args.show]], "mismatch_count": len(rows)},
          args.out, table, ["code", "lambda_f", "lambda_g", "discrepancy"])


# ---------------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="srlab", description="Expanding circle maps: periodic data and conjugacies")
    p.add_argument("--threads", type=int, default=1, help="worker threads for batch location")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, fn, help_):
        s = sub.add_parser(name, help=help_)
        s.set_defaults(func=fn)
        s.add_argument("--out", help="output file (.csv or .json)")
        s.add_argument("--threads", type=int, default=argparse.SUPPRESS, help=argparse.SUPPRESS)
        return s

    s = cmd("validate", cmd_validate, "expansion constants and distance to linear")
    s.add_argument("--map", required=True)
    s.add_argument("--grid", type=int, default=1 << 14)

    s = cmd("orbits", cmd_orbits, "periodic points of one period")
    s.add_argument("--map", required=True)
    s.add_argument("--period", type=int, required=True)
    s.add_argument("--primitive", action="store_true", help="only points of minimal period")

    s = cmd("spectrum", cmd_spectrum, "log-multipliers per level")
    s.add_argument("--map", required=True)
    s.add_argument("--max-level", type=int, required=True)

    def sparsity_flags(s):
        s.add_argument("--beta", type=float)
        s.add_argument("--gamma", type=float)
        s.add_argument("--cbeta", type=float, default=1.0)
        s.add_argument("--cgamma", type=float, default=1.0)

    s = cmd("sparsity", cmd_sparsity, "(beta, gamma)-sparsity of a spectrum")
    s.add_argument("--map", required=True)
    s.add_argument("--max-level", type=int, required=True)
    sparsity_flags(s)

    s = cmd("marking", cmd_marking, "match two spectra")
    s.add_argument("--f", required=True)
    s.add_argument("--g", required=True)
    s.add_argument("--max-level", type=int, required=True)
    s.add_argument("--delta1", type=float)
    s.add_argument("--eta", type=float, default=2.0)
    s.add_argument("--kappa0", type=int)
    s.add_argument("--oracle", action="store_true", help="mark by codes")
    sparsity_flags(s)

    s = cmd("messenger", cmd_messenger, "messenger orbits")
    s.add_argument("--map", required=True)
    s.add_argument("--minus")
    s.add_argument("--plus")
    s.add_argument("--p", type=int, default=1)
    s.add_argument("--q", type=int, default=1)
    s.add_argument("--hybrid", help="code of x_i for a hybrid messenger")
    s.add_argument("--t", type=int, default=1)
    s.add_argument("--survey", type=int, help="survey all pairs for periods 1..N")

    s = cmd("livsic", cmd_livsic, "cohomological equation for a trigonometric D")
    s.add_argument("--map", required=True)
    s.add_argument("--sine", default="")
    s.add_argument("--cosine", default="")
    s.add_argument("--coboundary", action="store_true",
                   help="treat the coefficients as v and use D = v o g - v")
    s.add_argument("--max-period", type=int, default=8)
    s.add_argument("--truncation", type=int)
    s.add_argument("--grid", type=int, default=4096)
    s.add_argument("--levels", help="LO:HI range for the periodic-data pipeline")

    s = cmd("normalize", cmd_normalize, "invariant density and normalizing conjugacy")
    s.add_argument("--map", required=True)
    s.add_argument("--grid", type=int, default=4096)
    s.add_argument("--tol", type=float, default=1e-12)

    s = cmd("whitney", cmd_whitney, "extend the period-k correspondence between g and f")
    s.add_argument("--f", required=True)
    s.add_argument("--g", required=True)
    s.add_argument("--period", type=int, required=True)
    s.add_argument("--r", type=int, default=1)
    s.add_argument("--samples", type=int, default=1024)

    s = cmd("reconstruct", cmd_reconstruct, "run the inductive reconstruction scheme")
    s.add_argument("--f", required=True)
    s.add_argument("--g", required=True)
    s.add_argument("--kappa0", type=int, default=4)
    s.add_argument("--max-k", type=int, default=12)
    s.add_argument("--mode", choices=["spectrum", "oracle"], default="oracle")
    s.add_argument("--r", type=int, default=1)
    s.add_argument("--tau", type=float, default=0.5)
    s.add_argument("--oracle-depth", type=int, default=12)

    s = cmd("counterexample", cmd_counterexample, "iso-spectral pair with mismatched marking")
    s.add_argument("--epsilon", type=float, default=0.1)
    s.add_argument("--max-level", type=int, default=10)
    s.add_argument("--table-level", type=int, default=6, help="deepest period in the mismatch table")
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--show", type=int, default=20, help="mismatches listed on stdout")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        threads = args.threads
        if threads < 1:
            raise UsageError("--threads must be positive")
        config.set_threads(threads)
        args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"srlab: usage error: {exc}\n")
        return EXIT_USAGE
    except (PreconditionError, FileNotFoundError) as exc:
        sys.stderr.write(f"srlab: precondition error: {exc}\n")
        return EXIT_PRECONDITION
    except NumericalFailure as exc:
        sys.stderr.write(f"srlab: numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    finally:
        config.set_threads(1)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
