"""Command-line entry point.

Every subcommand writes CSV/JSON files; parameters can come from flags, from a
flat ``key = value`` config file (``--config``), or from defaults, in that
order of precedence.

Exit codes: 0 success, 2 usage or validation error, 3 non-convergence under
``--strict``.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import secrets
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import cyclic_align, hill_sweep
from .apoptosis import ApoptosisModel, exp_source, hamming_like, rectified_squared
from .blahut import (
    BaaConfig,
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    baa_solve,
    default_lambda_grid,
    rd_curve,
    solve_for_distortion,
)
from .errors import NotConverged, RatelensError
from .ibaa import ibaa_from_counts, roundtrip_validate
from .legi import LegiParams, SimConfig, simulate_with_metadata
from .matrix_io import (
    MatrixFormatError,
    read_matrix_csv,
    write_matrix_csv,
    write_rows_csv,
    write_sidecar,
)
from .probcore import CountMatrix, DistortionMatrix, Pmf, joint_from_strategy

EXIT_OK, EXIT_USAGE, EXIT_STRICT = 0, 2, 3
THREADS_ENV = "RATELENS_THREADS"


class UsageError(Exception):
    pass


# -- argument types -----------------------------------------------------------

def _finite(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return v


def _positive(text: str) -> float:
    v = _finite(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _count(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2**64)")
    return v


def _float_list(text: str) -> list[float]:
    parts = [p for p in str(text).replace(";", ",").split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("empty list")
    return [_finite(p.strip()) for p in parts]


def _int_list(text: str) -> list[int]:
    parts = [p for p in str(text).split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("empty list")
    return [_count(p.strip()) for p in parts]


# -- parser ------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _apoptosis_args(p):
    g = p.add_argument_group("apoptosis model")
    g.add_argument("--model", choices=["apoptosis", "file"], default="apoptosis")
    g.add_argument("--distortion", choices=["hamming", "squared"], default="hamming")
    g.add_argument("--distortion-file", help="distortion matrix CSV (model=file)")
    g.add_argument("--source-file", help="one-row CSV with the source pmf (model=file)")
    g.add_argument("--gamma", type=_positive, default=0.5)
    g.add_argument("--unit-scale", type=_positive, default=100.0)
    g.add_argument("--x-max", type=_count, default=2000)
    g.add_argument("--x-th", type=_count, default=600)
    g.add_argument("--squared-denominator", type=_positive, default=20000.0)


def _solver_args(p):
    g = p.add_argument_group("solver")
    g.add_argument("--tol", type=_positive, default=DEFAULT_TOL)
    g.add_argument("--max-iter", type=_count, default=DEFAULT_MAX_ITER)
    g.add_argument("--strict", action="store_true",
                   help="exit 3 if any solve hits the iteration cap")


def _legi_args(p):
    g = p.add_argument_group("LEGI model")
    g.add_argument("--a", type=_finite, default=220.0)
    g.add_argument("--b", type=_finite, default=20.0)
    g.add_argument("--k-d", type=_finite, default=200.0)
    g.add_argument("--r-t", type=_count, default=1000)
    g.add_argument("--n-sectors", type=_count, default=100)
    g.add_argument("--trials", type=_count, default=20_000_000)
    g.add_argument("--seed", type=_seed, default=None)
    g.add_argument("--mode", choices=["accumulate", "sample"], default="sample")


def _common(p):
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--threads", type=_count, default=None,
                   help=f"worker cap (falls back to ${THREADS_ENV})")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ratelens", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("rd-curve", help="trace R(D) over a lambda grid")
    _apoptosis_args(p)
    _solver_args(p)
    p.add_argument("--lambda-grid", type=_float_list, default=None,
                   help="comma-separated lambdas (default: 60 points in [1e-2, 1e2])")
    p.add_argument("--out", required=True)
    _common(p)

    p = sub.add_parser("rd-strategy", help="optimal strategy for one lambda or target D")
    _apoptosis_args(p)
    _solver_args(p)
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--lambda", dest="lam", type=_finite)
    grp.add_argument("--target-d", type=_finite)
    p.add_argument("--out", required=True)
    _common(p)

    p = sub.add_parser("ibaa", help="recover a distortion matrix from counts")
    p.add_argument("--counts", required=True)
    p.add_argument("--out", required=True)
    _common(p)

    p = sub.add_parser("sim-legi", help="Monte Carlo LEGI joint counts")
    _legi_args(p)
    p.add_argument("--hill", type=_count, default=1)
    p.add_argument("--out", required=True)
    _common(p)

    p = sub.add_parser("sim-apoptosis", help="sample counts from an optimal apoptosis strategy")
    _apoptosis_args(p)
    _solver_args(p)
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--lambda", dest="lam", type=_finite)
    grp.add_argument("--target-d", type=_finite)
    p.add_argument("--samples", type=_count, default=10_000_000)
    p.add_argument("--seed", type=_seed, default=None)
    p.add_argument("--out", required=True)
    _common(p)

    p = sub.add_parser("align", help="cyclic shift alignment of a sector distortion matrix")
    p.add_argument("--distortion-file", required=True)
    p.add_argument("--per-row", action="store_true", help="append one column per source row")
    p.add_argument("--out", required=True)
    _common(p)

    p = sub.add_parser("hill-sweep", help="mean aligned distortion per Hill coefficient")
    _legi_args(p)
    p.add_argument("--hills", type=_int_list, default=[1, 3, 5, 7, 9, 11, 13, 15])
    p.add_argument("--out-dir", required=True)
    _common(p)

    p = sub.add_parser("roundtrip", help="forward BAA then IBAA, report recovery error")
    _apoptosis_args(p)
    _solver_args(p)
    p.add_argument("--lambda", dest="lam", type=_finite, required=True)
    p.add_argument("--out", help="report JSON (stdout if omitted)")
    p.set_defaults(tol=1e-12)
    _common(p)

    return parser


# -- config handling -----------------------------------------------------------

def read_config(path) -> dict[str, str]:
    out = {}
    for n, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _scan_config(argv):
    """Locate the subcommand and ``--config`` value before full parsing."""
    command = next((t for t in argv if t in COMMANDS), None)
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    return command, path


def _apply_config(parser, argv):
    argv = list(sys.argv[1:] if argv is None else argv)
    command, path = _scan_config(argv)
    if command is not None and path:
        try:
            cfg = read_config(path)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}")
        subparser = parser._subparsers._group_actions[0].choices[command]
        actions = {a.dest: a for a in subparser._actions}
        defaults = {}
        for key, text in cfg.items():
            if key == "lambda":
                key = "lam"
            act = actions.get(key)
            if act is None or key in ("config", "help"):
                raise UsageError(f"unknown config key {key!r} for {command}")
            if act.nargs == 0:
                defaults[key] = text.lower() in ("1", "true", "yes", "on")
                continue
            try:
                value = act.type(text) if act.type else text
            except argparse.ArgumentTypeError as exc:
                raise UsageError(f"config key {key!r}: {exc}")
            if act.choices is not None and value not in act.choices:
                raise UsageError(f"config key {key!r}: invalid choice {value!r}")
            defaults[key] = value
        subparser.set_defaults(**defaults)
        # options supplied by the config file are no longer required on the command line
        for key in defaults:
            actions[key].required = False
        for grp in subparser._mutually_exclusive_groups:
            if any(a.dest in defaults for a in grp._group_actions):
                grp.required = False
    ns = parser.parse_args(argv)
    if ns.command is None:
        parser.print_usage(sys.stderr)
        raise UsageError("ratelens: error: a subcommand is required")
    return ns


def _threads(ns) -> int:
    if getattr(ns, "threads", None):
        return ns.threads
    env = os.environ.get(THREADS_ENV, "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"${THREADS_ENV} must be an integer, got {env!r}")
    return 1


def _resolve_seed(ns) -> int:
    if ns.seed is None:
        ns.seed = secrets.randbits(63)
        print(f"seed: {ns.seed}", file=sys.stderr)
    return ns.seed


# -- model assembly ---------------------------------------------------------

def _apoptosis_problem(ns):
    if ns.model == "file":
        if not ns.distortion_file or not ns.source_file:
            raise UsageError("--model file needs --distortion-file and --source-file")
        dv, xa, ya = read_matrix_csv(ns.distortion_file)
        if np.any(dv < 0):
            raise UsageError(f"{ns.distortion_file}: distortion entries must be nonnegative")
        pv, _, pa = read_matrix_csv(ns.source_file)
        if pv.shape[0] != 1 or np.any(pv < 0) or pv.sum() <= 0:
            raise UsageError(f"{ns.source_file}: expected one row of nonnegative weights")
        if tuple(pa.labels) != tuple(xa.labels):
            raise UsageError("source labels do not match distortion row labels")
        meta = {"model": "file", "distortion_file": ns.distortion_file,
                "source_file": ns.source_file}
        return Pmf.from_weights(pv[0], xa), DistortionMatrix(dv, xa, ya), meta
    m = ApoptosisModel(ns.gamma, ns.unit_scale, ns.x_max, ns.x_th, ns.squared_denominator)
    d = hamming_like(m) if ns.distortion == "hamming" else rectified_squared(m)
    meta = {"model": "apoptosis", "distortion": ns.distortion, "gamma": m.gamma,
            "unit_scale": m.unit_scale, "x_max": m.x_max, "x_th": m.x_th,
            "squared_denominator": m.squared_denominator}
    return exp_source(m), d, meta


def _legi_params(ns, hill) -> LegiParams:
    return LegiParams(ns.a, ns.b, ns.k_d, ns.r_t, ns.n_sectors, hill)


def _solve(ns, p_x, d):
    if ns.lam is not None:
        if ns.lam < 0:
            raise UsageError("--lambda must be >= 0")
        return baa_solve(p_x, d, BaaConfig(ns.lam, ns.tol, ns.max_iter), strict=ns.strict)
    res = solve_for_distortion(p_x, d, ns.target_d, tol=ns.tol, max_iter=ns.max_iter)
    if ns.strict and not res.converged:
        raise NotConverged(f"solve for D={ns.target_d} did not converge")
    return res


def _ticker(label):
    def tick(frac):
        print(f"{label}: {frac:4.0%}", file=sys.stderr)
    return tick


# -- commands ------------------------------------------------------------------

def cmd_rd_curve(ns) -> int:
    p_x, d, meta = _apoptosis_problem(ns)
    grid = ns.lambda_grid if ns.lambda_grid is not None else default_lambda_grid()
    if any(v < 0 for v in grid):
        raise UsageError("--lambda-grid values must be >= 0")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NotConverged)
        curve = rd_curve(p_x, d, grid, ns.tol, ns.max_iter, workers=_threads(ns))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    rows = zip(curve.lambdas, curve.rates, curve.distortions, curve.iterations,
               ["true" if c else "false" for c in curve.converged])
    write_rows_csv(ns.out, ["lambda", "rate_bits", "distortion", "iterations", "converged"],
                   rows)
    write_sidecar(ns.out, {**meta, "tol": ns.tol, "max_iter": ns.max_iter,
                           "lambda_grid": [float(v) for v in curve.lambdas]})
    if ns.strict and not curve.converged.all():
        return EXIT_STRICT
    return EXIT_OK


def cmd_rd_strategy(ns) -> int:
    p_x, d, meta = _apoptosis_problem(ns)
    res = _solve(ns, p_x, d)
    write_matrix_csv(ns.out, res.strategy.rows, d.x_alphabet, d.y_alphabet)
    write_sidecar(ns.out, {**meta, "lambda": res.lam, "rate_bits": res.rate_bits,
                           "distortion": res.expected_distortion, "iterations": res.iterations,
                           "converged": res.converged, "tol": ns.tol,
                           "output_dist": res.output_dist.probs.tolist()})
    return EXIT_OK


def cmd_ibaa(ns) -> int:
    values, xa, ya = read_matrix_csv(ns.counts)
    bad = np.argwhere(values < 0)
    if bad.size:
        i, j = bad[0]
        raise UsageError(f"{ns.counts}: negative count at row {xa.labels[i]!r}, "
                         f"column {ya.labels[j]!r}")
    res = ibaa_from_counts(CountMatrix(values, xa, ya))
    write_matrix_csv(ns.out, res.distortion.values, xa, ya)
    write_sidecar(ns.out, {**res.sidecar(), "counts_file": str(ns.counts)})
    return EXIT_OK


def cmd_sim_legi(ns) -> int:
    params = _legi_params(ns, ns.hill)
    seed = _resolve_seed(ns)
    counts, meta = simulate_with_metadata(
        params, SimConfig(ns.trials, seed, ns.mode), workers=_threads(ns),
        progress=_ticker("sim-legi"),
    )
    write_matrix_csv(ns.out, counts.counts, counts.x_alphabet, counts.y_alphabet)
    write_sidecar(ns.out, meta)
    return EXIT_OK


def cmd_sim_apoptosis(ns) -> int:
    p_x, d, meta = _apoptosis_problem(ns)
    seed = _resolve_seed(ns)
    res = _solve(ns, p_x, d)
    joint = joint_from_strategy(p_x, res.strategy).probs
    rng = np.random.Generator(np.random.PCG64(seed))
    counts = rng.multinomial(ns.samples, joint.ravel() / joint.sum()).reshape(joint.shape)
    write_matrix_csv(ns.out, counts, d.x_alphabet, d.y_alphabet)
    write_sidecar(ns.out, {**meta, "lambda": res.lam, "seed": seed, "samples": ns.samples,
                           "rate_bits": res.rate_bits, "distortion": res.expected_distortion,
                           "tol": ns.tol})
    return EXIT_OK


def cmd_align(ns) -> int:
    values, xa, ya = read_matrix_csv(ns.distortion_file)
    ap = cyclic_align(DistortionMatrix(values, xa, ya))
    header = ["shift_radians", "mean_distortion"]
    cols = [ap.shifts, ap.mean]
    if ns.per_row:
        header += [f"theta_s={lab}" for lab in xa.labels]
        cols += list(ap.per_row)
    write_rows_csv(ns.out, header, zip(*cols))
    return EXIT_OK


def cmd_hill_sweep(ns) -> int:
    out_dir = Path(ns.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = _resolve_seed(ns)
    base = _legi_params(ns, 1)
    sim = SimConfig(ns.trials, seed, ns.mode)
    summaries = []
    for h in ns.hills:
        (res,) = hill_sweep(base, [h], sim, workers=_threads(ns))
        path = out_dir / f"profile_h{h}.csv"
        write_rows_csv(path, ["shift_radians", "mean_distortion"], zip(res.shifts, res.mean))
        summary = {**res.as_dict(), "seed": seed, "trials": ns.trials, "mode": ns.mode,
                   "params": {"a": base.a, "b": base.b, "k_d": base.k_d, "r_t": base.r_t,
                              "n_sectors": base.n_sectors}}
        write_sidecar(path, summary)
        summaries.append(summary)
        print(f"hill-sweep: h={h} done", file=sys.stderr)
    (out_dir / "summary.json").write_text(json.dumps(summaries, indent=2) + "\n")
    return EXIT_OK


def cmd_roundtrip(ns) -> int:
    p_x, d, meta = _apoptosis_problem(ns)
    if ns.lam < 0:
        raise UsageError("--lambda must be >= 0")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NotConverged)
        rep = roundtrip_validate(p_x, d, ns.lam, ns.tol, ns.max_iter, strict=ns.strict)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    payload = {**rep.as_dict(), **meta, "tol": ns.tol}
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if ns.out:
        Path(ns.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "rd-curve": cmd_rd_curve,
    "rd-strategy": cmd_rd_strategy,
    "ibaa": cmd_ibaa,
    "sim-legi": cmd_sim_legi,
    "sim-apoptosis": cmd_sim_apoptosis,
    "align": cmd_align,
    "hill-sweep": cmd_hill_sweep,
    "roundtrip": cmd_roundtrip,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = _apply_config(parser, argv)
        return COMMANDS[ns.command](ns)
    except SystemExit as exc:  # --help / --version
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STRICT
    except (RatelensError, MatrixFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
