"""Command-line front end.

Exit codes: 0 success (Controllable for ``certify``, all checks passed for
``verify``), 1 input or usage error (including inputs that push the
computation past double precision), 2 NotAccessible, 3 Inconclusive (also
used by ``diag`` when no Cartan frame exists), 4 a ``verify`` check failed.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .certify import CartanFrameError, Verdict, certify, diagonalize_cartan, sample_generic
from .flow import ControlSignal, reach_probe_trace, simulate
from .hmat import HMatrix, study_det_abs
from .lie import ClosureUnstable
from .verify import SUITES, RunConfig, run_suite

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_ACCESSIBLE = 2
EXIT_INCONCLUSIVE = 3
EXIT_CHECK_FAILED = 4

_VERDICT_EXIT = {
    Verdict.CONTROLLABLE: EXIT_OK,
    Verdict.NOT_ACCESSIBLE: EXIT_NOT_ACCESSIBLE,
    Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def _matrix(obj, key: str, path: str) -> HMatrix:
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"{path}: missing key {key!r}")
    try:
        return HMatrix.from_json(obj[key])
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: bad matrix {key!r}: {exc}") from None


def _system(path: str) -> tuple[HMatrix, HMatrix]:
    obj = _load_json(path)
    a, b = _matrix(obj, "A", path), _matrix(obj, "B", path)
    if a.n != b.n:
        raise InputError(f"{path}: size mismatch, A is {a.n}x{a.n} and B is {b.n}x{b.n}")
    return a, b


def _config(args) -> RunConfig:
    try:
        return RunConfig(tol=args.tol, Q=args.Q, seed=args.seed, max_depth=args.max_depth,
                         output_path=args.out)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _emit(args, payload: dict, summary: str | None = None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=None if args.json else 2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    if summary and not args.json:
        sys.stderr.write(summary + "\n")


# ----------------------------------------------------------------------------
# subcommands


def cmd_certify(args) -> int:
    cfg = _config(args)
    a, b = _system(args.input)
    if a.n < 2:
        raise InputError("certification needs n >= 2")
    try:
        cert = certify(a, b, Q=cfg.Q, tol=cfg.tol, max_depth=cfg.max_depth, seed=cfg.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _emit(args, cert.to_json(), f"verdict: {cert.verdict.value}" + (f" ({cert.reason})" if cert.reason else ""))
    return _VERDICT_EXIT[cert.verdict]


def cmd_verify(args) -> int:
    if args.suite != "all" and args.suite not in SUITES:
        raise InputError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES + ('all',))}")
    cfg = _config(args)
    if args.trials is not None:
        cfg.generic_trials = args.trials
    report = run_suite(args.suite, cfg)
    _emit(args, report.to_json(), "\n".join(
        f"{'PASS' if c.passed else 'FAIL'}  {c.name}" for c in report.checks))
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_simulate(args) -> int:
    a, b = _system(args.input)
    obj = _load_json(args.input)
    g0 = _matrix(obj, "g0", args.input) if "g0" in obj else None
    try:
        signal = ControlSignal.from_json(_load_json(args.signal))
        res = simulate(a, b, signal, g0=g0, renorm=not args.no_renorm,
                       keep_snapshots=args.trajectory is not None)
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc)) from None
    if args.trajectory:
        with open(args.trajectory, "w", encoding="utf-8") as fh:
            for g in res.snapshots:
                fh.write(json.dumps(g.to_json(), sort_keys=True) + "\n")
    payload = {"g": res.g.to_json(), "det_drift": res.det_drift, "det_abs": study_det_abs(res.g),
               "segments": len(signal), "duration": signal.duration}
    _emit(args, payload, f"|det| drift: {res.det_drift:.3e}")
    return EXIT_OK


def cmd_reach(args) -> int:
    a, b = _system(args.input)
    obj = _load_json(args.input)
    target = _matrix(obj, "target", args.input) if "target" in obj else HMatrix.identity(a.n)
    if target.n != a.n:
        raise InputError("target has the wrong size")
    if abs(study_det_abs(target) - 1.0) > 1e-8:
        raise InputError("target must have |det| = 1")
    if args.budget < 1:
        raise InputError("budget must be at least 1")
    trace = reach_probe_trace(a, b, target, args.budget, seed=args.seed)
    checkpoints = sorted({k for k in (1, 10, 100, 1000, 10_000, 100_000, args.budget) if k <= args.budget})
    payload = {
        "best_dist": trace.best_dist,
        "best_signal": trace.best_signal.to_json(),
        "budget": args.budget,
        "seed": args.seed,
        "checkpoints": {str(k): float(trace.history[k - 1]) for k in checkpoints},
        "note": "heuristic search; a small distance is evidence, not proof, of reachability",
    }
    _emit(args, payload, f"best distance {trace.best_dist:.4g} after {args.budget} candidates")
    return EXIT_OK


def cmd_diag(args) -> int:
    obj = _load_json(args.input)
    b = _matrix(obj, "B", args.input) if isinstance(obj, dict) and "B" in obj else None
    if b is None:
        try:
            b = HMatrix.from_json(obj)
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"{args.input}: expected {{'B': matrix}} or a matrix: {exc}") from None
    try:
        frame = diagonalize_cartan(b)
    except CartanFrameError as exc:
        _emit(args, {"error": exc.reason, "detail": str(exc)}, f"no Cartan frame: {exc}")
        return EXIT_INCONCLUSIVE
    _emit(args, frame.to_json(), f"residual {frame.residual:.3e}")
    return EXIT_OK


def cmd_sample(args) -> int:
    cfg = _config(args)
    if args.trials < 1:
        raise InputError("trials must be at least 1")
    if args.n < 2:
        raise InputError("n must be at least 2")
    stats = sample_generic(args.n, args.trials, seed=cfg.seed, Q=cfg.Q, tol=cfg.tol,
                           conjugations=args.conjugations, n_jobs=args.jobs)
    _emit(args, stats.to_json(), f"H1 fraction {stats.h1_fraction:.4f}, "
                                 f"Controllable fraction {stats.controllable_fraction:.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9, help="relative tolerance (default 1e-9)")
    common.add_argument("--Q", type=int, default=10_000, help="irrationality resolution (default 10000)")
    common.add_argument("--seed", type=int, default=0, help="master random seed (default 0)")
    common.add_argument("--max-depth", type=int, default=None, help="bracket generations before giving up")
    common.add_argument("--out", default=None, help="write the JSON result here instead of stdout")
    common.add_argument("--json", action="store_true", help="compact JSON only, no summary on stderr")

    parser = _Parser(prog="quatlie", description="Controllability certificates for invariant systems on Sl(n,H).")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("certify", parents=[common], help="check the sufficient conditions for a pair (A, B)")
    p.add_argument("input", help='JSON file {"A": matrix, "B": matrix}')
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify", parents=[common], help="run a battery of numerical checks")
    p.add_argument("suite", help=f"one of {', '.join(SUITES + ('all',))}")
    p.add_argument("--trials", type=int, default=None, help="override the number of generic trials")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", parents=[common], help="integrate g' = (A + uB) g")
    p.add_argument("input", help='JSON file {"A", "B", optional "g0"}')
    p.add_argument("signal", help='JSON file {"segments": [[duration, u], ...]}')
    p.add_argument("--trajectory", default=None, help="write one matrix per segment as JSON lines")
    p.add_argument("--no-renorm", action="store_true", help="do not renormalize |det| after each segment")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reach", parents=[common], help="search for a control signal steering I toward a target")
    p.add_argument("input", help='JSON file {"A", "B", optional "target"}')
    p.add_argument("--budget", type=int, default=1000, help="number of candidate signals")
    p.set_defaults(func=cmd_reach)

    p = sub.add_parser("diag", parents=[common], help="move B into its complex-diagonal Cartan frame")
    p.add_argument("input", help='JSON file {"B": matrix} or a bare matrix')
    p.set_defaults(func=cmd_diag)

    p = sub.add_parser("sample", parents=[common], help="frequency of the conditions on Gaussian pairs")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--conjugations", type=int, default=100)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ClosureUnstable) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"error: numerical breakdown, the input drives the computation "
                         f"beyond double precision: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
