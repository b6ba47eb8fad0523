"""Command-line front end.

Exit codes: 0 success (or no counterexample found), 1 usage, I/O or
validation error, 2 counterexample found, 3 recovery failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import formats
from .demos import DEMOS
from .estimation import EstimationError, estimate_markov, identify_end_to_end, pulse_input, simulate
from .oracle import indistinguishable, search_counterexample
from .placement import enumerate_placements, place_sensors
from .recovery import RecoveryError, recover_weights
from .system import RTOL, build_system, markov_parameters
from .tree import TreeError, format_tree, load_tree

EXIT_OK, EXIT_USAGE, EXIT_COUNTEREXAMPLE, EXIT_RECOVERY = 0, 1, 2, 3
DEFAULT_SEED = 42
RECOVER_TOL = 1e-4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 by default, which is reserved for counterexamples
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (x > 0 and math.isfinite(x)):
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return x


def _nonneg_float(text: str) -> float:
    x = float(text)
    if not (x >= 0 and math.isfinite(x)):
        raise argparse.ArgumentTypeError(f"must be non-negative: {text!r}")
    return x


def _positive_int(text: str) -> int:
    x = int(text)
    if x < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return x


def _seed(text: str) -> int:
    x = int(text)
    if not 0 <= x < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return x


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _sensors(tree, given):
    if given is None:
        return sorted(place_sensors(tree))
    bad = sorted(set(given) - set(tree.nodes))
    if bad:
        raise UsageError(f"sensors {bad} are not nodes of the tree")
    return sorted(set(given))


def cmd_place(args) -> int:
    tree = load_tree(args.tree, weighted=False)
    if args.all:
        text = "".join("sensors: " + " ".join(map(str, sorted(s))) + "\n" for s in enumerate_placements(tree))
    else:
        text = "sensors: " + " ".join(map(str, sorted(place_sensors(tree)))) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def cmd_markov(args) -> int:
    tree = load_tree(args.tree)
    sensors = _sensors(tree, args.sensors)
    q = markov_parameters(build_system(tree, sensors), args.horizon)
    _emit(formats.markov_to_csv(q), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    tree = load_tree(args.tree)
    sensors = _sensors(tree, args.sensors)
    cex = search_counterexample(tree, tree.weights, sensors, attempts=args.attempts, seed=args.seed,
                                horizon=args.horizon)
    if cex is None:
        text = f"sensors: {' '.join(map(str, sensors))}\nverdict: no counterexample found\n"
        _emit(text, args.out)
        return EXIT_OK
    report = indistinguishable(tree, tree.weights, cex.weights, sensors, horizon=args.horizon, tol=args.tol)
    text = f"sensors: {' '.join(map(str, sensors))}\n" + formats.format_report(report, cex, tree.edges)
    _emit(text, args.out)
    return EXIT_COUNTEREXAMPLE


def cmd_recover(args) -> int:
    tree = load_tree(args.tree, weighted=False)
    markov = formats.markov_from_csv(formats.read_text(args.markov))
    if args.sensors is not None and sorted(set(args.sensors)) != list(markov.sensors):
        raise UsageError(f"--sensors {sorted(set(args.sensors))} do not match CSV columns {list(markov.sensors)}")
    try:
        result = recover_weights(tree, markov.sensors, markov)
    except RecoveryError as exc:
        print(f"recovery failed: {exc}", file=sys.stderr)
        return EXIT_RECOVERY
    _emit(formats.format_recovered(result), args.out)
    if not result.residual <= args.tol:
        print(f"residual {result.residual:.3e} exceeds tolerance {args.tol:.3e}; data inconsistent",
              file=sys.stderr)
        return EXIT_RECOVERY
    return EXIT_OK


def cmd_simulate(args) -> int:
    tree = load_tree(args.tree)
    sensors = _sensors(tree, args.sensors)
    rng = np.random.default_rng(args.seed)
    record = simulate(build_system(tree, sensors), pulse_input(args.steps, args.dt), args.dt,
                      noise_std=args.noise, rng=rng)
    _emit(formats.record_to_csv(record), args.out)
    return EXIT_OK


def cmd_estimate(args) -> int:
    record = formats.record_from_csv(formats.read_text(args.record))
    est = estimate_markov(record, args.order, horizon=args.horizon)
    _emit(formats.markov_to_csv(est.markov), args.out)
    print(f"realized order {est.order}", file=sys.stderr)
    return EXIT_OK


def cmd_identify(args) -> int:
    tree = load_tree(args.tree)
    sensors = None if args.sensors is None else _sensors(tree, args.sensors)
    try:
        run = identify_end_to_end(tree, dt=args.dt, steps=args.steps, noise_std=args.noise,
                                  seed=args.seed, sensors=sensors)
    except RecoveryError as exc:
        print(f"recovery failed: {exc}", file=sys.stderr)
        return EXIT_RECOVERY
    lines = [f"sensors: {' '.join(map(str, run.sensors))}", f"realized order: {run.estimate.order}"]
    for (u, v), w, e in zip(run.tree.edges, run.tree.weights, run.relative_errors):
        lines.append(f"edge {u} {v} {float(w)!r} rel_err {e:.3e}")
    lines.append(f"max_rel_err {run.max_relative_error:.3e}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_demo(args) -> int:
    checks = DEMOS[args.name]()
    _emit("".join(c.line() + "\n" for c in checks), args.out)
    return EXIT_OK if all(c.ok for c in checks) else EXIT_USAGE


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="treeid", description="Sensor placement and edge-weight identification for weighted consensus trees.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed=False, tol=None, horizon=False, attempts=False):
        sp.add_argument("--out", help="write the result here instead of stdout")
        if seed:
            sp.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="random seed (default 42)")
        if tol is not None:
            sp.add_argument("--tol", type=_positive_float, default=tol, help=f"tolerance (default {tol:g})")
        if horizon:
            sp.add_argument("--horizon", type=_positive_int, default=None, help="Markov horizon (default 2n)")
        if attempts:
            sp.add_argument("--attempts", type=_positive_int, default=32, help="optimizer starts (default 32)")

    def sensors(sp):
        sp.add_argument("--sensors", type=int, nargs="+", default=None,
                        help="sensor node ids (default: the hierarchical placement)")

    sp = sub.add_parser("place", help="print the sensor placement")
    sp.add_argument("tree")
    sp.add_argument("--all", action="store_true", help="list every valid placement")
    common(sp)
    sp.set_defaults(func=cmd_place)

    sp = sub.add_parser("markov", help="write Markov parameters as CSV")
    sp.add_argument("tree")
    sensors(sp)
    common(sp, horizon=True)
    sp.set_defaults(func=cmd_markov)

    sp = sub.add_parser("verify", help="search for weights with the same output")
    sp.add_argument("tree")
    sensors(sp)
    common(sp, seed=True, tol=RTOL, horizon=True, attempts=True)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("recover", help="recover weights from a Markov CSV")
    sp.add_argument("tree")
    sp.add_argument("markov")
    sensors(sp)
    common(sp, tol=RECOVER_TOL)
    sp.set_defaults(func=cmd_recover)

    sp = sub.add_parser("simulate", help="simulate the pulse response as CSV")
    sp.add_argument("tree")
    sensors(sp)
    sp.add_argument("--dt", type=_positive_float, default=0.01)
    sp.add_argument("--steps", type=_positive_int, default=400)
    sp.add_argument("--noise", type=_nonneg_float, default=0.0)
    common(sp, seed=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("estimate", help="estimate Markov parameters from a pulse-response CSV")
    sp.add_argument("record")
    sp.add_argument("--order", type=_positive_int, required=True, help="upper bound on the order (node count)")
    common(sp, horizon=True)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("identify", help="simulate, estimate and recover in one run")
    sp.add_argument("tree")
    sensors(sp)
    sp.add_argument("--dt", type=_positive_float, default=0.01)
    sp.add_argument("--steps", type=_positive_int, default=400)
    sp.add_argument("--noise", type=_nonneg_float, default=0.0)
    common(sp, seed=True)
    sp.set_defaults(func=cmd_identify)

    sp = sub.add_parser("demo", help="reproduce a worked example")
    sp.add_argument("name", choices=sorted(DEMOS))
    common(sp)
    sp.set_defaults(func=cmd_demo)

    sp = sub.add_parser("show", help="print a tree file in canonical form")
    sp.add_argument("tree")
    common(sp)
    sp.set_defaults(func=lambda a: (_emit(format_tree(load_tree(a.tree)), a.out), EXIT_OK)[1])
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, TreeError, formats.FormatError, EstimationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
