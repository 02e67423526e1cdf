"""Command line interface.

Subcommands: demo (worked examples), run (evaluate a scenario file),
verify (seeded sweep with a pass/fail predicate), pool (pool explicit
density files). Exit codes: 0 success or predicate passed, 1 usage error,
2 input validation error, 3 numeric failure, 4 verification predicate
failed. Human output rounds to 6 significant digits; machine output via
--out keeps full precision. QPOOL_SEED supplies the default sweep seed.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import (
    ContractViolation,
    EmptyPoolError,
    NumericError,
    QpoolError,
    ZeroProbabilityError,
)
from .linalg import DEFAULT_TOL
from .measure import plus_minus_povm
from .pooling import (
    ClassicalJoint,
    classical_bayes,
    classical_pool,
    is_conditionally_independent,
    pool_n,
)
from .scenario import (
    Scenario,
    SweepConfig,
    run_scenario,
    verification_sweep,
)
from .serialize import (
    density_to_dict,
    encode_matrix,
    load_density,
    load_scenario,
    pooling_report_to_dict,
    sweep_report_to_dict,
    write_json,
    FORMAT_VERSION,
)
from .states import ghz_state, shared_state, state_224

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_VERIFY = 4

DEMO_NAMES = ("example224", "ghz", "classical-redundant", "classical-independent")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _fmt_complex(z: complex) -> str:
    return f"{z.real:.6g}{z.imag:+.6g}j"


def _fmt_matrix(m: np.ndarray, indent: str = "  ") -> str:
    return "\n".join(
        indent + "[" + ", ".join(_fmt_complex(z) for z in row) + "]"
        for row in np.asarray(m)
    )


def _fmt_probs(p: np.ndarray) -> str:
    return "[" + ", ".join(_fmt(x) for x in np.asarray(p)) + "]"


def _print_report_summary(report) -> None:
    print(f"scenario: {report.label or '(unlabeled)'}")
    print(f"dims: {list(report.dims)}  state class: {report.state_class}")
    print(f"rank condition (pure, product rank): {report.rank_condition}")
    print(
        f"outcomes evaluated: {len(report.records)}"
        f"  skipped below p={_fmt(report.skip_tol)}: {len(report.skipped)}"
    )
    print(f"probability total: {_fmt(report.probability_total)}")
    if report.max_marginal_defect is not None:
        print(f"marginal consistency defect: {_fmt(report.max_marginal_defect)}")
    for r in report.records:
        flags = []
        if not r.pooled.hermitian:
            flags.append("non-hermitian pool")
        if not r.parties_compatible:
            flags.append("incompatible posteriors")
        note = ("  [" + ", ".join(flags) + "]") if flags else ""
        print(
            f"  outcome {r.outcomes}: p={_fmt(r.probability)}"
            f"  distance={_fmt(r.distance)}{note}"
        )
    print(f"max distance (pooled vs joint posterior): {_fmt(report.max_distance)}")


def _demo_scenario(name: str, tol: float):
    if name == "example224":
        state, expect_match = state_224(), True
    else:
        state, expect_match = ghz_state(), False
    povms = (plus_minus_povm(), plus_minus_povm())
    scenario = Scenario(state, povms, "all", name, None, "i" if expect_match else "other")
    t0 = time.perf_counter()
    report = run_scenario(scenario, tol=tol)
    elapsed = time.perf_counter() - t0
    if expect_match:
        passed = report.max_distance < 1e-9 and len(report.records) == 4
        verdict_note = (
            f"pooling matches the joint posterior on every outcome "
            f"(max distance {_fmt(report.max_distance)})"
            if passed
            else f"pooling should match but max distance is {_fmt(report.max_distance)}"
        )
    else:
        passed = report.max_distance > 0.01
        verdict_note = (
            f"pooling failure demonstrated (max distance {_fmt(report.max_distance)})"
            if passed
            else "expected a pooling failure but the pool matched"
        )
    print(f"demo: {name}")
    _print_report_summary(report)
    print("prior (shared system):")
    print(_fmt_matrix(shared_state(scenario.state).matrix))
    first = report.records[0]
    print(f"for outcome {first.outcomes}:")
    for i, p in enumerate(first.posteriors):
        print(f"party {i} posterior:")
        print(_fmt_matrix(p.matrix))
    print("joint posterior:")
    print(_fmt_matrix(first.joint_posterior.matrix))
    print("pooled:")
    print(_fmt_matrix(first.pooled.matrix))
    print(f"trace distance (pooled vs joint): {_fmt(first.distance)}")
    metrics = {
        "max_distance": float(report.max_distance),
        "probability_total": float(report.probability_total),
    }
    doc = pooling_report_to_dict(report)
    doc["wall_time_s"] = elapsed
    return passed, verdict_note, metrics, doc


def _redundant_joint() -> ClassicalJoint:
    # Hidden bit s uniform; record a flips s with probability 0.2; b copies a.
    q = np.zeros((2, 2, 2))
    for s in range(2):
        for a in range(2):
            q[a, a, s] = 0.5 * (0.8 if a == s else 0.2)
    return ClassicalJoint(q)


def _independent_joint() -> ClassicalJoint:
    ps = np.array([0.5, 0.3, 0.2])
    pa = np.array([[0.7, 0.2, 0.4], [0.3, 0.8, 0.6]])
    pb = np.array([[0.5, 0.1, 0.3], [0.2, 0.6, 0.3], [0.3, 0.3, 0.4]])
    return ClassicalJoint(np.einsum("as,bs,s->abs", pa, pb, ps))


def _total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def _demo_classical_redundant():
    joint = _redundant_joint()
    prior = joint.prior()
    ci = is_conditionally_independent(joint)
    post_a = classical_bayes(joint, {0: 0})
    post_b = classical_bayes(joint, {1: 0})
    pooled = classical_pool(prior, [post_a, post_b])
    bayes = classical_bayes(joint, {0: 0, 1: 0})
    tv = _total_variation(pooled.probabilities, bayes.probabilities)
    passed = (not ci) and tv > 0.01
    print("demo: classical-redundant")
    print("hidden bit s uniform; record a flips s with probability 0.2; b copies a")
    print(f"conditionally independent given s: {ci}")
    print(f"posterior from a=0: {_fmt_probs(post_a.probabilities)}")
    print(f"posterior from b=0: {_fmt_probs(post_b.probabilities)}")
    print(f"pooled:             {_fmt_probs(pooled.probabilities)}")
    print(f"exact Bayes:        {_fmt_probs(bayes.probabilities)}")
    print(f"total variation distance: {_fmt(tv)}")
    note = (
        "double counting demonstrated; pooling disagrees with Bayes"
        if passed
        else "expected pooling to disagree with Bayes here"
    )
    metrics = {
        "total_variation": tv,
        "conditionally_independent": ci,
        "pooled": [float(x) for x in pooled.probabilities],
        "bayes": [float(x) for x in bayes.probabilities],
    }
    return passed, note, metrics, None


def _demo_classical_independent():
    joint = _independent_joint()
    prior = joint.prior()
    ci = is_conditionally_independent(joint)
    worst = 0.0
    shape = joint.probabilities.shape
    for a in range(shape[0]):
        for b in range(shape[1]):
            pooled = classical_pool(
                prior,
                [classical_bayes(joint, {0: a}), classical_bayes(joint, {1: b})],
            )
            bayes = classical_bayes(joint, {0: a, 1: b})
            worst = max(worst, _total_variation(pooled.probabilities, bayes.probabilities))
    passed = ci and worst < 1e-12
    print("demo: classical-independent")
    print("records a and b are conditionally independent given the hidden value s")
    print(f"conditionally independent given s: {ci}")
    print(f"max total variation (pooled vs Bayes) over all records: {_fmt(worst)}")
    note = (
        "pooling reproduces Bayes exactly"
        if passed
        else "pooling should reproduce Bayes for independent records"
    )
    metrics = {"max_total_variation": worst, "conditionally_independent": ci}
    return passed, note, metrics, None


def cmd_demo(args) -> int:
    if args.name in ("example224", "ghz"):
        passed, note, metrics, scenario_report = _demo_scenario(args.name, args.tol)
    elif args.name == "classical-redundant":
        passed, note, metrics, scenario_report = _demo_classical_redundant()
    else:
        passed, note, metrics, scenario_report = _demo_classical_independent()
    print(f"verdict: {'PASS' if passed else 'FAIL'} ({note})")
    if args.out:
        write_json(
            args.out,
            {
                "format_version": FORMAT_VERSION,
                "report_kind": "demo",
                "tool_version": __version__,
                "name": args.name,
                "passed": bool(passed),
                "metrics": metrics,
                "scenario_report": scenario_report,
            },
        )
        print(f"report written to {args.out}")
    return EXIT_OK if passed else EXIT_VERIFY


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    t0 = time.perf_counter()
    report = run_scenario(scenario, tol=args.tol)
    elapsed = time.perf_counter() - t0
    _print_report_summary(report)
    if args.out:
        doc = pooling_report_to_dict(report)
        doc["wall_time_s"] = elapsed
        write_json(args.out, doc)
        print(f"report written to {args.out}")
    return EXIT_OK


def _parse_dims(raw: str | None, category: str, parser: argparse.ArgumentParser):
    if raw is None:
        return None, None
    try:
        dims = tuple(int(x) for x in raw.split(","))
    except ValueError:
        parser.error(f"--dims must be comma-separated integers, got {raw!r}")
    if category == "none":
        if len(dims) != 3:
            parser.error("--dims for --class none needs three values: dA,dB,dS")
        return dims[:2], dims[2]
    if len(dims) != 2:
        parser.error(f"--dims for --class {category} needs two values: dA,dB")
    return dims, None


def _default_seed() -> int | None:
    raw = os.environ.get("QPOOL_SEED")
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError:
        print(
            f"qpool: error: QPOOL_SEED must be an integer, got {raw!r}",
            file=sys.stderr,
        )
        raise SystemExit(EXIT_USAGE) from None


def cmd_verify(args, parser) -> int:
    if args.trials < 1:
        parser.error("--trials must be at least 1")
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")
    party_dims, shared_dim = _parse_dims(args.dims, args.category, parser)
    seed = args.seed
    if seed is None:
        seed = _default_seed()
    if seed is None:
        seed = 0
    config = SweepConfig(
        category=args.category,
        trials=args.trials,
        seed=seed,
        jobs=args.jobs,
        tol=args.tol,
        party_dims=party_dims,
        shared_dim=shared_dim,
    )
    report = verification_sweep(config)
    print(
        f"sweep: class {config.category}, {config.trials} trials, "
        f"seed {config.seed}, jobs {config.jobs}"
    )
    print(f"max distance (pooled vs joint posterior): {_fmt(report.max_distance)}")
    if config.category == "none":
        print(
            f"trials demonstrating pooling failure: {report.n_disagreeing}"
            f"/{config.trials} ({_fmt(100 * report.fraction_disagreeing)}%)"
        )
    else:
        print(f"max marginal defect: {_fmt(report.max_marginal_defect)}")
        print(f"max probability defect: {_fmt(report.max_probability_defect)}")
        print(f"all posteriors compatible: {report.all_compatible}")
        if report.max_commutator is not None:
            print(f"max commutator defect: {_fmt(report.max_commutator)}")
    print(f"wall time: {_fmt(report.wall_time_s)} s")
    print(f"predicate: {'PASS' if report.passed else 'FAIL'}")
    if args.out:
        write_json(args.out, sweep_report_to_dict(report))
        print(f"report written to {args.out}")
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_pool(args) -> int:
    alpha = load_density(args.alpha)
    beta = load_density(args.beta)
    rho = load_density(args.rho)
    more = [load_density(f) for f in args.more]
    pooled = pool_n([alpha, beta, *more], rho, tol=args.tol)
    print(f"pooled state (dim {pooled.matrix.shape[0]}):")
    print(_fmt_matrix(pooled.matrix))
    print(
        f"hermiticity defect: {_fmt(pooled.hermiticity_defect)}"
        f"  (hermitian: {pooled.hermitian})"
    )
    if not pooled.hermitian:
        print(
            "warning: pooling chain is far from Hermitian; "
            "inputs are outside the validated families",
            file=sys.stderr,
        )
    if args.out:
        write_json(
            args.out,
            {
                "format_version": FORMAT_VERSION,
                "report_kind": "pool",
                "tool_version": __version__,
                "n_posteriors": 2 + len(more),
                "pooled": encode_matrix(pooled.matrix),
                "hermiticity_defect": float(pooled.hermiticity_defect),
                "hermitian": bool(pooled.hermitian),
            },
        )
        print(f"report written to {args.out}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(
        prog="qpool",
        description="Pool partial posteriors about an indirectly measured system.",
    )
    parser.add_argument("--version", action="version", version=f"qpool {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p_demo = sub.add_parser("demo", help="run a built-in worked example")
    p_demo.add_argument("name", choices=DEMO_NAMES)
    p_demo.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p_demo.add_argument("--out", help="write a machine-readable report here")
    p_demo.set_defaults(func=lambda a: cmd_demo(a))

    p_run = sub.add_parser("run", help="evaluate a scenario file")
    p_run.add_argument("scenario", help="path to a scenario JSON file")
    p_run.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p_run.add_argument("--out", help="write a machine-readable report here")
    p_run.set_defaults(func=lambda a: cmd_run(a))

    p_verify = sub.add_parser("verify", help="run a seeded verification sweep")
    p_verify.add_argument(
        "--class",
        dest="category",
        choices=("i", "ii", "none"),
        required=True,
        help="state family to sweep",
    )
    p_verify.add_argument("--trials", type=int, default=100)
    p_verify.add_argument(
        "--seed", type=int, default=None, help="default: QPOOL_SEED env var, else 0"
    )
    p_verify.add_argument(
        "--dims", default=None, help="party dims dA,dB (class none: dA,dB,dS)"
    )
    p_verify.add_argument("--jobs", type=int, default=1)
    p_verify.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p_verify.add_argument("--out", help="write a machine-readable report here")
    p_verify.set_defaults(func=lambda a: cmd_verify(a, p_verify))

    p_pool = sub.add_parser("pool", help="pool explicit density-matrix files")
    p_pool.add_argument("--alpha", required=True, help="first posterior density file")
    p_pool.add_argument("--beta", required=True, help="second posterior density file")
    p_pool.add_argument("--rho", required=True, help="prior density file")
    p_pool.add_argument(
        "--more", nargs="*", default=[], help="additional posterior density files"
    )
    p_pool.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p_pool.add_argument("--out", help="write a machine-readable report here")
    p_pool.set_defaults(func=lambda a: cmd_pool(a))

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (ZeroProbabilityError, EmptyPoolError, NumericError) as exc:
        print(f"qpool: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ContractViolation as exc:
        print(f"qpool: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except QpoolError as exc:
        print(f"qpool: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"qpool: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
