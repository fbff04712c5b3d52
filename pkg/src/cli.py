"""Command-line interface for the stable knapsack toolkit."""

import argparse
import json
import sys
from pathlib import Path
from typing import Any

import pandas as pd
from dotenv import load_dotenv

from .algorithms import ALGORITHMS, get_algorithm, run_algorithm
from .core.errors import DomainError, InstanceFormatError, InvariantViolation
from .core.model import check_epsilon
from .core.oracles import value_of, weight_of
from .instances.files import instance_to_dict, read_instance
from .instances.generators import gen_lowerbound, gen_prop2, gen_random
from .lab.dynamic import (
    DEFAULT_FAMILY,
    RecourseReport,
    decremental_simulate,
    simulate_streams,
    stream_simulate,
)
from .lab.sensitivity import (
    SensitivityReport,
    deterministic_sensitivity,
    emd_sensitivity,
    mc_sensitivity_upper,
)
from .utils.config import get_settings
from .utils.io import (
    get_report_path,
    get_timestamped_filename,
    save_csv,
    save_json,
    save_text,
)
from .utils.log import setup_logging
from .utils.rng import fresh_seed

# Load environment variables
load_dotenv()

EXIT_FAILURE = 1
EXIT_INPUT = 2
EXIT_PRECONDITION = 3
EXIT_INVARIANT = 4


def status(message: str) -> None:
    """User-facing status line; stdout stays machine-readable."""
    print(message, file=sys.stderr)


def resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is None:
        args.seed = fresh_seed()
        status(f"Using seed {args.seed}")
    return int(args.seed)


def dump_json(payload: Any) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def emit(
    payload: dict[str, Any],
    frame: pd.DataFrame | None,
    args: argparse.Namespace,
    name: str,
) -> None:
    """Write a result as JSON or CSV to ``--out``, stdout and optionally ``--save``."""
    fmt = getattr(args, "format", "json")
    if fmt == "csv" and frame is not None:
        text = frame.to_csv(index=False)
    else:
        fmt, text = "json", dump_json(payload)

    if getattr(args, "out", None):
        if fmt == "csv" and frame is not None:
            save_csv(frame, args.out)
        else:
            save_json(payload, args.out)
        status(f"Saved {args.out}")
    else:
        sys.stdout.write(text)

    if getattr(args, "save", False):
        path = save_text(text, get_report_path(get_timestamped_filename(name, fmt)))
        status(f"Saved {path}")


def solve(args: argparse.Namespace) -> None:
    """Run one algorithm on an instance file."""
    instance = read_instance(args.instance)
    eps = check_epsilon(args.eps)
    spec = get_algorithm(args.alg)
    seed = resolve_seed(args)

    solution, transcript = run_algorithm(spec.name, instance, eps, seed)
    payload: dict[str, Any] = {
        "schema_version": get_settings().reports.schema_version,
        "command": "solve",
        "algorithm": spec.name,
        "eps": eps,
        "seed": seed,
        "ids": solution.sorted_ids(),
        "value": value_of(instance, solution),
        "weight": weight_of(instance, solution),
    }
    if spec.randomized:
        payload["transcript"] = transcript.to_records()

    if args.json:
        sys.stdout.write(dump_json(payload))
        return

    print(f"algorithm: {spec.name}")
    print(f"ids: {' '.join(str(i) for i in payload['ids'])}")
    print(f"value: {payload['value']!r}")
    print(f"weight: {payload['weight']!r}")
    if spec.randomized:
        draws = " ".join(f"{r['stage']}={r['draw']!r}" for r in payload["transcript"])
        print(f"transcript: {draws}")
    print(f"seed: {seed}")


def sensitivity(args: argparse.Namespace) -> None:
    """Measure average sensitivity of an algorithm on an instance file."""
    instance = read_instance(args.instance)
    eps = check_epsilon(args.eps)
    spec = get_algorithm(args.alg)
    seed = resolve_seed(args)

    report: SensitivityReport
    if not spec.randomized:
        status(f"{spec.name} is deterministic, measuring exactly")
        report = deterministic_sensitivity(spec.name, instance, eps)
    elif args.method == "emd":
        report = emd_sensitivity(spec.name, instance, eps, args.trials, seed)
    else:
        report = mc_sensitivity_upper(
            spec.name,
            instance,
            eps,
            args.trials,
            seed,
            threads=args.threads,
            progress=sys.stderr.isatty(),
        )
    report = report.model_copy(update={"seed": seed})

    bound = f" (proven bound {report.bound:.4g})" if report.bound is not None else ""
    status(f"Average sensitivity of {spec.name}: {report.average:.6g}{bound}")
    emit(report.model_dump(mode="json"), report.to_frame(), args, "sensitivity")


def stream(args: argparse.Namespace) -> None:
    """Simulate incremental or decremental streams over an instance file."""
    instance = read_instance(args.instance)
    eps = check_epsilon(args.eps)
    seed = resolve_seed(args)
    mode = "incremental" if args.mode == "incr" else "decremental"

    reports: list[RecourseReport]
    if args.streams > 1:
        reports = simulate_streams(
            instance,
            eps,
            args.streams,
            seed,
            family=args.family,
            mode=mode,
            threads=args.threads,
            geometric_rounding=args.geometric_rounding,
            progress=sys.stderr.isatty(),
        )
    else:
        simulate = stream_simulate if mode == "incremental" else decremental_simulate
        reports = [
            simulate(
                instance,
                eps,
                seed,
                family=args.family,
                geometric_rounding=args.geometric_rounding,
            )
        ]
    reports = [report.model_copy(update={"seed": seed}) for report in reports]

    mean = sum(r.amortized_recourse for r in reports) / len(reports)
    status(f"Amortized recourse over {len(reports)} stream(s): {mean:.6g}")

    if len(reports) == 1:
        emit(reports[0].model_dump(mode="json"), reports[0].to_frame(), args, "stream")
        return
    payload = {
        "schema_version": get_settings().reports.schema_version,
        "seed": seed,
        "mean_amortized_recourse": mean,
        "streams": [report.model_dump(mode="json") for report in reports],
    }
    frame = pd.concat(
        [report.to_frame().assign(stream=k) for k, report in enumerate(reports)],
        ignore_index=True,
    )
    emit(payload, frame, args, "stream")


def gen(args: argparse.Namespace) -> None:
    """Generate an instance file."""
    if args.family == "prop2":
        instance = gen_prop2(args.k)
    elif args.family == "lowerbound":
        # --eps wins over --k
        if args.eps is not None:
            instance = gen_lowerbound(args.eps)
        else:
            instance = gen_lowerbound(k=args.k)
    else:
        seed = resolve_seed(args)
        instance = gen_random(
            args.n,
            args.values,
            args.weights,
            seed,
            simple=args.family == "simple-random",
        )

    payload = instance_to_dict(instance)
    if args.out:
        save_json(payload, args.out)
        status(f"Wrote {instance.n} items to {args.out}")
    else:
        sys.stdout.write(dump_json(payload))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Stable-on-average knapsack algorithms and sensitivity lab",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Generate the greedy counterexample instance
  python -m src.cli gen --family prop2 --k 4 --out data/prop2.json

  # Solve it with the stable algorithm
  python -m src.cli solve data/prop2.json --alg stable --eps 0.25 --seed 7 --json

  # Average sensitivity (exact for deterministic algorithms)
  python -m src.cli sensitivity data/prop2.json --alg greedy

  # Incremental stream with amortized recourse
  python -m src.cli stream data/prop2.json --eps 0.25 --seed 7 --format csv
        """,
    )
    parser.add_argument(
        "--verbose", "-v", action="store_true", help="Enable debug logging"
    )

    subparsers = parser.add_subparsers(dest="command", help="Available commands")
    algorithms = sorted(ALGORITHMS)

    # Solve command
    solve_parser = subparsers.add_parser("solve", help="Run an algorithm")
    solve_parser.add_argument("instance", type=Path, help="Instance JSON file")
    solve_parser.add_argument("--alg", choices=algorithms, default="stable")
    solve_parser.add_argument(
        "--eps", type=float, default=0.5, help="Accuracy in (0, 1) (default: 0.5)"
    )
    solve_parser.add_argument("--seed", type=int, help="Seed (default: OS entropy)")
    solve_parser.add_argument("--json", action="store_true", help="Print JSON")

    # Sensitivity command
    sens_parser = subparsers.add_parser(
        "sensitivity", help="Measure average sensitivity"
    )
    sens_parser.add_argument("instance", type=Path, help="Instance JSON file")
    sens_parser.add_argument("--alg", choices=algorithms, default="stable")
    sens_parser.add_argument("--eps", type=float, default=0.5)
    sens_parser.add_argument(
        "--trials",
        type=int,
        default=None,
        help="Trials per deletion (default: from config/settings.yaml)",
    )
    sens_parser.add_argument(
        "--method",
        choices=["coupled", "emd"],
        default="coupled",
        help="Coupled upper bound or exact EMD of empirical distributions",
    )
    sens_parser.add_argument("--seed", type=int, help="Seed (default: OS entropy)")
    sens_parser.add_argument("--threads", type=int, default=1)

    # Stream command
    stream_parser = subparsers.add_parser("stream", help="Simulate a dynamic stream")
    stream_parser.add_argument("instance", type=Path, help="Instance JSON file")
    stream_parser.add_argument("--eps", type=float, default=0.5)
    stream_parser.add_argument(
        "--mode", choices=["incr", "decr"], default="incr", help="Insert or delete"
    )
    stream_parser.add_argument(
        "--family",
        choices=sorted(name for name, spec in ALGORITHMS.items() if spec.randomized),
        default=DEFAULT_FAMILY,
    )
    stream_parser.add_argument(
        "--streams", type=int, default=1, help="Independent streams (default: 1)"
    )
    stream_parser.add_argument("--geometric-rounding", action="store_true")
    stream_parser.add_argument("--seed", type=int, help="Seed (default: OS entropy)")
    stream_parser.add_argument("--threads", type=int, default=1)

    for report_parser in (sens_parser, stream_parser):
        report_parser.add_argument("--format", choices=["json", "csv"], default="json")
        report_parser.add_argument(
            "--out", type=Path, help="Output file (default: stdout)"
        )
        report_parser.add_argument(
            "--save",
            action="store_true",
            help="Also save a timestamped copy under the reports directory",
        )

    # Gen command
    gen_parser = subparsers.add_parser("gen", help="Generate an instance")
    gen_parser.add_argument(
        "--family",
        choices=["prop2", "lowerbound", "random", "simple-random"],
        required=True,
    )
    gen_parser.add_argument("--k", type=int, default=4)
    gen_parser.add_argument("--eps", type=float, default=None)
    gen_parser.add_argument("--n", type=int, default=10)
    gen_parser.add_argument("--values", default="uniform(0,1)")
    gen_parser.add_argument("--weights", default="uniform(0,1)")
    gen_parser.add_argument("--seed", type=int, help="Seed (default: OS entropy)")
    gen_parser.add_argument("--out", type=Path, help="Output file (default: stdout)")

    return parser


COMMANDS = {
    "solve": solve,
    "sensitivity": sensitivity,
    "stream": stream,
    "gen": gen,
}


def main(argv: list[str] | None = None) -> None:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return

    setup_logging(verbose=args.verbose)

    try:
        COMMANDS[args.command](args)

    except (InstanceFormatError, FileNotFoundError) as e:
        status(f"Input error: {e}")
        sys.exit(EXIT_INPUT)
    except DomainError as e:
        status(f"Precondition error: {e}")
        sys.exit(EXIT_PRECONDITION)
    except InvariantViolation as e:
        status(f"Internal invariant violated: {e}")
        sys.exit(EXIT_INVARIANT)
    except KeyboardInterrupt:
        status("\nOperation cancelled by user")
        sys.exit(EXIT_FAILURE)
    except Exception as e:
        status(f"Error: {e}")
        sys.exit(EXIT_FAILURE)


if __name__ == "__main__":
    main()
