"""Command-line entry points: validate, perturb, simulate, analyze, serve-fixtures."""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .analysis import run_analysis
from .markov import EmptyFilter
from .problem import (
    BugKind,
    NoPerturbableElement,
    load_problem,
    load_problem_dir,
    perturb_solution,
    validate_problem_file,
)
from .simulate import BotPolicy, simulate_cohort
from .study import load_manifest

DEFAULT_PROBLEMS = Path(__file__).resolve().parents[2] / "problems"


def _cmd_validate(args: argparse.Namespace) -> int:
    paths: list[Path] = []
    for raw in args.paths:
        path = Path(raw)
        paths.extend(sorted(path.glob("*.json")) if path.is_dir() else [path])
    failures = 0
    for path in paths:
        diagnostics = validate_problem_file(path)
        if diagnostics:
            failures += 1
            print(f"INVALID {path}")
            for d in diagnostics:
                print(f"  {d}")
        else:
            print(f"ok {path}")
    print(f"{len(paths) - failures}/{len(paths)} files valid")
    return 1 if failures else 0


def _cmd_perturb(args: argparse.Namespace) -> int:
    problem = load_problem(args.problem)
    rng = random.Random(args.seed)
    bugs = []
    try:
        for _ in range(args.count):
            bug = perturb_solution(problem, BugKind(args.kind), rng)
            bugs.append(
                {
                    "target_node_id": bug.target_node_id,
                    "kind": bug.kind.value,
                    "displayed_value": bug.displayed_value,
                    "correct_value": bug.correct_value,
                }
            )
    except NoPerturbableElement as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(bugs, indent=2, ensure_ascii=False))
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    problems = load_problem_dir(args.problems)
    policy = BotPolicy.from_skill(args.skill) if args.skill is not None else None
    result = simulate_cohort(args.students, args.seed, problems, args.out, policy=policy)
    events = sum(1 for _ in open(result.log_path, encoding="utf-8"))
    print(f"simulated {args.students} students -> {result.log_path} ({events} events)")
    print(f"manifest: {result.manifest_path}")
    print(f"states:   {result.states_path}")
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    problems = load_problem_dir(args.problems)
    _, records = load_manifest(args.manifest)
    try:
        outputs = run_analysis(
            args.log,
            problems,
            records,
            args.out,
            display_threshold=args.display_threshold,
            highlight_threshold=args.highlight_threshold,
            seed=args.seed,
            resamples=args.resamples,
        )
    except EmptyFilter as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for name, path in sorted(outputs.items()):
        print(f"{name}: {path}")
    return 0


def _cmd_serve_fixtures(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.problems, args.manifest, args.log, seed=args.seed)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logictutor", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check problem files")
    p.add_argument("paths", nargs="+", help="problem files or directories")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("perturb", help="generate a solution-breaking bug")
    p.add_argument("problem", help="problem file")
    p.add_argument("--kind", choices=["expression", "rule"], default="expression")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.set_defaults(func=_cmd_perturb)

    p = sub.add_parser("simulate", help="run a bot cohort through the study")
    p.add_argument("--students", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--problems", default=str(DEFAULT_PROBLEMS))
    p.add_argument("--out", required=True)
    p.add_argument("--skill", type=float, default=None, help="fixed skill for every bot (default: varied)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("analyze", help="produce score, comparison, and diagram reports")
    p.add_argument("--log", required=True)
    p.add_argument("--problems", default=str(DEFAULT_PROBLEMS))
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--display-threshold", type=float, default=0.15)
    p.add_argument("--highlight-threshold", type=float, default=0.30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resamples", type=int, default=2000)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("serve-fixtures", help="serve the HTTP API over fixture data")
    p.add_argument("--problems", default=str(DEFAULT_PROBLEMS))
    p.add_argument("--manifest", required=True)
    p.add_argument("--log", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8001)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_serve_fixtures)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
