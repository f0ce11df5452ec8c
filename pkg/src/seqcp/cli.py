"""Command-line interface for the dial-a-ride solver.

Three subcommands:

``solve``
    Solve one instance file and print the solution as line-oriented text
    (objective, then one route per vehicle).  ``--output`` writes the text
    to a file and a machine-readable JSON rendering of the same content to
    ``<output>.json``.

``validate``
    Re-check a solution file against its instance with the independent
    validator; prints ``ok`` or one violation per line.

``bench``
    Solve every instance in a directory, compare against a best-known-
    solution table, and write a results CSV, a gap-profile CSV, and a
    gap-profile figure (PNG) side by side.

Exit codes: 0 solution found / report written / solution valid, 1 proven
infeasible or solution invalid, 2 no solution within the limits, 3 input
error (bad files, bad flags, unknown instance names).
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

from seqcp.darp import (
    InstanceFormatError,
    gap_profile,
    parse_instance,
    parse_solution,
    plot_gap_profile,
    read_bks_csv,
    render_solution,
    solution_json,
    solve,
    validate,
    VARIANTS,
)

EXIT_SOLUTION = 0
EXIT_INFEASIBLE = 1
EXIT_NO_SOLUTION = 2
EXIT_INPUT_ERROR = 3


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with the input-error code."""

    def error(self, message):  # noqa: D102 - argparse hook
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> _Parser:
    parser = _Parser(prog="seqcp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("solve", help="solve one instance")
    sp.add_argument("instance", help="instance file")
    sp.add_argument("--variant", choices=VARIANTS, default="darp")
    sp.add_argument("--time-limit", type=float, default=60.0, metavar="SEC")
    sp.add_argument("--seed", type=int, default=0, metavar="N")
    sp.add_argument("--relax-size", type=int, default=10, metavar="K")
    sp.add_argument("--fail-limit", type=int, default=1000, metavar="N")
    sp.add_argument(
        "--max-iterations", type=int, default=None, metavar="N",
        help="stop the improvement loop after N iterations",
    )
    sp.add_argument(
        "--output", metavar="FILE",
        help="write the solution text to FILE and JSON to FILE.json",
    )

    vp = sub.add_parser("validate", help="check a solution file")
    vp.add_argument("instance", help="instance file")
    vp.add_argument("solution", help="solution file")
    vp.add_argument("--variant", choices=VARIANTS, default="darp")

    bp = sub.add_parser("bench", help="solve a directory of instances")
    bp.add_argument("directory", help="directory of instance files")
    bp.add_argument("--bks", required=True, metavar="TABLE",
                    help="CSV of best known solutions: instance,value")
    bp.add_argument("--profile", metavar="FILE",
                    help="write the gap-profile figure here (PNG); the "
                         "results CSV and profile CSV land next to it")
    bp.add_argument("--glob", default="*.txt", metavar="PATTERN",
                    help="instance filename pattern (default: *.txt)")
    bp.add_argument("--variant", choices=VARIANTS, default="darp")
    bp.add_argument("--time-limit", type=float, default=60.0, metavar="SEC")
    bp.add_argument("--seed", type=int, default=0, metavar="N")
    bp.add_argument("--relax-size", type=int, default=10, metavar="K")
    bp.add_argument("--fail-limit", type=int, default=1000, metavar="N")
    bp.add_argument(
        "--max-iterations", type=int, default=None, metavar="N",
        help="stop each improvement loop after N iterations",
    )
    return parser


def _read_text(path: str, what: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InstanceFormatError(f"cannot read {what} {path}: {exc.strerror}") from exc


def _cmd_solve(args) -> int:
    inst = parse_instance(_read_text(args.instance, "instance"), name=Path(args.instance).stem)
    outcome = solve(
        inst,
        variant=args.variant,
        seed=args.seed,
        time_limit=args.time_limit,
        relax_size=args.relax_size,
        fail_limit=args.fail_limit,
        max_iterations=args.max_iterations,
    )
    if outcome.status != "solution":
        print(outcome.status, file=sys.stderr)
        return EXIT_INFEASIBLE if outcome.status == "infeasible" else EXIT_NO_SOLUTION

    text = render_solution(inst, outcome.solution)
    print(text)
    if args.output:
        out = Path(args.output)
        out.write_text(text + "\n")
        Path(str(out) + ".json").write_text(
            solution_json(
                inst,
                outcome.solution,
                variant=args.variant,
                seed=args.seed,
                iterations=outcome.iterations,
                history=outcome.history,
            )
            + "\n"
        )
    return EXIT_SOLUTION


def _cmd_validate(args) -> int:
    inst = parse_instance(_read_text(args.instance, "instance"), name=Path(args.instance).stem)
    try:
        sol = parse_solution(inst, _read_text(args.solution, "solution"))
    except ValueError as exc:
        print(f"malformed solution: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    problems = validate(inst, sol, args.variant)
    if problems:
        for problem in problems:
            print(problem)
        return EXIT_INFEASIBLE
    print("ok")
    return EXIT_SOLUTION


def _cmd_bench(args) -> int:
    directory = Path(args.directory)
    files = sorted(directory.glob(args.glob))
    if not files:
        raise InstanceFormatError(f"no instances matching {args.glob} in {directory}")
    bks = read_bks_csv(_read_text(args.bks, "best-known table"))

    rows = []
    objectives: dict[str, float | None] = {}
    for path in files:
        inst = parse_instance(path.read_text(), name=path.stem)
        started = time.monotonic()
        outcome = solve(
            inst,
            variant=args.variant,
            seed=args.seed,
            time_limit=args.time_limit,
            relax_size=args.relax_size,
            fail_limit=args.fail_limit,
            max_iterations=args.max_iterations,
        )
        elapsed = time.monotonic() - started
        objective = outcome.solution.objective if outcome.solution else None
        objectives[path.stem] = objective
        rows.append((path.stem, outcome.status, objective, elapsed))
        shown = f"{objective:.2f}" if objective is not None else "-"
        print(f"{path.stem}: {outcome.status} objective {shown} ({elapsed:.1f}s)")

    profile = gap_profile(objectives, bks)
    for name, _status, objective, _elapsed in rows:
        gap = profile.gaps[name]
        print(f"{name}: gap {gap * 100:.2f}%")

    if args.profile:
        figure = Path(args.profile)
        figure.parent.mkdir(parents=True, exist_ok=True)
        results_csv = figure.parent / "results.csv"
        with results_csv.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["instance", "status", "objective", "bks", "gap", "seconds"])
            for name, status, objective, elapsed in rows:
                writer.writerow([
                    name,
                    status,
                    f"{objective:.2f}" if objective is not None else "",
                    f"{bks[name]:.2f}",
                    f"{profile.gaps[name]:.4f}",
                    f"{elapsed:.2f}",
                ])
        profile_csv = figure.with_suffix(".csv")
        taus = [round(i * 0.005, 3) for i in range(101)]
        with profile_csv.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["tau", "fraction"])
            for tau, fraction in profile.curve(taus):
                writer.writerow([f"{tau:.3f}", f"{fraction:.4f}"])
        plot_gap_profile({f"seed {args.seed}": profile}, str(figure))
        print(f"wrote {results_csv}, {profile_csv}, {figure}")
    return EXIT_SOLUTION


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"solve": _cmd_solve, "validate": _cmd_validate, "bench": _cmd_bench}
    try:
        return handlers[args.command](args)
    except (InstanceFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
