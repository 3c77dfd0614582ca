"""Command-line interface.

Exit codes: 0 success, 2 validation failure, 3 infeasible instance,
4 size-guard violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io as smrp_io
from .bench import SOLVERS, BenchmarkGrid, report_to_csv, run_benchmark, solve
from .generator import GeneratorParams, generate_instance
from .model import (InfeasibleError, SizeGuardError, StructureError, check_feasibility,
                    evaluate_objective, validate_instance)
from .simulator import SimConfig, parametric_study, rows_to_csv, simulate

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3
EXIT_SIZE_GUARD = 4

log = logging.getLogger("smrp")


class ValidationFailure(Exception):
    pass


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_valid_instance(path):
    inst = smrp_io.load_instance(path)
    problems = validate_instance(inst)
    if problems:
        raise ValidationFailure("invalid instance:\n  " + "\n  ".join(problems))
    return inst


def cmd_gen(args) -> int:
    params = GeneratorParams(
        std_frac=args.std_frac, req_prob=args.req_prob,
        seconds_per_unit=args.seconds_per_unit,
        visit_min=args.visit_min, visit_max=args.visit_max,
        time_limit=args.time_limit, margin_frac=args.margin_frac,
        cap_slack=args.cap_slack,
        weight_dropped=args.weight_dropped, weight_time=args.weight_time,
    )
    inst = generate_instance(args.robots, args.humans, args.pois, args.seed, params)
    _write(args.output, smrp_io.dumps(smrp_io.instance_to_dict(inst)))
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _load_valid_instance(args.input)
    out = solve(inst, args.solver, seed=args.seed, max_iter=args.max_iter,
                time_budget=args.time_budget, jobs=args.jobs)
    _write(args.output, smrp_io.dumps(smrp_io.solution_to_dict(out.solution)))
    summary = {"solver": args.solver, "seed": args.seed, **out.objective.to_json(), **out.info}
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_eval(args) -> int:
    inst = _load_valid_instance(args.input)
    sol = smrp_io.load_solution(args.sol)
    violations = check_feasibility(inst, sol)
    report = {"feasible": not violations,
              "violations": [v.to_json() for v in violations]}
    if not any(v.constraint in ("structure", "flow", "assignment") for v in violations):
        report["objective"] = evaluate_objective(inst, sol).to_json()
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK if not violations else EXIT_INVALID


def cmd_sim(args) -> int:
    inst = _load_valid_instance(args.input)
    sol = smrp_io.load_solution(args.sol)
    cfg = SimConfig(args.rate, args.visit_std, args.trials, args.seed)
    res = simulate(inst, sol, cfg)
    rows = [(args.rate, k, res.mean_time(k), res.std_time(k), res.satisfy_fraction(k))
            for k in range(inst.n_robots)]
    _write(args.output, rows_to_csv(rows))
    return EXIT_OK


def cmd_study(args) -> int:
    inst = _load_valid_instance(args.input)
    sol = smrp_io.load_solution(args.sol)
    try:
        rates = [float(x) for x in args.rates.split(",") if x.strip()]
    except ValueError:
        raise ValidationFailure(f"cannot parse --rates {args.rates!r}")
    template = SimConfig(1.0, args.visit_std, args.trials, args.seed)
    _write(args.output, rows_to_csv(parametric_study(inst, sol, rates, template)))
    return EXIT_OK


def cmd_bench(args) -> int:
    grid = BenchmarkGrid.from_dict(json.loads(Path(args.grid).read_text()))
    _write(args.output, report_to_csv(run_benchmark(grid, jobs=args.jobs)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="smrp", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("--robots", type=int, required=True)
    g.add_argument("--humans", type=int, required=True)
    g.add_argument("--pois", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    defaults = GeneratorParams()
    g.add_argument("--std-frac", type=float, default=defaults.std_frac)
    g.add_argument("--req-prob", type=float, default=defaults.req_prob)
    g.add_argument("--seconds-per-unit", type=float, default=defaults.seconds_per_unit)
    g.add_argument("--visit-min", type=float, default=defaults.visit_min)
    g.add_argument("--visit-max", type=float, default=defaults.visit_max)
    g.add_argument("--time-limit", type=float, default=defaults.time_limit)
    g.add_argument("--margin-frac", type=float, default=defaults.margin_frac)
    g.add_argument("--cap-slack", type=int, default=defaults.cap_slack)
    g.add_argument("--weight-dropped", type=float, default=defaults.weight_dropped)
    g.add_argument("--weight-time", type=float, default=defaults.weight_time)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve an instance")
    s.add_argument("--solver", choices=SOLVERS, required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--max-iter", type=int, default=50)
    s.add_argument("--time-budget", type=float, default=120.0)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("eval", help="evaluate a solution")
    e.add_argument("--in", dest="input", required=True)
    e.add_argument("--sol", required=True)
    e.set_defaults(func=cmd_eval)

    m = sub.add_parser("sim", help="simulate execution of a solution")
    m.add_argument("--in", dest="input", required=True)
    m.add_argument("--sol", required=True)
    m.add_argument("--rate", type=float, required=True)
    m.add_argument("--visit-std", type=float, required=True)
    m.add_argument("--trials", type=int, required=True)
    m.add_argument("--seed", type=int, required=True)
    m.add_argument("-o", "--output")
    m.set_defaults(func=cmd_sim)

    t = sub.add_parser("study", help="sweep the correct-action rate")
    t.add_argument("--in", dest="input", required=True)
    t.add_argument("--sol", required=True)
    t.add_argument("--rates", required=True)
    t.add_argument("--visit-std", type=float, default=0.4)
    t.add_argument("--trials", type=int, default=1000)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("-o", "--output")
    t.set_defaults(func=cmd_study)

    b = sub.add_parser("bench", help="run a benchmark grid")
    b.add_argument("--grid", required=True)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SizeGuardError as exc:
        print(f"size guard: {exc}", file=sys.stderr)
        return EXIT_SIZE_GUARD
    except (ValidationFailure, StructureError, ValueError, KeyError) as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
