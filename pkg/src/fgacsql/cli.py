"""Command-line interface for the pipeline.

Subcommands: schema, compile, optimize, prove, run, eval. Exit status is
0 on success, 1 on domain errors, 2 on usage errors. All emitted files
are byte-reproducible for identical inputs and flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import FgacError
from .harness import database_from_scenario, exec_procedure, exec_query
from .model import load_data_model, load_scenario, scenario_to_inserts, sql_schema
from .ocl import ObjectRef, eval_ocl, parse_bool_ocl
from .ocl2sql import ConstraintRegistry, load_registry
from .optimizer import load_facts, prove_check_unnecessary, run_optimization
from .policy import load_security_model, resource_keywords
from .secquery import gen_sec_query, render_artifacts, render_procedure
from .sql.parser import parse_select


def _registry_typings(policy) -> list[dict[str, str]]:
    typings = []
    for res in policy.resources():
        typings.append(resource_keywords(policy.data_model, policy.user_class, res))
    typings.append({"caller": policy.user_class})
    return typings


def _load_registry_arg(args, policy) -> ConstraintRegistry | None:
    if getattr(args, "registry", None):
        return load_registry(args.registry, policy.data_model, _registry_typings(policy))
    return None


def _solver_command(args) -> str:
    solver = getattr(args, "solver", None) or os.environ.get("FGAC_SOLVER")
    if not solver:
        raise FgacError("no solver configured; pass --solver or set FGAC_SOLVER")
    return solver


def _write(path: Path, text: str, verbose: bool) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    if verbose:
        print(f"wrote {path}", file=sys.stderr)


def cmd_schema(args) -> int:
    dm = load_data_model(args.model)
    script = sql_schema(dm)
    if args.scenario:
        script += scenario_to_inserts(dm, load_scenario(args.scenario))
    if args.output:
        _write(Path(args.output), script, args.verbose)
    else:
        print(script, end="")
    return 0


def cmd_compile(args) -> int:
    dm = load_data_model(args.model)
    policy = load_security_model(args.policy, dm)
    registry = _load_registry_arg(args, policy)
    query = parse_select(Path(args.query).read_text(encoding="utf-8"))
    proc, funcs = gen_sec_query(policy, query, registry)
    text = render_artifacts(proc, funcs)
    if args.output:
        _write(Path(args.output), text, args.verbose)
    else:
        print(text, end="")
    return 0


def cmd_optimize(args) -> int:
    dm = load_data_model(args.model)
    policy = load_security_model(args.policy, dm)
    registry = _load_registry_arg(args, policy)
    query = parse_select(Path(args.query).read_text(encoding="utf-8"))
    facts = load_facts(args.facts, policy) if args.facts else []
    solver = _solver_command(args)
    outdir = Path(args.output_dir) if args.output_dir else None
    optimized, funcs, reports = run_optimization(
        policy,
        query,
        facts,
        solver,
        registry=registry,
        timeout=args.timeout,
        jobs=args.jobs,
        script_dir=outdir / "smt" if outdir else None,
    )
    for report in reports:
        print(report.line())
    if outdir:
        _write(outdir / "optimized_procedure.sql", render_artifacts(optimized, funcs), args.verbose)
        _write(
            outdir / "report.txt",
            "".join(report.line() + "\n" for report in reports),
            args.verbose,
        )
    else:
        print(render_procedure(optimized), end="")
    return 0


def cmd_prove(args) -> int:
    solver = _solver_command(args)

    class _RawProblem:
        def __init__(self, text: str):
            self.text = text

        def smtlib(self) -> str:
            return self.text

    outcome = prove_check_unnecessary(
        _RawProblem(Path(args.script).read_text(encoding="utf-8")),
        solver,
        timeout=args.timeout,
    )
    print(outcome.reason)
    return 0


def cmd_run(args) -> int:
    dm = load_data_model(args.model)
    policy = load_security_model(args.policy, dm)
    registry = _load_registry_arg(args, policy)
    scenario = load_scenario(args.scenario)
    query = parse_select(Path(args.query).read_text(encoding="utf-8"))
    db = database_from_scenario(dm, scenario)
    if args.unsecured:
        result = exec_query(db, query, params={"caller": args.caller})
    else:
        proc, funcs = gen_sec_query(policy, query, registry)
        result = exec_procedure(db, proc, funcs, args.caller, args.role)
    if result.is_rows:
        print("\t".join(result.columns))
        for row in result.rows:
            print("\t".join("NULL" if v is None else str(v) for v in row))
        return 0
    print(f"{result.kind}: {result.message}", file=sys.stderr)
    return 1


def cmd_eval(args) -> int:
    dm = load_data_model(args.model)
    scenario = load_scenario(args.scenario)
    bindings = dict(pair.split("=", 1) for pair in args.bind)
    keywords = {}
    for name, object_id in bindings.items():
        cls = scenario.class_of(object_id)
        if cls is None:
            print(f"unknown object {object_id!r}", file=sys.stderr)
            return 1
        keywords[name] = cls
    constraint = parse_bool_ocl(args.constraint, dm, keywords)
    binding = {name: ObjectRef(oid, keywords[name]) for name, oid in bindings.items()}
    print(repr(eval_ocl(scenario, constraint, binding)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fgacsql")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schema", help="emit DDL (and inserts) for a data model")
    p.add_argument("--model", required=True)
    p.add_argument("--scenario")
    p.add_argument("--output")
    p.set_defaults(func=cmd_schema)

    p = sub.add_parser("compile", help="generate the secured procedure for a query")
    p.add_argument("--model", required=True)
    p.add_argument("--policy", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--registry")
    p.add_argument("--output")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("optimize", help="prove checks unnecessary and emit the optimized procedure")
    p.add_argument("--model", required=True)
    p.add_argument("--policy", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--facts")
    p.add_argument("--registry")
    p.add_argument("--solver")
    p.add_argument("--timeout", type=float, default=10.0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("prove", help="run the solver on one elimination script")
    p.add_argument("--script", required=True)
    p.add_argument("--solver")
    p.add_argument("--timeout", type=float, default=10.0)
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("run", help="execute a secured query in the harness")
    p.add_argument("--model", required=True)
    p.add_argument("--policy", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--registry")
    p.add_argument("--caller", required=True)
    p.add_argument("--role", required=True)
    p.add_argument("--unsecured", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="evaluate a constraint on a scenario")
    p.add_argument("--model", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--bind", action="append", default=[], metavar="KEYWORD=OBJECT")
    p.add_argument("constraint")
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_err:
        return 2 if exit_err.code not in (0, None) else 0
    try:
        return args.func(args)
    except FgacError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (OSError, ValueError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
