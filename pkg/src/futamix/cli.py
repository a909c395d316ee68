"""Command-line interface.

Subcommands: run, mix, project, stage, check, serve.
Exit codes: 0 ok, 1 evaluation/equivalence failure, 2 input error,
3 budget exhausted, 4 environment problem.  FUTAMIX_OUT overrides the
artifact output directory; --json switches reports to machine lines.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import ddsl
from .ddsl import DialogSpec, dialog_to_datum, parse_dialog
from .dinterp import (interp_l0_program, interp_step_l0_program,
                      outcome_from_datum, NeedInput, Done, Invalid)
from .lcore import (Atom, L0Error, ParseError, eval_program, lift_program,
                    parse_datum, print_datum, program_to_datum)
from .mixer import (BindingSplit, BudgetExceeded, mix_host, mix_l0_program,
                    DEFAULT_MAX_POINTS, DEFAULT_MAX_STATIC_STEPS)
from . import projections as prj

OK, EVAL_ERR, INPUT_ERR, BUDGET_ERR, ENV_ERR = 0, 1, 2, 3, 4


def _load_program(path: str):
    text = Path(path).read_text(encoding="utf-8")
    return lift_program(parse_datum(text))


def _emit(args, payload: dict, human: str) -> None:
    print(json.dumps(payload) if args.json else human)


def cmd_run(args) -> int:
    prog = _load_program(args.program)
    arg_list = parse_datum(args.args)
    if type(arg_list) is not tuple:
        print("error: --args must be a list datum", file=sys.stderr)
        return INPUT_ERR
    rep = eval_program(prog, arg_list, budget=args.budget_steps)
    if rep.budget_exceeded:
        _emit(args, {"budget_exceeded": True, "steps": rep.steps},
              f"budget exceeded after {rep.steps} steps")
        return BUDGET_ERR
    kind = "abort" if rep.aborted else "result"
    _emit(args, {kind: print_datum(rep.result), "steps": rep.steps},
          f"{kind}: {print_datum(rep.result)}\nsteps: {rep.steps}")
    return EVAL_ERR if rep.aborted else OK


def cmd_mix(args) -> int:
    subject = _load_program(args.subject)
    static = parse_datum(args.static)
    dynamic = parse_datum(args.dynamic)
    split = BindingSplit({p.name: v for p, v in static},
                         tuple(a.name for a in dynamic))
    if args.engine == "host":
        residual = mix_host(subject, split,
                            args.budget_points, args.budget_steps)
    else:
        sa = tuple((p, v) for p, v in static)
        rep = eval_program(mix_l0_program(),
                           [program_to_datum(subject), sa, dynamic],
                           budget=args.budget_steps)
        if rep.budget_exceeded:
            print(f"budget exceeded after {rep.steps} steps", file=sys.stderr)
            return BUDGET_ERR
        if rep.aborted:
            print(f"mix aborted: {print_datum(rep.result)}", file=sys.stderr)
            return EVAL_ERR
        residual = lift_program(rep.result)
    text = print_datum(program_to_datum(residual))
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
        _emit(args, {"output": args.output, "bytes": len(text) + 1},
              f"{args.output} ({len(text) + 1} bytes)")
    else:
        print(text)
    return OK


def cmd_project(args) -> int:
    out = prj.output_dir(args.out)
    interp = interp_step_l0_program() if args.interp == "step" else interp_l0_program()
    suffix = "_step" if args.interp == "step" else ""
    mixl0 = mix_l0_program()
    written = []
    if args.n == 1:
        if not args.dialog:
            print("error: project 1 needs --dialog", file=sys.stderr)
            return INPUT_ERR
        spec = parse_dialog(Path(args.dialog).read_text(encoding="utf-8"))
        stager = prj.project1(interp, dialog_to_datum(spec),
                              args.budget_points, args.budget_steps)
        name = f"stager{suffix}_{spec.name.name}.l0" if suffix else f"stager_{spec.name.name}.l0"
        written.append(prj.write_program(out / name, stager))
    elif args.n == 2:
        compiler = prj.project2(mixl0, interp, engine=args.engine,
                                max_points=args.budget_points,
                                max_static_steps=args.budget_steps)
        written.append(prj.write_program(out / f"compiler{suffix}.l0", compiler))
    else:
        cogen = prj.project3(mixl0, engine=args.engine,
                             max_points=args.budget_points,
                             max_static_steps=args.budget_steps)
        written.append(prj.write_program(out / "cogen.l0", cogen))
    for p in written:
        _emit(args, {"artifact": str(p), "bytes": p.stat().st_size},
              f"{p} ({p.stat().st_size} bytes)")
    return OK


def _stage_engine(args, spec: DialogSpec):
    """A function from the responses-so-far vector to a StageOutcome."""
    gd = dialog_to_datum(spec)
    step = interp_step_l0_program()
    if args.engine == "interp":
        return lambda rs: eval_program(step, [gd, rs])
    if args.engine == "stager":
        stager = prj.project1(step, gd)
    elif args.engine == "compiled":
        stager = prj.apply_compiler(prj.shared_programs()["compiler_step"], step, gd)
    else:  # cogen
        stager = prj.apply_compiler(prj.shared_programs()["cogen_compiler_step"], step, gd)
    return lambda rs: eval_program(stager, [rs])


def cmd_stage(args) -> int:
    spec = parse_dialog(Path(args.dialog).read_text(encoding="utf-8"))
    run = _stage_engine(args, spec)
    responses: tuple = ()
    transcript = []
    while True:
        rep = run(responses)
        if not rep.ok:
            print(f"engine failure: {rep.outcome()}", file=sys.stderr)
            return EVAL_ERR
        outcome = outcome_from_datum(rep.result)
        if isinstance(outcome, Done):
            for pid, val in transcript:
                print(f"  {pid} = {val}")
            print(print_datum(rep.result))
            return OK
        if isinstance(outcome, Invalid):
            for pid, val in transcript:
                print(f"  {pid} = {val}")
            print(print_datum(rep.result))
            return EVAL_ERR
        choices = " / ".join(c.name for c in outcome.choices)
        print(f"{outcome.text} [{choices}]")
        line = sys.stdin.readline()
        if not line:
            print("input ended", file=sys.stderr)
            return EVAL_ERR
        token = line.strip()
        try:
            value = Atom(token) if token else None
        except ValueError:
            value = None
        if value is None or value not in outcome.choices:
            if args.strict and value is not None:
                responses += (value,)
                transcript.append((outcome.prompt_id.name, token))
                continue
            if args.strict:
                print(f"not an atom: {token!r}", file=sys.stderr)
                return INPUT_ERR
            print(f"'{token}' is not one of: {choices}")
            continue
        responses += (value,)
        transcript.append((outcome.prompt_id.name, value.name))


def cmd_check(args) -> int:
    fixtures_dir = Path(args.fixtures) if args.fixtures else None
    if fixtures_dir is not None:
        if not fixtures_dir.is_dir():
            print(f"error: no such fixtures dir {fixtures_dir}", file=sys.stderr)
            return INPUT_ERR
        specs = [parse_dialog(p.read_text(encoding="utf-8"))
                 for p in sorted(fixtures_dir.glob("*.dlg"))]
        if not specs:
            print(f"error: no .dlg files in {fixtures_dir}", file=sys.stderr)
            return INPUT_ERR
    else:
        specs = [ddsl.load_fixture(n) for n in ddsl.FIXTURES]
    engine = "l0" if args.slow_selfapply else "host"
    report = prj.run_equivalence_matrix(specs, engine=engine)
    for line in report.lines(as_json=args.json):
        print(line)
    if report.ok:
        print(f"all {len(report.cells)} cells ok")
        return OK
    bad = report.first_failure
    print(f"FAILED at {bad.fixture}/{bad.check}/{bad.detail}", file=sys.stderr)
    return EVAL_ERR


def cmd_serve(args) -> int:
    try:
        import uvicorn
    except ImportError:  # pragma: no cover
        print("error: uvicorn not installed", file=sys.stderr)
        return ENV_ERR
    from .service import create_app
    fixtures = None
    if args.fixtures:
        d = Path(args.fixtures)
        if not d.is_dir():
            print(f"error: no such fixtures dir {d}", file=sys.stderr)
            return INPUT_ERR
        fixtures = [p.read_text(encoding="utf-8") for p in sorted(d.glob("*.dlg"))]
    app = create_app(fixture_sources=fixtures,
                     journal=Path(args.journal) if args.journal else None)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    except (OSError, SystemExit) as e:
        print(f"error: cannot serve on port {args.port}: {e}", file=sys.stderr)
        return ENV_ERR
    return OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="futamix",
        description="Partial evaluation, dialog staging, and the Futamura projections.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evaluate an L0 program")
    p.add_argument("program")
    p.add_argument("--args", default="()", help="argument list datum")
    p.add_argument("--budget-steps", type=int, default=10**8)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("mix", help="partially evaluate an L0 program")
    p.add_argument("subject")
    p.add_argument("--static", default="()", help="((param value) ...) datum")
    p.add_argument("--dynamic", default="()", help="(param ...) datum")
    p.add_argument("--engine", choices=["host", "l0"], default="host")
    p.add_argument("-o", "--output")
    p.add_argument("--budget-points", type=int, default=DEFAULT_MAX_POINTS)
    p.add_argument("--budget-steps", type=int, default=DEFAULT_MAX_STATIC_STEPS)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_mix)

    p = sub.add_parser("project", help="run a staging projection")
    p.add_argument("n", type=int, choices=[1, 2, 3])
    p.add_argument("--dialog", help="dialog file (projection 1)")
    p.add_argument("--interp", choices=["batch", "step"], default="batch")
    p.add_argument("--engine", choices=["host", "l0"], default="host",
                   help="l0 runs the outer mix interpretively (slow)")
    p.add_argument("--out", help="output dir (default out/ or FUTAMIX_OUT)")
    p.add_argument("--budget-points", type=int, default=DEFAULT_MAX_POINTS)
    p.add_argument("--budget-steps", type=int, default=DEFAULT_MAX_STATIC_STEPS)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_project)

    p = sub.add_parser("stage", help="stage a dialog interactively")
    p.add_argument("dialog")
    p.add_argument("--engine", choices=["interp", "stager", "compiled", "cogen"],
                   default="interp")
    p.add_argument("--strict", action="store_true",
                   help="feed invalid input to the engine instead of re-prompting")
    p.set_defaults(fn=cmd_stage)

    p = sub.add_parser("check", help="run the equivalence matrix")
    p.add_argument("fixtures", nargs="?", help="directory of .dlg files")
    p.add_argument("--json", action="store_true")
    p.add_argument("--slow-selfapply", action="store_true",
                   help="run the outer mix interpretively (full self-application)")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("serve", help="start the staging service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.add_argument("--fixtures", help="directory of .dlg files to preregister")
    p.add_argument("--journal", help="append-only session journal file")
    p.set_defaults(fn=cmd_serve)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return BUDGET_ERR
    except (ParseError, ddsl.DialogError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return INPUT_ERR
    except (FileNotFoundError, ValueError, TypeError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return INPUT_ERR
    except L0Error as e:
        print(f"error: {e}", file=sys.stderr)
        return EVAL_ERR


if __name__ == "__main__":
    sys.exit(main())
