"""The three staging projections, their application helpers, and the
equivalence matrix that checks every engine against every enumerated path.

Projection 1 specializes a dialog interpreter to a dialog, yielding a stager.
Projection 2 specializes mix itself to the interpreter, yielding a compiler
whose runs reproduce projection 1's outputs.  Projection 3 specializes mix to
mix, yielding a compiler generator with nothing dialog-specific left in it.

Residual artifacts take mix's canonical argument shape: a compiler expects
``[((param value)), (dynamic-names...)]`` and a cogen expects the interpreter
packaged the same way; apply_compiler/apply_cogen do that packaging.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from pathlib import Path

from .ddsl import DialogSpec, dialog_to_datum, enumerate_paths
from .dinterp import (host_interp, interp_l0_program, interp_step_l0_program,
                      direct_compile, outcome_to_datum)
from .lcore import (Atom, Datum, EvalError, Program, eval_program,
                    lift_program, print_datum, program_to_datum)
from .mixer import (BindingSplit, DEFAULT_MAX_POINTS, DEFAULT_MAX_STATIC_STEPS,
                    MixError, alpha_normalize, mix_host, mix_l0_program,
                    programs_alpha_equal)

__all__ = [
    "ProjectionArtifacts", "project1", "project2", "project3",
    "apply_compiler", "apply_cogen", "interp_split",
    "MatrixCell", "MatrixReport", "EquivalenceFailure",
    "run_equivalence_matrix", "build_artifacts", "write_artifacts",
    "DEFAULT_APPLY_BUDGET",
]

DEFAULT_APPLY_BUDGET = 10**9  # evaluating residual compilers/cogens


class EquivalenceFailure(EvalError):
    def __init__(self, cell: "MatrixCell"):
        super().__init__(f"diverging cell: {cell.fixture}/{cell.check}/{cell.detail}"
                         + (f" ({cell.note})" if cell.note else ""))
        self.cell = cell


def interp_split(interp: Program, dialog: Datum) -> BindingSplit:
    """Dialog static, everything else (the responses) dynamic."""
    params = interp.by_name[interp.entry].params
    return BindingSplit({params[0]: dialog}, params[1:])


def project1(interp: Program, dialog: Datum,
             max_points: int = DEFAULT_MAX_POINTS,
             max_static_steps: int = DEFAULT_MAX_STATIC_STEPS) -> Program:
    """First projection: specialize the interpreter to the dialog."""
    return mix_host(interp, interp_split(interp, dialog),
                    max_points, max_static_steps)


def _mix_split(mix_l0: Program, subject: Program) -> BindingSplit:
    params = mix_l0.by_name[mix_l0.entry].params
    return BindingSplit({params[0]: program_to_datum(subject)}, params[1:])


def _run_mix_l0(mix_l0: Program, subject: Program, sa: Datum, dn: Datum,
                budget: int) -> Program:
    rep = eval_program(mix_l0, [program_to_datum(subject), sa, dn], budget=budget)
    if rep.budget_exceeded:
        raise MixError(f"mix_l0 run exceeded {budget} eval steps")
    if rep.aborted:
        raise MixError(f"mix_l0 aborted: {print_datum(rep.result)}")
    return lift_program(rep.result)


def project2(mix_l0: Program, interp: Program, engine: str = "host",
             max_points: int = DEFAULT_MAX_POINTS,
             max_static_steps: int = DEFAULT_MAX_STATIC_STEPS,
             l0_budget: int = DEFAULT_APPLY_BUDGET) -> Program:
    """Second projection: specialize mix to the interpreter, yielding a
    compiler.  engine='l0' runs the outer mix interpretively (full
    self-application, slow)."""
    if engine == "host":
        return mix_host(mix_l0, _mix_split(mix_l0, interp),
                        max_points, max_static_steps)
    params = mix_l0.by_name[mix_l0.entry].params
    sa = ((Atom(params[0]), program_to_datum(interp)),)
    dn = tuple(Atom(p) for p in params[1:])
    return _run_mix_l0(mix_l0, mix_l0, sa, dn, l0_budget)


def project3(mix_l0: Program, engine: str = "host",
             max_points: int = DEFAULT_MAX_POINTS,
             max_static_steps: int = DEFAULT_MAX_STATIC_STEPS,
             l0_budget: int = 4 * DEFAULT_APPLY_BUDGET) -> Program:
    """Third projection: specialize mix to mix, yielding the compiler
    generator."""
    if engine == "host":
        return mix_host(mix_l0, _mix_split(mix_l0, mix_l0),
                        max_points, max_static_steps)
    params = mix_l0.by_name[mix_l0.entry].params
    sa = ((Atom(params[0]), program_to_datum(mix_l0)),)
    dn = tuple(Atom(p) for p in params[1:])
    return _run_mix_l0(mix_l0, mix_l0, sa, dn, l0_budget)


def apply_compiler(compiler: Program, interp: Program, dialog: Datum,
                   budget: int = DEFAULT_APPLY_BUDGET) -> Program:
    """Run a projection-2 compiler on a dialog, decoding the stager it emits.

    The compiler inherits mix's residual argument shape: the static assoc
    binding the interpreter's dialog parameter, then the dynamic names.
    """
    params = interp.by_name[interp.entry].params
    sa = ((Atom(params[0]), dialog),)
    dn = tuple(Atom(p) for p in params[1:])
    rep = eval_program(compiler, [sa, dn], budget=budget)
    if not rep.ok:
        raise MixError(f"compiler run failed: {rep.outcome()}")
    return lift_program(rep.result)


def apply_cogen(cogen: Program, mix_l0: Program, interp: Program,
                budget: int = DEFAULT_APPLY_BUDGET) -> Program:
    """Run a projection-3 cogen on an interpreter, decoding the compiler."""
    params = mix_l0.by_name[mix_l0.entry].params
    sa = ((Atom(params[0]), program_to_datum(interp)),)
    dn = tuple(Atom(p) for p in params[1:])
    rep = eval_program(cogen, [sa, dn], budget=budget)
    if not rep.ok:
        raise MixError(f"cogen run failed: {rep.outcome()}")
    return lift_program(rep.result)


@dataclass
class ProjectionArtifacts:
    """Everything the projections produce for one dialog."""

    dialog: DialogSpec
    stager_batch: Program
    stager_step: Program
    compiler: Program            # projection 2, batch interpreter
    cogen: Program               # projection 3
    stager_compiled: Program     # compiler applied to this dialog
    stager_cogen: Program        # (cogen -> compiler) applied to this dialog
    provenance: dict = field(default_factory=dict)


_shared_cache: dict = {}


def shared_programs(engine: str = "host") -> dict:
    """Dialog-independent artifacts, built once: the compilers for both
    interpreter variants and the cogen (plus its derived compilers)."""
    cached = _shared_cache.get(engine)
    if cached is not None:
        return cached
    mixl0 = mix_l0_program()
    interp = interp_l0_program()
    step = interp_step_l0_program()
    t0 = time.time()
    compiler = project2(mixl0, interp, engine=engine)
    compiler_step = project2(mixl0, step, engine=engine)
    cogen = project3(mixl0, engine=engine)
    cogen_compiler = apply_cogen(cogen, mixl0, interp)
    cogen_compiler_step = apply_cogen(cogen, mixl0, step)
    out = {
        "mix_l0": mixl0, "interp": interp, "interp_step": step,
        "compiler": compiler, "compiler_step": compiler_step,
        "cogen": cogen,
        "cogen_compiler": cogen_compiler,
        "cogen_compiler_step": cogen_compiler_step,
        "build_seconds": time.time() - t0,
    }
    _shared_cache[engine] = out
    return out


def build_artifacts(spec: DialogSpec, engine: str = "host") -> ProjectionArtifacts:
    shared = shared_programs(engine)
    gd = dialog_to_datum(spec)
    interp, step = shared["interp"], shared["interp_step"]
    return ProjectionArtifacts(
        dialog=spec,
        stager_batch=project1(interp, gd),
        stager_step=project1(step, gd),
        compiler=shared["compiler"],
        cogen=shared["cogen"],
        stager_compiled=apply_compiler(shared["compiler"], interp, gd),
        stager_cogen=apply_compiler(shared["cogen_compiler"], interp, gd),
        provenance={"outer_mix": engine},
    )


# ---------------------------------------------------------------------------
# equivalence matrix


@dataclass(frozen=True)
class MatrixCell:
    fixture: str
    check: str       # engine_agreement | structural_identity | speedup | lexical
    detail: str      # vector or artifact pair
    ok: bool
    note: str = ""


@dataclass
class MatrixReport:
    cells: list

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.cells)

    @property
    def first_failure(self) -> MatrixCell | None:
        return next((c for c in self.cells if not c.ok), None)

    def raise_if_failed(self) -> None:
        bad = self.first_failure
        if bad is not None:
            raise EquivalenceFailure(bad)

    def lines(self, as_json: bool = False) -> list:
        if as_json:
            import json
            return [json.dumps({"fixture": c.fixture, "check": c.check,
                                "detail": c.detail, "ok": c.ok, "note": c.note})
                    for c in self.cells]
        width = max((len(c.fixture) + len(c.check) + len(c.detail)) for c in self.cells) + 6
        out = []
        for c in self.cells:
            label = f"{c.fixture} | {c.check} | {c.detail}"
            status = "ok" if c.ok else "FAIL"
            note = f"  {c.note}" if c.note else ""
            out.append(f"{label:<{width}} {status}{note}")
        return out


def _vec_str(vec: tuple) -> str:
    return "(" + " ".join(print_datum(v) for v in vec) + ")"


def _invalid_probes(paths: list) -> list:
    """Structured invalid vectors: truncations, one bogus substitution per
    position, one overlong vector (all derived from the first path)."""
    if not paths:
        return []
    base = paths[0][0]
    bogus = Atom("zz-bogus")
    probes = [base + (bogus,)]
    for k in range(len(base)):
        probes.append(base[:k])
        probes.append(base[:k] + (bogus,) + base[k + 1:])
    good = {v for v, _ in paths}
    return [p for p in dict.fromkeys(probes) if p not in good]


def run_equivalence_matrix(specs: list, engine: str = "host",
                           artifacts: dict | None = None,
                           path_cap: int = 10_000) -> MatrixReport:
    """For every fixture and every enumerated path (plus invalid probes),
    assert the full chain of engines agrees with the host oracle; assert the
    structural identities between projection outputs; record the speedup.

    ``artifacts`` may pre-supply ProjectionArtifacts per fixture name (the
    mutation harness uses this to inject corrupted programs).
    """
    shared = shared_programs(engine)
    interp = shared["interp"]
    cells: list = []

    cells.append(MatrixCell(
        "*", "structural_identity", "cogen(interp) vs compiler",
        programs_alpha_equal(shared["cogen_compiler"], shared["compiler"])))
    cells.append(MatrixCell(
        "*", "structural_identity", "cogen(interp_step) vs compiler_step",
        programs_alpha_equal(shared["cogen_compiler_step"], shared["compiler_step"])))

    for spec in specs:
        name = spec.name.name
        art = (artifacts or {}).get(name) or build_artifacts(spec, engine)
        gd = dialog_to_datum(spec)
        paths = enumerate_paths(spec, cap=path_cap)
        engines = [
            ("interp_l0", lambda v: eval_program(interp, [gd, v])),
            ("direct_compile", lambda v, p=direct_compile(spec): eval_program(p, [v])),
            ("p1_stager", lambda v: eval_program(art.stager_batch, [v])),
            ("p2_stager", lambda v: eval_program(art.stager_compiled, [v])),
            ("p3_stager", lambda v: eval_program(art.stager_cogen, [v])),
        ]
        vectors = [v for v, _ in paths] + _invalid_probes(paths)
        for v in vectors:
            expected = outcome_to_datum(host_interp(spec, v))
            for ename, run in engines:
                rep = run(v)
                good = rep.ok and rep.result == expected
                cells.append(MatrixCell(
                    name, "engine_agreement", f"{ename} {_vec_str(v)}", good,
                    "" if good else
                    f"want {print_datum(expected)}, got {rep.outcome()}"))
        cells.append(MatrixCell(
            name, "structural_identity", "p2_stager vs p1_stager",
            programs_alpha_equal(art.stager_compiled, art.stager_batch)))
        cells.append(MatrixCell(
            name, "structural_identity", "p3_stager vs p1_stager",
            programs_alpha_equal(art.stager_cogen, art.stager_batch)))
        for v, _ in paths:
            si = eval_program(art.stager_batch, [v]).steps
            ii = eval_program(interp, [gd, v]).steps
            cells.append(MatrixCell(
                name, "speedup", f"stager {si} < interp {ii} on {_vec_str(v)}",
                si < ii))
    return MatrixReport(cells)


# ---------------------------------------------------------------------------
# artifact files


def output_dir(override: str | None = None) -> Path:
    return Path(override or os.environ.get("FUTAMIX_OUT", "out"))


def write_program(path: Path, prog: Program) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(print_datum(program_to_datum(prog)) + "\n", encoding="utf-8")
    return path


def write_artifacts(art: ProjectionArtifacts, out: Path) -> list:
    name = art.dialog.name.name
    return [
        write_program(out / f"stager_{name}.l0", art.stager_batch),
        write_program(out / f"stager_step_{name}.l0", art.stager_step),
        write_program(out / "compiler.l0", art.compiler),
        write_program(out / "cogen.l0", art.cogen),
    ]
