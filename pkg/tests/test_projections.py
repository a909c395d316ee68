from __future__ import annotations

from dataclasses import replace

import pytest

from futamix.ddsl import dialog_to_datum, enumerate_paths
from futamix.dinterp import host_interp, interp_l0_program, \
    interp_step_l0_program, outcome_to_datum
from futamix.lcore import (Atom, Call, Def, Lit, Program, eval_program,
                           lift_program, print_datum, program_to_datum)
from futamix.mixer import mix_l0_program, programs_alpha_equal
from futamix.projections import (EquivalenceFailure, apply_cogen,
                                 apply_compiler, build_artifacts, project1,
                                 project2, project3, run_equivalence_matrix,
                                 write_artifacts)

SMALL_DARK_NO = (Atom("small"), Atom("dark"), Atom("no"))


def test_project1_coffee_stager(fixtures):
    stager = project1(interp_l0_program(), dialog_to_datum(fixtures["coffee"]))
    entry = stager.by_name[stager.entry]
    assert entry.params == ("responses",)
    rep = eval_program(stager, [SMALL_DARK_NO])
    assert print_datum(rep.result) == \
        '(done "coffee as ordered" ((size small) (blend dark) (cream no)))'


def test_project1_empty_accepts_only_nil(fixtures):
    stager = project1(interp_l0_program(), dialog_to_datum(fixtures["empty"]))
    assert eval_program(stager, [()]).result[0] is Atom("done")
    assert eval_program(stager, [(Atom("x"),)]).result[0] is Atom("invalid")


def test_project1_exhaustive_paths(fixtures):
    interp = interp_l0_program()
    for spec in fixtures.values():
        gd = dialog_to_datum(spec)
        stager = project1(interp, gd)
        for v, _ in enumerate_paths(spec):
            assert eval_program(stager, [v]).result == \
                outcome_to_datum(host_interp(spec, v))


def test_project2_identity_all_fixtures(fixtures, shared):
    """eval(compiler, [g]) is alpha-identical to project1(interp, g), and
    behaviorally equal on every enumerated path."""
    interp = shared["interp"]
    compiler = shared["compiler"]
    for spec in fixtures.values():
        gd = dialog_to_datum(spec)
        via_compiler = apply_compiler(compiler, interp, gd)
        direct = project1(interp, gd)
        assert programs_alpha_equal(via_compiler, direct)
        for v, _ in enumerate_paths(spec):
            assert eval_program(via_compiler, [v]).outcome() == \
                eval_program(direct, [v]).outcome()


def test_project2_branchy_two_level_oracle(fixtures, shared):
    spec = fixtures["branchy"]
    stager = apply_compiler(shared["compiler"], shared["interp"],
                            dialog_to_datum(spec))
    for v, _ in enumerate_paths(spec):
        assert eval_program(stager, [v]).result == \
            outcome_to_datum(host_interp(spec, v))


def test_project3_identity(shared):
    """eval(cogen, [interp]) is alpha-identical to project2(mix, interp)."""
    assert programs_alpha_equal(shared["cogen_compiler"], shared["compiler"])
    assert programs_alpha_equal(shared["cogen_compiler_step"],
                                shared["compiler_step"])


def test_project3_cogen_on_step_interp(fixtures, shared):
    """The cogen-made step compiler produces working step stagers."""
    spec = fixtures["coffee"]
    gd = dialog_to_datum(spec)
    stager = apply_compiler(shared["cogen_compiler_step"], shared["interp_step"], gd)
    oracle = project1(shared["interp_step"], gd)
    assert programs_alpha_equal(stager, oracle)
    rep = eval_program(stager, [(Atom("small"),)])
    assert rep.result[0] is Atom("need") and rep.result[1] is Atom("blend")


def _atoms_of(prog: Program) -> set:
    out = set()

    def walk(d):
        if type(d) is tuple:
            for x in d:
                walk(x)
        elif isinstance(d, Atom):
            out.add(d.name)

    walk(program_to_datum(prog))
    return out


def test_cogen_is_dialog_and_interpreter_agnostic(fixtures, shared):
    atoms = _atoms_of(shared["cogen"])
    assert not atoms & {"size", "blend", "cream", "coffee"}
    fixture_atoms = set()
    for spec in fixtures.values():
        fixture_atoms.add(spec.name.name)
        for v, seq in enumerate_paths(spec):
            fixture_atoms |= {a.name for a in v} | {a.name for a in seq}
    assert not atoms & fixture_atoms
    # nothing specific to either interpreter variety
    interp_names = {d.name for d in interp_l0_program().defs} \
        | {d.name for d in interp_step_l0_program().defs}
    assert not atoms & interp_names


def test_projection_telescoping(fixtures, artifacts, shared):
    interp = shared["interp"]
    for name, spec in fixtures.items():
        art = artifacts[name]
        gd = dialog_to_datum(spec)
        for v, _ in enumerate_paths(spec):
            want = eval_program(interp, [gd, v]).outcome()
            for prog in (art.stager_batch, art.stager_compiled, art.stager_cogen):
                assert eval_program(prog, [v]).outcome() == want


def test_speedup_on_every_path(fixtures, artifacts, shared):
    interp = shared["interp"]
    for name, spec in fixtures.items():
        gd = dialog_to_datum(spec)
        stager = artifacts[name].stager_batch
        for v, _ in enumerate_paths(spec):
            assert eval_program(stager, [v]).steps < \
                eval_program(interp, [gd, v]).steps


def test_matrix_all_green(fixtures, artifacts):
    report = run_equivalence_matrix(list(fixtures.values()), artifacts=artifacts)
    assert report.ok
    assert report.first_failure is None
    report.raise_if_failed()  # must not raise
    lines = report.lines()
    assert any("speedup" in l for l in lines)
    assert len(report.lines(as_json=True)) == len(report.cells)


def _corrupt(prog: Program) -> Program:
    """Swap the first quoted atom found in a def body for a wrong one."""

    def mutate(e):
        if isinstance(e, Lit) and isinstance(e.value, Atom):
            return Lit(Atom("corrupted")), True
        if isinstance(e, Lit) and type(e.value) is tuple and e.value:
            return Lit((Atom("corrupted"),) + e.value[1:]), True
        if hasattr(e, "args"):
            args = []
            done = False
            for a in e.args:
                if not done:
                    a, done = mutate(a)
                args.append(a)
            return replace(e, args=tuple(args)), done
        if hasattr(e, "cond"):
            c, done = mutate(e.cond)
            if done:
                return replace(e, cond=c), True
            t, done = mutate(e.then)
            if done:
                return replace(e, then=t), True
            a, done = mutate(e.alt)
            return replace(e, alt=a), done
        if hasattr(e, "arg"):
            a, done = mutate(e.arg)
            return replace(e, arg=a), done
        return e, False

    defs = list(prog.defs)
    for i, d in enumerate(defs):
        body, done = mutate(d.body)
        if done:
            defs[i] = Def(d.name, d.params, body)
            return Program(tuple(defs))
    raise AssertionError("nothing to corrupt")


@pytest.mark.parametrize("field", ["stager_batch", "stager_compiled", "stager_cogen"])
def test_mutation_sensitivity(fixtures, artifacts, field):
    """Corrupting any one residual artifact makes the matrix fail and name
    the diverging cell."""
    art = artifacts["coffee"]
    broken = replace(art, **{field: _corrupt(getattr(art, field))})
    report = run_equivalence_matrix([fixtures["coffee"]],
                                    artifacts={"coffee": broken})
    assert not report.ok
    bad = report.first_failure
    assert bad.fixture == "coffee"
    with pytest.raises(EquivalenceFailure) as ei:
        report.raise_if_failed()
    assert "coffee" in str(ei.value)


def test_artifact_files_are_byte_stable(tmp_path, fixtures, artifacts):
    a = write_artifacts(artifacts["coffee"], tmp_path / "one")
    b = write_artifacts(artifacts["coffee"], tmp_path / "two")
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()
    names = {p.name for p in a}
    assert names == {"stager_coffee.l0", "stager_step_coffee.l0",
                     "compiler.l0", "cogen.l0"}
    for p in a:  # every artifact is a valid canonical program
        from futamix.lcore import parse_datum
        prog = lift_program(parse_datum(p.read_text("utf-8")))
        assert print_datum(program_to_datum(prog)) + "\n" == p.read_text("utf-8")


# ---------------------------------------------------------------------------
# full self-application (the slow mode)


@pytest.mark.slow
def test_project2_full_self_application(shared):
    mixl0 = mix_l0_program()
    compiler = project2(mixl0, shared["interp"], engine="l0")
    assert programs_alpha_equal(compiler, shared["compiler"])


@pytest.mark.slow
def test_cogen_fixpoint_flavor(shared):
    """The cogen is the same whether the outer mix ran natively or as an
    interpreted L0 program."""
    mixl0 = mix_l0_program()
    cogen_slow = project3(mixl0, engine="l0")
    assert programs_alpha_equal(cogen_slow, shared["cogen"])
    via_slow = apply_cogen(cogen_slow, mixl0, shared["interp"])
    assert programs_alpha_equal(via_slow, shared["compiler"])
