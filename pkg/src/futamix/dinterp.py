"""Dialog staging engines: the L0 interpreter assets, a host-native oracle
deliberately independent of them, and a hand-written direct compiler.

The direct compiler exists purely as an oracle for behavioral equivalence;
it shares no code with mix.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Union

from .ddsl import Branch, DialogSpec, Prompt
from .lcore import (Atom, Call, Datum, Def, Expr, Fail, If, L0Error, Lit, Prim,
                    Program, Var, lift_program, parse_datum, print_datum)

__all__ = [
    "NeedInput", "Done", "Invalid", "StageOutcome", "Transcript",
    "AssetMissing", "AssetInvalid",
    "ATOM_EXTRA", "ATOM_MISSING",
    "interp_l0_program", "interp_step_l0_program", "load_asset",
    "host_interp", "host_interp_step", "direct_compile",
    "outcome_to_datum", "outcome_from_datum",
]

ATOM_EXTRA = Atom("#extra")      # invalid marker: responses left over at the end
ATOM_MISSING = Atom("#missing")  # invalid marker: responses ran out at a prompt


class AssetMissing(L0Error):
    pass


class AssetInvalid(L0Error):
    pass


@dataclass(frozen=True)
class NeedInput:
    prompt_id: Atom
    text: str
    choices: tuple


@dataclass(frozen=True)
class Done:
    message: str
    echo: tuple  # ((prompt-id, response) ...) in result-template order


@dataclass(frozen=True)
class Invalid:
    prompt_id: Atom
    response: Datum


StageOutcome = Union[NeedInput, Done, Invalid]


@dataclass(frozen=True)
class Transcript:
    pairs: tuple            # accepted (prompt-id, response) pairs in flow order
    terminal: StageOutcome  # Done or Invalid, never NeedInput


def outcome_to_datum(o: StageOutcome) -> Datum:
    """The canonical wire datum; exactly what the L0 assets produce."""
    if isinstance(o, Done):
        return (Atom("done"), o.message, tuple((i, r) for i, r in o.echo))
    if isinstance(o, Invalid):
        return (Atom("invalid"), o.prompt_id, o.response)
    return (Atom("need"), o.prompt_id, o.text, o.choices)


def outcome_from_datum(d: Datum) -> StageOutcome:
    try:
        tag = d[0]
        if tag is Atom("done"):
            return Done(d[1], tuple((p[0], p[1]) for p in d[2]))
        if tag is Atom("invalid"):
            return Invalid(d[1], d[2])
        if tag is Atom("need"):
            return NeedInput(d[1], d[2], d[3])
    except (TypeError, IndexError):
        pass
    raise ValueError(f"not a stage outcome datum: {print_datum(d)}")


# ---------------------------------------------------------------------------
# bundled L0 assets


def load_asset(name: str) -> Program:
    try:
        text = (resources.files("futamix") / "assets" / name).read_text("utf-8")
    except (FileNotFoundError, ModuleNotFoundError) as e:
        raise AssetMissing(f"asset {name} not bundled") from e
    try:
        return lift_program(parse_datum(text))
    except L0Error as e:
        raise AssetInvalid(f"asset {name}: {e}") from e


@lru_cache(maxsize=None)
def interp_l0_program() -> Program:
    return load_asset("interp.l0")


@lru_cache(maxsize=None)
def interp_step_l0_program() -> Program:
    return load_asset("interp_step.l0")


# ---------------------------------------------------------------------------
# host-native oracle (independent of the assets by construction)


def _stage(spec: DialogSpec, responses: tuple, incremental: bool) -> StageOutcome:
    steps = list(spec.steps)
    remaining = list(responses)
    answered: list = []  # (id, value) in flow order
    while steps:
        s = steps.pop(0)
        if isinstance(s, Prompt):
            if not remaining:
                if incremental:
                    return NeedInput(s.id, s.text, s.choices)
                return Invalid(s.id, ATOM_MISSING)
            r = remaining.pop(0)
            if r not in s.choices:
                return Invalid(s.id, r)
            answered.append((s.id, r))
        else:
            chosen = dict(answered)[s.on]
            for key, sub in s.arms:
                if key == chosen:
                    steps = list(sub) + steps
                    break
    if remaining:
        return Invalid(ATOM_EXTRA, remaining[0])
    have = dict(answered)
    echo = tuple((i, have[i]) for i in spec.result.echo if i in have)
    return Done(spec.result.message, echo)


def host_interp(spec: DialogSpec, responses: tuple) -> StageOutcome:
    """Batch staging; same semantics as the interp.l0 asset."""
    return _stage(spec, tuple(responses), incremental=False)


def host_interp_step(spec: DialogSpec, responses_so_far: tuple) -> StageOutcome:
    """Incremental staging; same semantics as the interp_step.l0 asset."""
    return _stage(spec, tuple(responses_so_far), incremental=True)


# ---------------------------------------------------------------------------
# direct compiler (oracle, not derived from mix)


def direct_compile(spec: DialogSpec) -> Program:
    """Emit an L0 stager for ``spec`` by straightforward code generation.

    The stager takes the response list and mirrors host_interp exactly,
    including every invalid outcome.
    """
    rs = Var("responses")

    def drop(n: int) -> Expr:
        e: Expr = rs
        for _ in range(n):
            e = Prim("tl", (e,))
        return e

    def at(n: int) -> Expr:
        return Prim("hd", (drop(n),))

    def gen(steps: tuple, depth: int, answered: tuple) -> Expr:
        if not steps:
            have = dict(answered)
            entries = tuple(
                Prim("list", (Lit(i), at(have[i])))
                for i in spec.result.echo if i in have)
            done = Prim("list", (Lit(Atom("done")), Lit(spec.result.message),
                                 Prim("list", entries)))
            return If(Prim("null?", (drop(depth),)), done,
                      Prim("list", (Lit(Atom("invalid")), Lit(ATOM_EXTRA), at(depth))))
        s, rest = steps[0], steps[1:]
        if isinstance(s, Prompt):
            bad = Prim("list", (Lit(Atom("invalid")), Lit(s.id), at(depth)))
            e: Expr = bad
            for c in reversed(s.choices):
                e = If(Prim("eq?", (at(depth), Lit(c))),
                       gen(rest, depth + 1, answered + ((s.id, depth),)),
                       e)
            return If(Prim("null?", (drop(depth),)),
                      Lit((Atom("invalid"), s.id, ATOM_MISSING)),
                      e)
        pos = dict(answered)[s.on]
        e = gen(rest, depth, answered)
        for key, sub in reversed(s.arms):
            e = If(Prim("eq?", (at(pos), Lit(key))),
                   gen(sub + rest, depth, answered),
                   e)
        return e

    body = gen(spec.steps, 0, ())
    return Program((Def("stage", ("responses",), body),))
