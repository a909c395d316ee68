"""The dialog DSL: parsing, validation, datum encoding, and path enumeration.

A dialog is a sequence of enumerated-choice prompts, optionally branched on
earlier answers, ending in a result template.  Dialog syntax reuses L0 datum
syntax so a dialog literally *is* L0 data and can be fed to mix unchanged:

    (dialog coffee
      (steps
        (prompt size "What size?" (small medium large))
        ...)
      (result "coffee as ordered" (size blend cream)))
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Union

from .lcore import Atom, Datum, parse_datum, print_datum

__all__ = [
    "Prompt", "Branch", "Step", "ResultTemplate", "DialogSpec",
    "DialogError", "DuplicatePromptId", "UnknownBranchTarget",
    "BranchBeforePrompt", "ArmNotAChoice", "EmptyChoices", "UnknownEchoTarget",
    "PathExplosion",
    "parse_dialog", "dialog_to_datum", "datum_to_dialog", "enumerate_paths",
    "fixture_text", "load_fixture", "FIXTURES",
]

FIXTURES = ("coffee", "empty", "branchy")


class DialogError(Exception):
    def __init__(self, msg: str, offender: str | None = None):
        super().__init__(msg)
        self.offender = offender


class DuplicatePromptId(DialogError):
    pass


class UnknownBranchTarget(DialogError):
    pass


class BranchBeforePrompt(DialogError):
    pass


class ArmNotAChoice(DialogError):
    pass


class EmptyChoices(DialogError):
    pass


class UnknownEchoTarget(DialogError):
    pass


class PathExplosion(DialogError):
    pass


@dataclass(frozen=True)
class Prompt:
    id: Atom
    text: str
    choices: tuple  # nonempty, distinct atoms


@dataclass(frozen=True)
class Branch:
    on: Atom                 # id of an earlier prompt
    arms: tuple              # ((choice-atom, steps-tuple), ...)


Step = Union[Prompt, Branch]


@dataclass(frozen=True)
class ResultTemplate:
    message: str
    echo: tuple  # prompt ids to include in the success datum


@dataclass(frozen=True)
class DialogSpec:
    name: Atom
    steps: tuple
    result: ResultTemplate


# ---------------------------------------------------------------------------
# parsing / encoding


def parse_dialog(text: str) -> DialogSpec:
    return datum_to_dialog(parse_datum(text))


def datum_to_dialog(d: Datum) -> DialogSpec:
    if (type(d) is not tuple or len(d) != 4 or d[0] is not Atom("dialog")
            or type(d[1]) is not Atom):
        raise DialogError(f"expected (dialog name (steps ...) (result ...)), got {print_datum(d)}")
    name = d[1]
    sd, rd = d[2], d[3]
    if type(sd) is not tuple or not sd or sd[0] is not Atom("steps"):
        raise DialogError("missing (steps ...) clause")
    if (type(rd) is not tuple or len(rd) not in (2, 3) or rd[0] is not Atom("result")
            or type(rd[1]) is not str):
        raise DialogError("missing (result \"message\" (echo...)) clause")
    echo = rd[2] if len(rd) == 3 else ()
    if type(echo) is not tuple or any(type(e) is not Atom for e in echo):
        raise DialogError("result echo must be a list of prompt ids")
    steps = tuple(_step_from_datum(s) for s in sd[1:])
    spec = DialogSpec(name, steps, ResultTemplate(rd[1], echo))
    _validate(spec)
    return spec


def _step_from_datum(d: Datum) -> Step:
    if type(d) is not tuple or not d or type(d[0]) is not Atom:
        raise DialogError(f"bad step {print_datum(d)}")
    if d[0] is Atom("prompt"):
        if (len(d) != 4 or type(d[1]) is not Atom or type(d[2]) is not str
                or type(d[3]) is not tuple):
            raise DialogError(f"bad prompt {print_datum(d)}")
        if not d[3]:
            raise EmptyChoices(f"prompt {d[1]} has no choices", d[1].name)
        if any(type(c) is not Atom for c in d[3]) or len(set(d[3])) != len(d[3]):
            raise DialogError(f"choices of {d[1]} must be distinct atoms", d[1].name)
        return Prompt(d[1], d[2], d[3])
    if d[0] is Atom("branch"):
        if len(d) < 2 or type(d[1]) is not Atom:
            raise DialogError(f"bad branch {print_datum(d)}")
        arms = []
        for a in d[2:]:
            if (type(a) is not tuple or len(a) < 2 or a[0] is not Atom("arm")
                    or type(a[1]) is not Atom):
                raise DialogError(f"bad arm {print_datum(a)}")
            arms.append((a[1], tuple(_step_from_datum(s) for s in a[2:])))
        keys = [k for k, _ in arms]
        if len(set(keys)) != len(keys):
            raise DialogError(f"branch on {d[1]} has repeated arm keys", d[1].name)
        return Branch(d[1], tuple(arms))
    raise DialogError(f"bad step {print_datum(d)}")


def dialog_to_datum(spec: DialogSpec) -> Datum:
    """Canonical datum encoding; this is what the L0 interpreter consumes."""
    return (Atom("dialog"), spec.name,
            (Atom("steps"),) + tuple(_step_to_datum(s) for s in spec.steps),
            (Atom("result"), spec.result.message, spec.result.echo))


def _step_to_datum(s: Step) -> Datum:
    if isinstance(s, Prompt):
        return (Atom("prompt"), s.id, s.text, s.choices)
    return (Atom("branch"), s.on) + tuple(
        (Atom("arm"), key) + tuple(_step_to_datum(x) for x in sub)
        for key, sub in s.arms)


# ---------------------------------------------------------------------------
# validation

def _validate(spec: DialogSpec) -> None:
    seen: set[Atom] = set()
    prompts: dict[Atom, Prompt] = {}

    def collect(steps) -> None:
        for s in steps:
            if isinstance(s, Prompt):
                if s.id in seen:
                    raise DuplicatePromptId(f"duplicate prompt id {s.id}", s.id.name)
                seen.add(s.id)
                prompts[s.id] = s
            else:
                for _, sub in s.arms:
                    collect(sub)

    collect(spec.steps)

    # a branch may only discriminate on a prompt answered on *every* path
    # reaching it; after a branch, only prompts common to all arms of a
    # fully-covered choice set are guaranteed.
    def walk(steps, answered: frozenset) -> frozenset:
        for s in steps:
            if isinstance(s, Prompt):
                answered |= {s.id}
            else:
                if s.on not in prompts:
                    raise UnknownBranchTarget(f"branch on unknown prompt {s.on}", s.on.name)
                if s.on not in answered:
                    raise BranchBeforePrompt(
                        f"branch on {s.on} before it is answered", s.on.name)
                target = prompts[s.on]
                for key, _ in s.arms:
                    if key not in target.choices:
                        raise ArmNotAChoice(
                            f"arm {key} is not a choice of {s.on}", key.name)
                arm_guarantees = [walk(sub, answered) for _, sub in s.arms]
                if arm_guarantees and {k for k, _ in s.arms} == set(target.choices):
                    inter = arm_guarantees[0]
                    for g in arm_guarantees[1:]:
                        inter &= g
                    answered = inter
        return answered

    walk(spec.steps, frozenset())
    for e in spec.result.echo:
        if e not in prompts:
            raise UnknownEchoTarget(f"echoed id {e} is not a prompt", e.name)


# ---------------------------------------------------------------------------
# path enumeration (the brute-force oracle)


def enumerate_paths(spec: DialogSpec, cap: int = 10_000) -> list:
    """All complete response vectors with the prompt-id sequence each induces.

    This is the exhaustive oracle the equivalence matrix runs over; the count
    is the product of branch-adjusted choice counts.
    """
    out: list = []

    def walk(steps, answers: dict, vec: tuple, seq: tuple) -> None:
        if not steps:
            if len(out) >= cap:
                raise PathExplosion(f"more than {cap} paths")
            out.append((vec, seq))
            return
        s, rest = steps[0], steps[1:]
        if isinstance(s, Prompt):
            for c in s.choices:
                walk(rest, {**answers, s.id: c}, vec + (c,), seq + (s.id,))
        else:
            chosen = answers[s.on]
            extra: tuple = ()
            for key, sub in s.arms:
                if key == chosen:
                    extra = sub
                    break
            walk(extra + rest, answers, vec, seq)

    walk(spec.steps, {}, (), ())
    return out


# ---------------------------------------------------------------------------
# shipped fixtures


def fixture_text(name: str) -> str:
    return (resources.files("futamix") / "fixtures" / f"{name}.dlg").read_text("utf-8")


def load_fixture(name: str) -> DialogSpec:
    return parse_dialog(fixture_text(name))
