"""L0: the tiny first-order object language everything else is written in.

A datum is an atom, an integer, a string, or a list of datums; programs are
datums of the shape ``(program (def name (params...) body)...)``.  Expressions
carry every literal behind ``quote`` so that L0 code (the DDSL interpreter and
mix itself live in L0) can dispatch on expression shape with nothing more than
``atom?``, ``null?``, ``eq?`` and ``hd``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

__all__ = [
    "Atom", "Datum", "nil", "datum_list", "is_list",
    "ParseError", "UnbalancedDelimiter", "BadToken", "TrailingInput",
    "LiftError", "DuplicateDef", "UnknownCallTarget", "ArityMismatch",
    "UnboundVariable", "BadPrimArity", "BadProgramShape",
    "EvalError", "IfConditionNotBoolean", "PrimTypeError", "WrongArgCount",
    "parse_datum", "print_datum", "parse_many",
    "Lit", "Var", "If", "Call", "Prim", "Fail", "Expr",
    "Def", "Program", "lift_program", "program_to_datum",
    "EvalReport", "eval_program", "eval_expr_static",
    "StaticEvalBudget", "StaticEvalAborted", "PRIM_ARITY",
    "ATOM_TRUE", "ATOM_FALSE", "INT_MAX",
]

INT_MAX = 2**63 - 1  # arithmetic past this bound is an error, never wraparound


# ---------------------------------------------------------------------------
# datums

_FORBIDDEN = set(' \t\r\n()";')


class Atom:
    """An interned symbol.  Interning makes equality an identity check."""

    __slots__ = ("name",)
    _table: dict[str, "Atom"] = {}

    def __new__(cls, name: str) -> "Atom":
        a = cls._table.get(name)
        if a is not None:
            return a
        if not name or any(c in _FORBIDDEN for c in name) or _looks_numeric(name):
            raise ValueError(f"invalid atom name: {name!r}")
        a = object.__new__(cls)
        a.name = name
        cls._table[name] = a
        return a

    def __repr__(self) -> str:
        return self.name


def _looks_numeric(s: str) -> bool:
    t = s[1:] if s[0] == "-" else s
    return t.isdigit() if t else False


Datum = Union[Atom, int, str, tuple]

nil: Datum = ()

ATOM_TRUE = Atom("true")
ATOM_FALSE = Atom("false")


def datum_list(*items: Datum) -> Datum:
    return tuple(items)


def is_list(d: Datum) -> bool:
    return type(d) is tuple


# ---------------------------------------------------------------------------
# errors


class L0Error(Exception):
    pass


class ParseError(L0Error):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{msg} at {line}:{col}")
        self.line = line
        self.col = col


class UnbalancedDelimiter(ParseError):
    pass


class BadToken(ParseError):
    pass


class TrailingInput(ParseError):
    pass


class LiftError(L0Error):
    def __init__(self, msg: str, def_name: str | None = None):
        super().__init__(msg if def_name is None else f"{msg} (in def {def_name})")
        self.def_name = def_name


class DuplicateDef(LiftError):
    pass


class UnknownCallTarget(LiftError):
    pass


class ArityMismatch(LiftError):
    pass


class UnboundVariable(LiftError):
    pass


class BadPrimArity(LiftError):
    pass


class BadProgramShape(LiftError):
    pass


class EvalError(L0Error):
    pass


class IfConditionNotBoolean(EvalError):
    pass


class PrimTypeError(EvalError):
    pass


class WrongArgCount(EvalError):
    pass


# ---------------------------------------------------------------------------
# reader / printer

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t"}
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def _advance(self, c: str) -> None:
        self.pos += 1
        if c == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1

    def skip_blank(self) -> None:
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c == ";":
                while self.pos < len(self.text) and self.text[self.pos] != "\n":
                    self._advance(self.text[self.pos])
            elif c in " \t\r\n":
                self._advance(c)
            else:
                return

    def at_end(self) -> bool:
        self.skip_blank()
        return self.pos >= len(self.text)

    def read(self) -> Datum:
        self.skip_blank()
        if self.pos >= len(self.text):
            raise UnbalancedDelimiter("unexpected end of input", self.line, self.col)
        c = self.text[self.pos]
        if c == "(":
            return self._read_list()
        if c == ")":
            raise UnbalancedDelimiter("unexpected ')'", self.line, self.col)
        if c == '"':
            return self._read_string()
        return self._read_token()

    def _read_list(self) -> Datum:
        open_line, open_col = self.line, self.col
        self._advance("(")
        items: list[Datum] = []
        while True:
            self.skip_blank()
            if self.pos >= len(self.text):
                raise UnbalancedDelimiter("unclosed '('", open_line, open_col)
            if self.text[self.pos] == ")":
                self._advance(")")
                return tuple(items)
            items.append(self.read())

    def _read_string(self) -> str:
        open_line, open_col = self.line, self.col
        self._advance('"')
        out: list[str] = []
        while True:
            if self.pos >= len(self.text):
                raise UnbalancedDelimiter("unclosed string", open_line, open_col)
            c = self.text[self.pos]
            self._advance(c)
            if c == '"':
                return "".join(out)
            if c == "\\":
                if self.pos >= len(self.text):
                    raise UnbalancedDelimiter("unclosed string", open_line, open_col)
                e = self.text[self.pos]
                self._advance(e)
                if e not in _UNESCAPES:
                    raise BadToken(f"bad escape '\\{e}'", self.line, self.col)
                out.append(_UNESCAPES[e])
            else:
                out.append(c)

    def _read_token(self) -> Datum:
        line, col = self.line, self.col
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in _FORBIDDEN and self.text[self.pos] != "(":
            self._advance(self.text[self.pos])
        tok = self.text[start:self.pos]
        if not tok:
            raise BadToken(f"bad character {self.text[start]!r}", line, col)
        if _looks_numeric(tok):
            n = int(tok)
            if abs(n) > INT_MAX:
                raise BadToken(f"integer out of range: {tok}", line, col)
            return n
        try:
            return Atom(tok)
        except ValueError:
            raise BadToken(f"bad token {tok!r}", line, col) from None


def parse_datum(text: str) -> Datum:
    """Parse exactly one datum; anything but trailing blanks/comments is an error."""
    r = _Reader(text)
    d = r.read()
    if not r.at_end():
        raise TrailingInput("trailing input after datum", r.line, r.col)
    return d


def parse_many(text: str) -> list[Datum]:
    r = _Reader(text)
    out = []
    while not r.at_end():
        out.append(r.read())
    return out


def print_datum(d: Datum) -> str:
    """Canonical form: single spaces, no trailing blanks; inverts parse_datum."""
    out: list[str] = []
    _print(d, out)
    return "".join(out)


def _print(d: Datum, out: list[str]) -> None:
    t = type(d)
    if t is tuple:
        out.append("(")
        for i, x in enumerate(d):
            if i:
                out.append(" ")
            _print(x, out)
        out.append(")")
    elif t is Atom:
        out.append(d.name)
    elif t is int:
        out.append(str(d))
    elif t is str:
        out.append('"')
        for c in d:
            out.append(_ESCAPES.get(c, c))
        out.append('"')
    else:
        raise TypeError(f"not a datum: {d!r}")


# ---------------------------------------------------------------------------
# programs

PRIM_ARITY = {
    "cons": 2, "hd": 1, "tl": 1, "eq?": 2, "atom?": 1, "null?": 1,
    "+": 2, "-": 2, "*": 2, "<": 2, "list": None,  # list is variadic
}

_RESERVED = {"program", "def", "quote", "if", "call", "fail"} | set(PRIM_ARITY)

# expression tags used by the evaluator
T_LIT, T_VAR, T_IF, T_CALL, T_PRIM, T_FAIL = range(6)


@dataclass(frozen=True)
class Lit:
    value: Datum
    tag: int = field(default=T_LIT, repr=False, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    tag: int = field(default=T_VAR, repr=False, compare=False)


@dataclass(frozen=True)
class If:
    cond: "Expr"
    then: "Expr"
    alt: "Expr"
    tag: int = field(default=T_IF, repr=False, compare=False)


@dataclass(frozen=True)
class Call:
    fname: str
    args: tuple
    tag: int = field(default=T_CALL, repr=False, compare=False)


@dataclass(frozen=True)
class Prim:
    op: str
    args: tuple
    tag: int = field(default=T_PRIM, repr=False, compare=False)


@dataclass(frozen=True)
class Fail:
    arg: "Expr"
    tag: int = field(default=T_FAIL, repr=False, compare=False)


Expr = Union[Lit, Var, If, Call, Prim, Fail]


@dataclass(frozen=True)
class Def:
    name: str
    params: tuple
    body: Expr


class Program:
    """A validated L0 program; entry point is the first def."""

    __slots__ = ("defs", "entry", "by_name")

    def __init__(self, defs: tuple):
        self.defs = defs
        self.entry = defs[0].name
        self.by_name = {d.name: d for d in defs}

    def __eq__(self, other) -> bool:
        return isinstance(other, Program) and self.defs == other.defs

    def __hash__(self) -> int:
        return hash(self.defs)

    def __repr__(self) -> str:
        return f"Program(entry={self.entry}, defs={len(self.defs)})"


def _lift_expr(d: Datum, where: str) -> Expr:
    t = type(d)
    if t is Atom:
        return Var(d.name)
    if t is int or t is str:
        raise BadProgramShape(
            f"bare literal {d!r}: literals must be written (quote ...)", where)
    if t is not tuple or not d:
        raise BadProgramShape(f"bad expression {print_datum(d)}", where)
    head = d[0]
    if type(head) is not Atom:
        raise BadProgramShape(f"bad form head in {print_datum(d)}", where)
    h = head.name
    if h == "quote":
        if len(d) != 2:
            raise BadProgramShape("quote takes one argument", where)
        return Lit(d[1])
    if h == "if":
        if len(d) != 4:
            raise BadProgramShape("if takes three arguments", where)
        return If(*(_lift_expr(x, where) for x in d[1:]))
    if h == "call":
        if len(d) < 2 or type(d[1]) is not Atom:
            raise BadProgramShape("call needs a target name", where)
        return Call(d[1].name, tuple(_lift_expr(x, where) for x in d[2:]))
    if h == "fail":
        if len(d) != 2:
            raise BadProgramShape("fail takes one argument", where)
        return Fail(_lift_expr(d[1], where))
    if h in PRIM_ARITY:
        arity = PRIM_ARITY[h]
        if arity is not None and len(d) - 1 != arity:
            raise BadPrimArity(f"{h} takes {arity} argument(s), got {len(d) - 1}", where)
        return Prim(h, tuple(_lift_expr(x, where) for x in d[1:]))
    raise BadProgramShape(f"unknown form ({h} ...)", where)


def lift_program(d: Datum) -> Program:
    """Validate a ``(program (def ...)...)`` datum into a Program."""
    if type(d) is not tuple or not d or d[0] is not Atom("program") or len(d) < 2:
        raise BadProgramShape("expected (program (def ...) ...)")
    defs: list[Def] = []
    names: set[str] = set()
    for dd in d[1:]:
        if (type(dd) is not tuple or len(dd) != 4 or dd[0] is not Atom("def")
                or type(dd[1]) is not Atom or type(dd[2]) is not tuple):
            raise BadProgramShape(f"bad def {print_datum(dd)}")
        name = dd[1].name
        if name in names:
            raise DuplicateDef(f"duplicate def {name}", name)
        names.add(name)
        params = []
        for p in dd[2]:
            if type(p) is not Atom or p.name in _RESERVED:
                raise BadProgramShape(f"bad parameter {print_datum(p)}", name)
            if p.name in params:
                raise BadProgramShape(f"repeated parameter {p.name}", name)
            params.append(p.name)
        defs.append(Def(name, tuple(params), _lift_expr(dd[3], name)))
    prog = Program(tuple(defs))
    for df in prog.defs:
        _check_body(df.body, df, prog)
    return prog


def _check_body(e: Expr, df: Def, prog: Program) -> None:
    tag = e.tag
    if tag == T_VAR:
        if e.name not in df.params:
            raise UnboundVariable(f"unbound variable {e.name}", df.name)
    elif tag == T_IF:
        _check_body(e.cond, df, prog)
        _check_body(e.then, df, prog)
        _check_body(e.alt, df, prog)
    elif tag == T_CALL:
        target = prog.by_name.get(e.fname)
        if target is None:
            raise UnknownCallTarget(f"call to unknown def {e.fname}", df.name)
        if len(target.params) != len(e.args):
            raise ArityMismatch(
                f"{e.fname} takes {len(target.params)} args, called with {len(e.args)}",
                df.name)
        for a in e.args:
            _check_body(a, df, prog)
    elif tag == T_PRIM:
        for a in e.args:
            _check_body(a, df, prog)
    elif tag == T_FAIL:
        _check_body(e.arg, df, prog)


def _expr_to_datum(e: Expr) -> Datum:
    tag = e.tag
    if tag == T_LIT:
        return (Atom("quote"), e.value)
    if tag == T_VAR:
        return Atom(e.name)
    if tag == T_IF:
        return (Atom("if"), _expr_to_datum(e.cond), _expr_to_datum(e.then),
                _expr_to_datum(e.alt))
    if tag == T_CALL:
        return (Atom("call"), Atom(e.fname)) + tuple(_expr_to_datum(a) for a in e.args)
    if tag == T_PRIM:
        return (Atom(e.op),) + tuple(_expr_to_datum(a) for a in e.args)
    return (Atom("fail"), _expr_to_datum(e.arg))


def program_to_datum(p: Program) -> Datum:
    return (Atom("program"),) + tuple(
        (Atom("def"), Atom(d.name), tuple(Atom(x) for x in d.params),
         _expr_to_datum(d.body))
        for d in p.defs)


# ---------------------------------------------------------------------------
# evaluator


@dataclass(frozen=True)
class EvalReport:
    """Outcome of one evaluation.  ``aborted`` means a ``fail`` fired and
    ``result`` is its payload; budget exhaustion leaves no result at all."""

    result: Datum | None
    steps: int
    aborted: bool = False
    budget_exceeded: bool = False

    @property
    def ok(self) -> bool:
        return not self.aborted and not self.budget_exceeded

    def outcome(self) -> tuple:
        """Comparable summary: ('ok'|'abort', datum) or ('budget',)."""
        if self.budget_exceeded:
            return ("budget",)
        return ("abort" if self.aborted else "ok", self.result)


class _Abort(Exception):
    def __init__(self, payload: Datum):
        self.payload = payload


class _OutOfBudget(Exception):
    pass


# continuation frame tags
_K_IF, _K_CALL, _K_PRIM, _K_FAIL = range(4)


class _Machine:
    """Explicit-stack CEK-style evaluator.

    Recursion in L0 (there are no loops) must not consume Python stack:
    the worklists inside mix run thousands of tail calls deep.
    Steps count one per expression node reduced.
    """

    __slots__ = ("prog", "steps", "budget")

    def __init__(self, prog: Program, budget: int, steps: int = 0):
        self.prog = prog
        self.steps = steps
        self.budget = budget

    def run(self, expr: Expr, env: dict) -> Datum:
        control: list = [(True, expr, env)]
        values: list = []
        by_name = self.prog.by_name
        budget = self.budget
        steps = self.steps
        try:
            while control:
                frame = control.pop()
                if frame[0]:  # evaluate an expression node
                    _, e, env = frame
                    steps += 1
                    if steps > budget:
                        raise _OutOfBudget
                    tag = e.tag
                    if tag == T_LIT:
                        values.append(e.value)
                    elif tag == T_VAR:
                        values.append(env[e.name])
                    elif tag == T_IF:
                        control.append((False, _K_IF, e, env))
                        control.append((True, e.cond, env))
                    elif tag == T_CALL:
                        args = e.args
                        control.append((False, _K_CALL, e, len(args)))
                        for a in reversed(args):
                            control.append((True, a, env))
                    elif tag == T_PRIM:
                        args = e.args
                        control.append((False, _K_PRIM, e, len(args)))
                        for a in reversed(args):
                            control.append((True, a, env))
                    else:  # T_FAIL
                        control.append((False, _K_FAIL, e, None))
                        control.append((True, e.arg, env))
                else:
                    _, k, e, extra = frame
                    if k == _K_IF:
                        c = values.pop()
                        if c is ATOM_TRUE:
                            control.append((True, e.then, extra))
                        elif c is ATOM_FALSE:
                            control.append((True, e.alt, extra))
                        else:
                            raise IfConditionNotBoolean(
                                f"if condition is {print_datum(c)}")
                    elif k == _K_CALL:
                        df = by_name.get(e.fname)
                        if df is None:
                            raise UnknownCallTarget(f"call to unknown def {e.fname}")
                        if extra != len(df.params):
                            raise WrongArgCount(
                                f"{e.fname} takes {len(df.params)} args, got {extra}")
                        if extra:
                            argv = values[-extra:]
                            del values[-extra:]
                            newenv = dict(zip(df.params, argv))
                        else:
                            newenv = {}
                        control.append((True, df.body, newenv))
                    elif k == _K_PRIM:
                        if extra:
                            argv = values[-extra:]
                            del values[-extra:]
                        else:
                            argv = []
                        values.append(_apply_prim(e.op, argv))
                    else:  # _K_FAIL
                        raise _Abort(values.pop())
            return values.pop()
        finally:
            self.steps = steps


def _apply_prim(op: str, argv: list) -> Datum:
    if op == "cons":
        x, l = argv
        if type(l) is not tuple:
            raise PrimTypeError(f"cons onto non-list {print_datum(l)}")
        return (x,) + l
    if op == "hd":
        (l,) = argv
        if type(l) is not tuple or not l:
            raise PrimTypeError(f"hd of {print_datum(l)}")
        return l[0]
    if op == "tl":
        (l,) = argv
        if type(l) is not tuple or not l:
            raise PrimTypeError(f"tl of {print_datum(l)}")
        return l[1:]
    if op == "eq?":
        a, b = argv
        return ATOM_TRUE if a == b else ATOM_FALSE
    if op == "atom?":
        return ATOM_TRUE if type(argv[0]) is Atom else ATOM_FALSE
    if op == "null?":
        return ATOM_TRUE if argv[0] == () else ATOM_FALSE
    if op == "list":
        return tuple(argv)
    # arithmetic / comparison
    a, b = argv
    if type(a) is not int or type(b) is not int:
        raise PrimTypeError(f"{op} of non-numbers {print_datum(a)}, {print_datum(b)}")
    if op == "+":
        r = a + b
    elif op == "-":
        r = a - b
    elif op == "*":
        r = a * b
    else:  # <
        return ATOM_TRUE if a < b else ATOM_FALSE
    if abs(r) > INT_MAX:
        raise PrimTypeError(f"integer overflow in {op}")
    return r


def eval_program(prog: Program, args: Iterable[Datum], budget: int = 10**7) -> EvalReport:
    """Call-by-value evaluation of ``prog``'s entry def on ``args``."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    entry = prog.by_name[prog.entry]
    args = tuple(args)
    if len(args) != len(entry.params):
        raise WrongArgCount(
            f"{prog.entry} takes {len(entry.params)} args, got {len(args)}")
    m = _Machine(prog, budget)
    try:
        result = m.run(entry.body, dict(zip(entry.params, args)))
        return EvalReport(result, m.steps)
    except _Abort as a:
        return EvalReport(a.payload, m.steps, aborted=True)
    except _OutOfBudget:
        return EvalReport(None, m.steps, budget_exceeded=True)


class StaticEvalBudget(EvalError):
    """Static evaluation ran past its step budget."""


class StaticEvalAborted(EvalError):
    """A ``fail`` fired during static evaluation (a static expression must be total)."""

    def __init__(self, payload: Datum):
        super().__init__(f"fail during static evaluation: {print_datum(payload)}")
        self.payload = payload


def eval_expr_static(prog: Program, expr: Expr, env: dict, budget: int,
                     steps_used: int = 0) -> tuple:
    """Evaluate one expression under ``env`` (the specializer's static-eval
    hook).  Returns (value, steps_used')."""
    m = _Machine(prog, budget, steps_used)
    try:
        value = m.run(expr, env)
    except _Abort as a:
        raise StaticEvalAborted(a.payload) from None
    except _OutOfBudget:
        raise StaticEvalBudget(f"static evaluation exceeded {budget} steps") from None
    return value, m.steps
