"""The offline partial evaluator: binding-time analysis plus a polyvariant
worklist specializer, with an L0-resident twin asset for self-application.

Binding times form the two-point lattice S below D; a whole value is either
known (S) or unknown (D), never partially static.  Specialization evaluates
static expressions away, chooses branches of static conditionals, unfolds
fully-static calls by evaluation, and memoizes one residual def per
(def, static-environment) pair.  The L0 asset (assets/mix.l0) implements the
same algorithm independently; alpha-normalized outputs must coincide, which
the test corpus enforces.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

from .dinterp import load_asset
from .lcore import (Atom, Call, Datum, Def, Expr, Fail, If, L0Error, Lit,
                    Prim, Program, StaticEvalBudget, Var, eval_expr_static,
                    print_datum, program_to_datum,
                    T_LIT, T_VAR, T_IF, T_CALL, T_PRIM, T_FAIL)

__all__ = [
    "BindingSplit", "Division", "SpecializationPoint",
    "MixError", "BudgetExceeded", "NonCongruentDivision",
    "analyze", "congruence_violations", "specialize", "mix_host",
    "mix_l0_program", "alpha_normalize", "programs_alpha_equal",
    "DEFAULT_MAX_POINTS", "DEFAULT_MAX_STATIC_STEPS",
]

DEFAULT_MAX_POINTS = 5_000
DEFAULT_MAX_STATIC_STEPS = 10**7

S, D = "S", "D"


class MixError(L0Error):
    pass


class BudgetExceeded(MixError):
    pass


class NonCongruentDivision(MixError):
    pass


@dataclass(frozen=True)
class BindingSplit:
    """Partition of the subject entry's parameters into known values and
    unknown names.  dynamic_params keeps the subject's parameter order."""

    static_args: dict
    dynamic_params: tuple

    def validate(self, subject: Program) -> None:
        entry = subject.by_name[subject.entry]
        sk = set(self.static_args)
        dk = set(self.dynamic_params)
        if sk & dk:
            raise MixError(f"split overlaps on {sorted(sk & dk)}")
        if sk | dk != set(entry.params) or len(dk) != len(self.dynamic_params):
            raise MixError(
                f"split must cover {entry.params} exactly, got static={sorted(sk)} "
                f"dynamic={list(self.dynamic_params)}")
        in_order = tuple(p for p in entry.params if p in dk)
        if in_order != self.dynamic_params:
            raise MixError(
                f"dynamic params must keep subject order {in_order}")


@dataclass(frozen=True)
class Division:
    """Monovariant classification: which (def, param) pairs and def results
    are dynamic; everything unlisted is static."""

    dyn_params: frozenset
    dyn_results: frozenset

    def param_bt(self, fname: str, param: str) -> str:
        return D if (fname, param) in self.dyn_params else S

    def result_bt(self, fname: str) -> str:
        return D if fname in self.dyn_results else S


@dataclass(frozen=True)
class SpecializationPoint:
    def_name: str
    static_env: tuple        # ((param, value) ...) restricted to S params, in order
    residual_name: str       # <def_name>_<k>, k = 0-based discovery order


# ---------------------------------------------------------------------------
# binding-time analysis


def _bt_expr(e: Expr, df: Def, prog: Program, dynp: set, dynr: set,
             changed: list) -> str:
    tag = e.tag
    if tag == T_LIT:
        return S
    if tag == T_VAR:
        return D if (df.name, e.name) in dynp else S
    if tag == T_IF:
        a = _bt_expr(e.cond, df, prog, dynp, dynr, changed)
        b = _bt_expr(e.then, df, prog, dynp, dynr, changed)
        c = _bt_expr(e.alt, df, prog, dynp, dynr, changed)
        return D if D in (a, b, c) else S
    if tag == T_PRIM:
        bts = [_bt_expr(a, df, prog, dynp, dynr, changed) for a in e.args]
        return D if D in bts else S
    if tag == T_FAIL:
        _bt_expr(e.arg, df, prog, dynp, dynr, changed)
        return D
    # call: dynamic arguments demote callee parameters
    callee = prog.by_name[e.fname]
    out = D if e.fname in dynr else S
    for p, a in zip(callee.params, e.args):
        bt = _bt_expr(a, df, prog, dynp, dynr, changed)
        if bt == D:
            out = D
            if (e.fname, p) not in dynp:
                dynp.add((e.fname, p))
                changed.append(True)
    return out


def analyze(subject: Program, split: BindingSplit) -> Division:
    """Least fixpoint over S below D, seeded from the split."""
    split.validate(subject)
    dynp: set = {(subject.entry, p) for p in split.dynamic_params}
    dynr: set = set()
    while True:
        changed: list = []
        for df in subject.defs:
            bt = _bt_expr(df.body, df, subject, dynp, dynr, changed)
            if bt == D and df.name not in dynr:
                dynr.add(df.name)
                changed.append(True)
        if not changed:
            return Division(frozenset(dynp), frozenset(dynr))


def congruence_violations(subject: Program, split: BindingSplit,
                          division: Division) -> list:
    """Independent re-run of the dataflow asserting ``division`` is a fixpoint.

    Returns human-readable violations; empty means congruent.
    """
    out: list = []
    for p in split.dynamic_params:
        if division.param_bt(subject.entry, p) != D:
            out.append(f"entry param {p} is dynamic in the split but classified S")

    def bt(e: Expr, df: Def) -> str:
        tag = e.tag
        if tag == T_LIT:
            return S
        if tag == T_VAR:
            return division.param_bt(df.name, e.name)
        if tag == T_IF:
            parts = [bt(e.cond, df), bt(e.then, df), bt(e.alt, df)]
            return D if D in parts else S
        if tag == T_PRIM:
            parts = [bt(a, df) for a in e.args]
            return D if D in parts else S
        if tag == T_FAIL:
            bt(e.arg, df)
            return D
        callee = subject.by_name[e.fname]
        r = division.result_bt(e.fname)
        for p, a in zip(callee.params, e.args):
            abt = bt(a, df)
            if abt == D:
                r = D
                if division.param_bt(e.fname, p) == S:
                    out.append(
                        f"{df.name}: dynamic argument flows into static "
                        f"param {e.fname}.{p}")
        return r

    for df in subject.defs:
        body_bt = bt(df.body, df)
        if body_bt == D and division.result_bt(df.name) == S:
            out.append(f"result of {df.name} classified S but body is D")
    return out


# ---------------------------------------------------------------------------
# the specializer


class _FpCache:
    """Structural fingerprints, memoized by object identity.  Point keys embed
    whole subject programs; hashing them once keeps memo lookups O(1)."""

    __slots__ = ("table", "keep")

    def __init__(self):
        self.table = {}
        self.keep = []  # strong refs so ids stay valid

    def fp(self, d: Datum) -> int:
        if type(d) is tuple:
            h = self.table.get(id(d))
            if h is None:
                h = hash((1,) + tuple(self.fp(x) for x in d))
                self.table[id(d)] = h
                self.keep.append(d)
            return h
        if type(d) is Atom:
            return hash((2, d.name))
        return hash(d)


class _PointKey:
    __slots__ = ("fname", "senv", "_h")

    def __init__(self, fname: str, senv: tuple, h: int):
        self.fname = fname
        self.senv = senv
        self._h = h

    def __hash__(self) -> int:
        return self._h

    def __eq__(self, other) -> bool:
        return (self._h == other._h and self.fname == other.fname
                and self.senv == other.senv)


class _Specializer:
    def __init__(self, subject: Program, split: BindingSplit, division: Division,
                 max_points: int, max_static_steps: int):
        self.subject = subject
        self.split = split
        self.div = division
        self.max_points = max_points
        self.max_static_steps = max_static_steps
        self.static_steps = 0
        self.fpc = _FpCache()
        self.memo: dict = {}
        self.order: list = []          # SpecializationPoint, discovery order
        self.queue: deque = deque()
        self.bodies: dict = {}         # residual name -> Expr

    def run(self) -> Program:
        entry = self.subject.by_name[self.subject.entry]
        senv = tuple((p, self.split.static_args[p]) for p in entry.params
                     if p in self.split.static_args)
        self.new_point(self.subject.entry, senv)
        while self.queue:
            sp = self.queue.popleft()
            df = self.subject.by_name[sp.def_name]
            self.bodies[sp.residual_name] = self.sp_expr(df.body, df, dict(sp.static_env))
        defs = tuple(
            Def(pt.residual_name,
                tuple(p for p in self.subject.by_name[pt.def_name].params
                      if self.div.param_bt(pt.def_name, p) == D),
                self.bodies[pt.residual_name])
            for pt in self.order)
        return _prune(Program(defs))

    def new_point(self, fname: str, senv: tuple) -> str:
        h = hash((fname,) + tuple((p, self.fpc.fp(v)) for p, v in senv))
        key = _PointKey(fname, senv, h)
        name = self.memo.get(key)
        if name is not None:
            return name
        if len(self.order) >= self.max_points:
            raise BudgetExceeded(
                f"more than {self.max_points} specialization points")
        name = f"{fname}_{len(self.order)}"
        pt = SpecializationPoint(fname, senv, name)
        self.memo[key] = name
        self.order.append(pt)
        self.queue.append(pt)
        return name

    def static_eval(self, e: Expr, env: dict) -> Datum:
        try:
            v, self.static_steps = eval_expr_static(
                self.subject, e, env, self.max_static_steps, self.static_steps)
        except StaticEvalBudget:
            raise BudgetExceeded(
                f"static evaluation exceeded {self.max_static_steps} steps") from None
        return v

    def bt(self, e: Expr, df: Def) -> str:
        tag = e.tag
        if tag == T_LIT:
            return S
        if tag == T_VAR:
            return self.div.param_bt(df.name, e.name)
        if tag == T_IF:
            parts = [self.bt(e.cond, df), self.bt(e.then, df), self.bt(e.alt, df)]
            return D if D in parts else S
        if tag == T_PRIM:
            return D if any(self.bt(a, df) == D for a in e.args) else S
        if tag == T_FAIL:
            return D
        if self.div.result_bt(e.fname) == D:
            return D
        return D if any(self.bt(a, df) == D for a in e.args) else S

    def sp_expr(self, e: Expr, df: Def, env: dict) -> Expr:
        if self.bt(e, df) == S:
            return Lit(self.static_eval(e, env))
        tag = e.tag
        if tag == T_VAR:
            return Var(e.name)
        if tag == T_IF:
            if self.bt(e.cond, df) == S:
                c = self.static_eval(e.cond, env)
                if c is Atom("true"):
                    return self.sp_expr(e.then, df, env)
                if c is Atom("false"):
                    return self.sp_expr(e.alt, df, env)
                raise MixError(f"static if condition is {print_datum(c)}")
            return If(self.sp_expr(e.cond, df, env),
                      self.sp_expr(e.then, df, env),
                      self.sp_expr(e.alt, df, env))
        if tag == T_PRIM:
            return Prim(e.op, tuple(self.sp_expr(a, df, env) for a in e.args))
        if tag == T_FAIL:
            return Fail(self.sp_expr(e.arg, df, env))
        if tag == T_CALL:
            callee = self.subject.by_name[e.fname]
            senv: list = []
            dargs: list = []
            for p, a in zip(callee.params, e.args):
                if self.div.param_bt(e.fname, p) == S:
                    if self.bt(a, df) == D:
                        raise NonCongruentDivision(
                            f"dynamic argument into static param {e.fname}.{p}")
                    senv.append((p, self.static_eval(a, env)))
                else:
                    dargs.append(self.sp_expr(a, df, env))
            name = self.new_point(e.fname, tuple(senv))
            return Call(name, tuple(dargs))
        raise MixError(f"unexpected expression {e!r}")  # pragma: no cover


def _call_targets(e: Expr, out: list) -> None:
    tag = e.tag
    if tag == T_CALL:
        out.append(e.fname)
        for a in e.args:
            _call_targets(a, out)
    elif tag == T_IF:
        _call_targets(e.cond, out)
        _call_targets(e.then, out)
        _call_targets(e.alt, out)
    elif tag == T_PRIM:
        for a in e.args:
            _call_targets(a, out)
    elif tag == T_FAIL:
        _call_targets(e.arg, out)


def _reachable_in_order(p: Program) -> list:
    """Def names in first-call-site (breadth-first) order from the entry."""
    order = [p.entry]
    seen = {p.entry}
    i = 0
    while i < len(order):
        targets: list = []
        _call_targets(p.by_name[order[i]].body, targets)
        for t in targets:
            if t not in seen:
                seen.add(t)
                order.append(t)
        i += 1
    return order


def _prune(p: Program) -> Program:
    keep = set(_reachable_in_order(p))
    if len(keep) == len(p.defs):
        return p
    return Program(tuple(d for d in p.defs if d.name in keep))


def specialize(subject: Program, split: BindingSplit, division: Division,
               max_points: int = DEFAULT_MAX_POINTS,
               max_static_steps: int = DEFAULT_MAX_STATIC_STEPS) -> Program:
    """Polyvariant specialization of ``subject`` under a congruent division.

    The residual entry takes exactly the split's dynamic parameters; defs are
    emitted in discovery order with deterministic names.
    """
    split.validate(subject)
    bad = congruence_violations(subject, split, division)
    if bad:
        raise NonCongruentDivision("; ".join(bad))
    return _Specializer(subject, split, division, max_points, max_static_steps).run()


def mix_host(subject: Program, split: BindingSplit,
             max_points: int = DEFAULT_MAX_POINTS,
             max_static_steps: int = DEFAULT_MAX_STATIC_STEPS) -> Program:
    """analyze then specialize: the one-call facade."""
    return specialize(subject, split, analyze(subject, split),
                      max_points, max_static_steps)


@lru_cache(maxsize=None)
def mix_l0_program() -> Program:
    """The bundled L0 implementation of mix, entry
    ``(mix subject static-assoc dynamic-names)``."""
    return load_asset("mix.l0")


# ---------------------------------------------------------------------------
# alpha normalization


def _rename_calls(e: Expr, ren: dict) -> Expr:
    tag = e.tag
    if tag == T_CALL:
        return Call(ren[e.fname], tuple(_rename_calls(a, ren) for a in e.args))
    if tag == T_IF:
        return If(_rename_calls(e.cond, ren), _rename_calls(e.then, ren),
                  _rename_calls(e.alt, ren))
    if tag == T_PRIM:
        return Prim(e.op, tuple(_rename_calls(a, ren) for a in e.args))
    if tag == T_FAIL:
        return Fail(_rename_calls(e.arg, ren))
    return e


def alpha_normalize(p: Program) -> Program:
    """Rename defs to d0..dn in first-call-site reachability order from the
    entry, dropping unreachable defs.  Idempotent; the normal form under which
    residual programs are compared structurally."""
    order = _reachable_in_order(p)
    ren = {f: f"d{i}" for i, f in enumerate(order)}
    return Program(tuple(
        Def(ren[f], p.by_name[f].params, _rename_calls(p.by_name[f].body, ren))
        for f in order))


def programs_alpha_equal(a: Program, b: Program) -> bool:
    return program_to_datum(alpha_normalize(a)) == program_to_datum(alpha_normalize(b))
