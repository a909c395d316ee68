"""HTTP session service: dialog registration, engine-backed staging sessions,
and projection-artifact inspection for the browser UI.

All payloads carry ``schema_version``; the shape is documented in README.md.
Sessions live in memory with an optional append-only JSONL journal replayed
on startup.  Stagers for every engine are compiled eagerly at registration so
respond latency is uniform across engines.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .ddsl import Branch, DialogSpec, Prompt, dialog_to_datum, enumerate_paths, parse_dialog, DialogError
from .dinterp import (Done, Invalid, NeedInput, interp_l0_program,
                      interp_step_l0_program, outcome_from_datum)
from .lcore import Atom, L0Error, ParseError, Program, eval_program, print_datum, program_to_datum
from .mixer import programs_alpha_equal
from . import projections as prj

SCHEMA_VERSION = "1"
ENGINES = ("interp", "stager", "compiled", "cogen")


@dataclass
class DialogRecord:
    dialog_id: str
    spec: DialogSpec
    datum: object
    step_stagers: dict          # engine -> Program (or None for interp)
    artifacts: dict             # names -> canonical text
    structural_identity: bool
    step_table: list


@dataclass
class Session:
    session_id: str
    dialog_id: str
    engine: str
    responses: tuple = ()
    transcript: list = field(default_factory=list)  # accepted (id, value) pairs
    outcome: object = None


def _outcome_json(o) -> dict:
    if isinstance(o, NeedInput):
        return {"kind": "need", "prompt_id": o.prompt_id.name, "text": o.text,
                "choices": [c.name for c in o.choices]}
    if isinstance(o, Done):
        return {"kind": "done", "message": o.message,
                "echo": [[i.name, print_datum(r)] for i, r in o.echo]}
    return {"kind": "invalid", "prompt_id": o.prompt_id.name,
            "response": print_datum(o.response)}


def _prompt_summary(spec: DialogSpec) -> list:
    out = []

    def walk(steps, depth):
        for s in steps:
            if isinstance(s, Prompt):
                out.append({"id": s.id.name, "text": s.text,
                            "choices": [c.name for c in s.choices],
                            "branch_depth": depth})
            else:
                for _, sub in s.arms:
                    walk(sub, depth + 1)

    walk(spec.steps, 0)
    return out


class StagingService:
    def __init__(self, journal: Path | None = None):
        self.lock = threading.RLock()
        self.dialogs: dict = {}
        self.sessions: dict = {}
        self.journal = journal
        self.shared = prj.shared_programs()
        if journal is not None and journal.exists():
            self._replay(journal)

    # -- journal --------------------------------------------------------

    def _log(self, event: dict) -> None:
        if self.journal is None:
            return
        with self.journal.open("a", encoding="utf-8") as f:
            f.write(json.dumps(event) + "\n")

    def _replay(self, journal: Path) -> None:
        for line in journal.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            ev = json.loads(line)
            kind = ev["event"]
            if kind == "register":
                self._register(ev["source"], dialog_id=ev["dialog_id"], log=False)
            elif kind == "create":
                self._create(ev["dialog_id"], ev["engine"],
                             session_id=ev["session_id"], log=False)
            elif kind == "respond":
                self._respond(ev["session_id"], ev["value"], log=False)

    # -- registration ----------------------------------------------------

    def _register(self, source: str, dialog_id: str | None = None,
                  log: bool = True) -> DialogRecord:
        spec = parse_dialog(source)
        gd = dialog_to_datum(spec)
        step = self.shared["interp_step"]
        interp = self.shared["interp"]

        stager_step = prj.project1(step, gd)
        compiled_step = prj.apply_compiler(self.shared["compiler_step"], step, gd)
        cogen_step = prj.apply_compiler(self.shared["cogen_compiler_step"], step, gd)

        stager_batch = prj.project1(interp, gd)
        compiled_batch = prj.apply_compiler(self.shared["compiler"], interp, gd)
        cogen_batch = prj.apply_compiler(self.shared["cogen_compiler"], interp, gd)
        identity = (programs_alpha_equal(stager_batch, compiled_batch)
                    and programs_alpha_equal(stager_batch, cogen_batch)
                    and programs_alpha_equal(stager_step, compiled_step))

        table = []
        for vec, _ in enumerate_paths(spec, cap=512):
            si = eval_program(stager_batch, [vec]).steps
            ii = eval_program(interp, [gd, vec]).steps
            table.append({"path": [a.name for a in vec],
                          "interp_steps": ii, "stager_steps": si})

        rec = DialogRecord(
            dialog_id=dialog_id or uuid.uuid4().hex[:12],
            spec=spec, datum=gd,
            step_stagers={"interp": None, "stager": stager_step,
                          "compiled": compiled_step, "cogen": cogen_step},
            artifacts={
                "dialog": print_datum(gd),
                "stager": print_datum(program_to_datum(stager_batch)),
                "stager_compiled": print_datum(program_to_datum(compiled_batch)),
                "compiler": print_datum(program_to_datum(self.shared["compiler"])),
                "cogen": print_datum(program_to_datum(self.shared["cogen"])),
            },
            structural_identity=identity,
            step_table=table)
        self.dialogs[rec.dialog_id] = rec
        if log:
            self._log({"event": "register", "dialog_id": rec.dialog_id,
                       "source": source})
        return rec

    # -- sessions ---------------------------------------------------------

    def _advance(self, rec: DialogRecord, engine: str, responses: tuple):
        stager = rec.step_stagers[engine]
        if stager is None:
            rep = eval_program(self.shared["interp_step"], [rec.datum, responses])
        else:
            rep = eval_program(stager, [responses])
        if not rep.ok:
            raise L0Error(f"engine {engine} failed: {rep.outcome()}")
        return outcome_from_datum(rep.result)

    def _create(self, dialog_id: str, engine: str,
                session_id: str | None = None, log: bool = True) -> Session:
        rec = self.dialogs[dialog_id]
        s = Session(session_id or uuid.uuid4().hex[:16], dialog_id, engine)
        s.outcome = self._advance(rec, engine, ())
        self.sessions[s.session_id] = s
        if log:
            self._log({"event": "create", "dialog_id": dialog_id,
                       "engine": engine, "session_id": s.session_id})
        return s

    def _respond(self, session_id: str, value: str, log: bool = True):
        s = self.sessions[session_id]
        cur = s.outcome
        if not isinstance(cur, NeedInput):
            return s, "terminal"
        try:
            atom = Atom(value)
        except ValueError:
            return s, "badvalue"
        if atom not in cur.choices:
            return s, "badvalue"
        s.responses += (atom,)
        s.transcript.append((cur.prompt_id.name, atom.name))
        s.outcome = self._advance(self.dialogs[s.dialog_id], s.engine, s.responses)
        if log:
            self._log({"event": "respond", "session_id": session_id, "value": value})
        return s, "ok"


def _body(payload: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, **payload}


def create_app(fixture_sources: list | None = None,
               journal: Path | None = None) -> FastAPI:
    app = FastAPI(title="futamix staging service")
    svc = StagingService(journal=journal)
    app.state.service = svc
    for src in fixture_sources or []:
        svc._register(src)

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse(status_code=status,
                            content=_body({"error": message}))

    @app.get("/healthz")
    def healthz():
        return _body({"status": "ok"})

    @app.get("/dialogs")
    def list_dialogs():
        with svc.lock:
            return _body({"dialogs": [
                {"dialog_id": r.dialog_id, "name": r.spec.name.name,
                 "prompts": _prompt_summary(r.spec), "engines": list(ENGINES)}
                for r in svc.dialogs.values()]})

    @app.post("/dialogs")
    async def register_dialog(payload: dict):
        source = payload.get("source", "")
        with svc.lock:
            try:
                rec = svc._register(source)
            except (ParseError, DialogError) as e:
                return error(400, f"invalid dialog: {e}")
            return _body({"dialog_id": rec.dialog_id,
                          "name": rec.spec.name.name,
                          "engines": list(ENGINES),
                          "prompts": _prompt_summary(rec.spec),
                          "structural_identity": rec.structural_identity})

    @app.post("/sessions")
    async def create_session(payload: dict):
        dialog_id = payload.get("dialog_id")
        engine = payload.get("engine", "interp")
        with svc.lock:
            if dialog_id not in svc.dialogs:
                return error(404, f"unknown dialog {dialog_id}")
            if engine not in ENGINES:
                return error(400, f"unknown engine {engine}")
            s = svc._create(dialog_id, engine)
            return _body({"session_id": s.session_id, "engine": engine,
                          "outcome": _outcome_json(s.outcome)})

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        with svc.lock:
            s = svc.sessions.get(session_id)
            if s is None:
                return error(404, f"unknown session {session_id}")
            return _body({"session_id": s.session_id, "dialog_id": s.dialog_id,
                          "engine": s.engine, "transcript": s.transcript,
                          "outcome": _outcome_json(s.outcome)})

    @app.post("/sessions/{session_id}/responses")
    async def respond(session_id: str, payload: dict):
        value = str(payload.get("value", ""))
        with svc.lock:
            if session_id not in svc.sessions:
                return error(404, f"unknown session {session_id}")
            s, status = svc._respond(session_id, value)
            if status == "terminal":
                return error(409, "session already terminal")
            if status == "badvalue":
                cur = s.outcome
                return JSONResponse(status_code=422, content=_body({
                    "error": f"{value!r} is not a choice",
                    "choices": [c.name for c in cur.choices]}))
            return _body({"session_id": s.session_id,
                          "transcript": s.transcript,
                          "outcome": _outcome_json(s.outcome)})

    @app.get("/dialogs/{dialog_id}/artifacts")
    def artifacts(dialog_id: str):
        with svc.lock:
            rec = svc.dialogs.get(dialog_id)
            if rec is None:
                return error(404, f"unknown dialog {dialog_id}")
            return _body({"dialog_id": rec.dialog_id,
                          "artifacts": rec.artifacts,
                          "structural_identity": rec.structural_identity,
                          "step_table": rec.step_table})

    return app
