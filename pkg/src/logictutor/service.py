"""HTTP service exposing sessions, problems, and reports.

JSON over HTTP with snake_case fields; formulas travel as strings in the
package's concrete syntax. Handlers are stateless against a shared session
store; every mutating call carries the client's last-seen revision and is
rejected with 409 when stale, so concurrent duplicate submissions cannot
both apply. Paths and payloads are documented in docs/api.md.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from . import replay
from .analysis import comparisons_csv, comparisons_for_log, score_table, score_table_csv
from .events import Action, EventLog, EventRecord
from .formula import ParseError, format_formula
from .markov import EmptyFilter, build_transitions, export_transition_dot
from .problem import BugKind, ProblemDefinition, ProblemMode, load_problem_dir
from .replay import replay_log
from .rules import RULES, UnknownRuleError, VerificationResult
from .session import FixOutcome, HintText, SessionError, SessionState, start_problem
from .study import (
    Section,
    StudentRecord,
    TRAINING_LEVELS,
    condition_by_tag,
    load_manifest,
    section_for_level,
    select_training_mode,
    student_rng,
    test_mode_policy,
)

__all__ = ["create_app", "ApiError"]


class ApiError(Exception):
    """Error with a stable machine-readable code and a student-facing message."""

    def __init__(self, status: int, code: str, message: str, detail: Any = None):
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail
        super().__init__(message)


@dataclass(slots=True)
class _Runtime:
    session_id: str
    student_id: str
    problem_id: str
    state: SessionState
    revision: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)

    def snapshot(self) -> dict:
        return {
            "session_id": self.session_id,
            "student_id": self.student_id,
            "problem_id": self.problem_id,
            "mode": self.state.mode.value,
            "revision": self.revision,
            "state": self.state.to_dict(),
        }


class CreateSessionBody(BaseModel):
    student_id: str
    problem_id: str


class StepBody(BaseModel):
    revision: int
    rule: str
    parents: list[str]
    statement: str


class DeleteBody(BaseModel):
    revision: int
    node: str
    cascade: bool = False


class HintBody(BaseModel):
    revision: int


class NavigateBody(BaseModel):
    revision: int
    direction: str


class FixBody(BaseModel):
    revision: int
    node: str
    element: str
    text: str


class JustifyBody(BaseModel):
    revision: int
    node: str
    rule: str
    parents: list[str]


class NodeHintBody(BaseModel):
    node: str


class ReadRuleBody(BaseModel):
    rule: str


def _now_ms() -> int:
    return time.time_ns() // 1_000_000


def create_app(
    problems_dir: str | Path,
    manifest_path: str | Path,
    log_path: str | Path,
    seed: int = 0,
    clock: Callable[[], int] = _now_ms,
) -> FastAPI:
    """Build the service around a problem set, a cohort manifest, and a log file."""
    problems = load_problem_dir(problems_dir)
    _, records = load_manifest(manifest_path)
    students: dict[str, StudentRecord] = {r.student_id: r for r in records}
    log = EventLog(log_path)
    sessions: dict[str, _Runtime] = {}
    counter = {"n": 0}
    registry_lock = threading.Lock()

    app = FastAPI(title="logictutor", version="0.1.0")

    @app.exception_handler(ApiError)
    async def _api_error(_: Request, exc: ApiError):
        body = {"error": {"code": exc.code, "message": exc.message, "detail": exc.detail}}
        return JSONResponse(status_code=exc.status, content=body)

    def _session(session_id: str) -> _Runtime:
        runtime = sessions.get(session_id)
        if runtime is None:
            raise ApiError(404, "UnknownSession", f"no session {session_id!r}")
        return runtime

    def _mutate(
        runtime: _Runtime,
        revision: int,
        op: Callable[[int], Any],
        action_for: Callable[[Any], Action],
        payload_for: Callable[[Any], dict],
    ) -> dict:
        """Apply one operation under the revision protocol; log one record.

        Failed operations (exceptions) advance nothing and log nothing. The
        event action may depend on the result (correct vs incorrect attempt).
        A finishing operation additionally logs the session's End record.
        """
        with runtime.lock:
            if revision != runtime.revision:
                raise ApiError(
                    409,
                    "StaleRevision",
                    "the session changed since this client last looked",
                    {"current_revision": runtime.revision},
                )
            at = clock()
            was_finished = runtime.state.finished
            try:
                result = op(at)
            except SessionError as exc:
                raise ApiError(400, exc.code, str(exc)) from exc
            except ParseError as exc:
                raise ApiError(400, "ParseError", str(exc), {"position": exc.position}) from exc
            except UnknownRuleError as exc:
                raise ApiError(400, "UnknownRule", str(exc)) from exc
            runtime.revision += 1
            log.append(
                EventRecord(
                    at, runtime.student_id, runtime.session_id, runtime.problem_id, action_for(result), payload_for(result)
                )
            )
            if runtime.state.finished and not was_finished:
                log.append(
                    EventRecord(
                        at,
                        runtime.student_id,
                        runtime.session_id,
                        runtime.problem_id,
                        Action.END,
                        replay.end_payload(runtime.state),
                    )
                )
            return {"session": runtime.snapshot(), "result": _result_dict(result)}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        student = students.get(body.student_id)
        if student is None:
            raise ApiError(404, "UnknownStudent", f"no student {body.student_id!r}")
        problem = problems.get(body.problem_id)
        if problem is None:
            raise ApiError(404, "UnknownProblem", f"no problem {body.problem_id!r}")
        section = section_for_level(problem.level)
        policy = test_mode_policy(section)
        if section is Section.TRAINING:
            if student.condition is None:
                raise ApiError(409, "NoCondition", f"student {student.student_id} has no assigned condition")
            draw = student_rng(seed, f"{student.student_id}:{problem.id}")
            mode = select_training_mode(condition_by_tag(student.condition), draw)
        else:
            mode = ProblemMode.PS
        at = clock()
        try:
            state = start_problem(problem, mode, at=at, hints_allowed=policy.hints_enabled)
        except SessionError as exc:
            raise ApiError(409, exc.code, str(exc)) from exc
        with registry_lock:
            counter["n"] += 1
            session_id = f"sess-{counter['n']:05d}"
        runtime = _Runtime(session_id, student.student_id, problem.id, state)
        sessions[session_id] = runtime
        log.append(
            EventRecord(
                at, student.student_id, session_id, problem.id, Action.START, replay.start_payload(mode, policy.hints_enabled)
            )
        )
        return runtime.snapshot()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return _session(session_id).snapshot()

    @app.post("/sessions/{session_id}/step")
    def submit_step(session_id: str, body: StepBody):
        runtime = _session(session_id)
        return _mutate(
            runtime,
            body.revision,
            lambda at: runtime.state.submit_step(body.rule, body.parents, body.statement, at),
            lambda result: Action.CORRECT_STEP if result.ok else Action.INCORRECT_STEP,
            lambda result: replay.step_payload(
                body.rule, body.parents, body.statement, error=None if result.ok else result.error.kind.value
            ),
        )

    @app.post("/sessions/{session_id}/delete")
    def delete_node(session_id: str, body: DeleteBody):
        runtime = _session(session_id)
        return _mutate(
            runtime,
            body.revision,
            lambda at: runtime.state.delete_node(body.node, body.cascade, at),
            lambda result: Action.DELETE,
            lambda result: replay.delete_payload(body.node, body.cascade),
        )

    @app.post("/sessions/{session_id}/hint")
    def request_hint(session_id: str, body: HintBody):
        runtime = _session(session_id)
        return _mutate(
            runtime,
            body.revision,
            lambda at: runtime.state.request_hint(at),
            lambda result: Action.HINT_REQUEST,
            lambda result: replay.hint_payload(),
        )

    @app.post("/sessions/{session_id}/navigate")
    def navigate(session_id: str, body: NavigateBody):
        runtime = _session(session_id)
        if body.direction not in ("next", "prev"):
            raise ApiError(400, "BadDirection", "direction must be 'next' or 'prev'")
        state = runtime.state
        if body.direction == "prev":
            return _mutate(
                runtime,
                body.revision,
                lambda at: state.prev_step(at),
                lambda result: Action.PREV_STEP,
                lambda result: {},
            )
        revealing = state.we_cursor < state.we_steps() and not state.finished
        step_id = state.problem.expert_solution[state.we_cursor].node_id if revealing else None
        return _mutate(
            runtime,
            body.revision,
            lambda at: state.next_step(at),
            lambda result: Action.CORRECT_STEP if revealing else Action.NEXT_STEP,
            lambda result: replay.we_step_payload(step_id) if revealing else {},
        )

    @app.post("/sessions/{session_id}/fix")
    def submit_fix(session_id: str, body: FixBody):
        runtime = _session(session_id)
        try:
            kind = BugKind(body.element)
        except ValueError:
            raise ApiError(400, "BadElement", "element must be 'expression' or 'rule'") from None
        return _mutate(
            runtime,
            body.revision,
            lambda at: runtime.state.submit_fix(body.node, kind, body.text, at),
            lambda outcome: Action.INCORRECT_STEP if outcome is FixOutcome.INCORRECT else Action.CORRECT_STEP,
            lambda outcome: replay.fix_payload(body.node, kind, body.text, outcome=outcome.value),
        )

    @app.post("/sessions/{session_id}/justify")
    def justify(session_id: str, body: JustifyBody):
        runtime = _session(session_id)
        return _mutate(
            runtime,
            body.revision,
            lambda at: runtime.state.justify(body.node, body.rule, body.parents, at),
            lambda result: Action.CORRECT_STEP if result.ok else Action.INCORRECT_STEP,
            lambda result: replay.justify_payload(
                body.node, body.rule, body.parents, error=None if result.ok else result.error.kind.value
            ),
        )

    @app.post("/sessions/{session_id}/node-hint")
    def node_hint(session_id: str, body: NodeHintBody):
        runtime = _session(session_id)
        try:
            hint = runtime.state.node_hint(body.node)
        except SessionError as exc:
            raise ApiError(400, exc.code, str(exc)) from exc
        log.append(
            EventRecord(
                clock(), runtime.student_id, runtime.session_id, runtime.problem_id, Action.HINT_REQUEST, replay.node_hint_payload(body.node)
            )
        )
        return {"session": runtime.snapshot(), "result": _result_dict(hint)}

    @app.post("/sessions/{session_id}/read-rule")
    def read_rule(session_id: str, body: ReadRuleBody):
        runtime = _session(session_id)
        log.append(
            EventRecord(
                clock(), runtime.student_id, runtime.session_id, runtime.problem_id, Action.READ_RULE, replay.read_rule_payload(body.rule)
            )
        )
        return {"session": runtime.snapshot(), "result": None}

    @app.get("/rules")
    def rules():
        return [
            {"id": r.id, "name": r.name, "arity": r.arity, "description": r.description}
            for r in RULES
        ]

    @app.get("/problems/{problem_id}")
    def get_problem(problem_id: str, mode: str = "PS"):
        problem = problems.get(problem_id)
        if problem is None:
            raise ApiError(404, "UnknownProblem", f"no problem {problem_id!r}")
        try:
            return _redacted_problem(problem, ProblemMode(mode))
        except ValueError:
            raise ApiError(400, "BadMode", f"unknown mode {mode!r}") from None

    @app.get("/reports/scores")
    def report_scores(level: int = 7):
        events = log.scan()
        if not events:
            raise ApiError(404, "EmptyFilter", "no events logged yet")
        states = replay_log(events, problems)
        session_students = {e.session_id: e.student_id for e in events}
        conditions = {r.student_id: r.condition or "unassigned" for r in records}
        rows = score_table(states, problems, conditions, session_students, level=level)
        return {"csv": score_table_csv(rows), "rows": [row.__dict__ for row in rows]}

    @app.get("/reports/transitions", response_class=PlainTextResponse)
    def report_transitions(mode: str, display_threshold: float = 0.15, highlight_threshold: float = 0.30):
        events = log.scan()
        states = replay_log(events, problems)
        levels = {sid: problems[s.problem.id].level for sid, s in states.items()}
        training = [e for e in events if levels.get(e.session_id) in TRAINING_LEVELS]
        try:
            tm = build_transitions(training, mode=mode)
        except EmptyFilter as exc:
            raise ApiError(404, "EmptyFilter", str(exc)) from exc
        return export_transition_dot(tm, display_threshold, highlight_threshold, title=f"{mode} transitions")

    @app.get("/reports/comparisons")
    def report_comparisons(seed_param: int = 0):
        events = log.scan()
        if not events:
            raise ApiError(404, "EmptyFilter", "no events logged yet")
        states = replay_log(events, problems)
        levels = {sid: problems[s.problem.id].level for sid, s in states.items()}
        rows = comparisons_for_log(events, records, levels, seed=seed_param)
        return {"csv": comparisons_csv(rows), "rows": [row.__dict__ for row in rows]}

    return app


def _result_dict(result: Any) -> Any:
    if result is None:
        return None
    if isinstance(result, VerificationResult):
        if result.ok:
            return {"ok": True, "feedback": "Correct."}
        return {
            "ok": False,
            "error_kind": result.error.kind.value,
            "feedback": result.error.message,
        }
    if isinstance(result, FixOutcome):
        feedback = {
            FixOutcome.CORRECTED: "That fixed it.",
            FixOutcome.INCORRECT: "That is not the correct value.",
            FixOutcome.ALREADY_CORRECT: "That element was already correct.",
        }[result]
        return {"outcome": result.value, "feedback": feedback}
    if isinstance(result, HintText):
        return {
            "text": result.text,
            "rule": result.rule_id,
            "parents": list(result.parent_ids),
            "formula": result.formula,
        }
    if isinstance(result, list):
        return {"removed": result}
    return result


def _redacted_problem(problem: ProblemDefinition, mode: ProblemMode) -> dict:
    """Client view of a problem.

    Never exposes the expert solution or bug locations/values; the chunk
    structure and authored hover hints are revealed only for guided sessions.
    """
    data: dict[str, Any] = {
        "id": problem.id,
        "level": problem.level,
        "mode": mode.value,
        "section": section_for_level(problem.level).value,
        "givens": [format_formula(g) for g in problem.givens],
        "conclusion": format_formula(problem.conclusion),
    }
    if mode is ProblemMode.GUIDED:
        data["chunks"] = [
            {
                "id": c.id,
                "member_node_ids": list(c.member_node_ids),
                "subgoal_node_id": c.subgoal_node_id,
                "guidance_text": c.guidance_text,
            }
            for c in problem.chunks
        ]
        data["hints"] = dict(problem.hint_texts)
    return data
