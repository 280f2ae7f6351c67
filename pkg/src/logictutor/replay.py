"""Event payload conventions and event-sourced session reconstruction.

Every mutating session operation has a payload builder here; the service and
the bot simulator both log through these, so a session's final state can be
rebuilt from its event stream alone. ``replay_session`` applies a session's
records in order and returns the resulting state.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from .events import Action, EventRecord, group_by_session
from .problem import BugKind, ProblemDefinition, ProblemMode
from .session import SessionState, start_problem

__all__ = [
    "start_payload",
    "step_payload",
    "fix_payload",
    "justify_payload",
    "delete_payload",
    "hint_payload",
    "node_hint_payload",
    "read_rule_payload",
    "we_step_payload",
    "end_payload",
    "ReplayError",
    "apply_event",
    "replay_session",
    "replay_log",
]

_PARENT_SEP = ","


def start_payload(mode: ProblemMode, hints_allowed: bool) -> dict[str, str]:
    return {"mode": mode.value, "hints": "on" if hints_allowed else "off"}


def step_payload(rule_id: str, parent_ids: Sequence[str], statement: str, error: str | None = None) -> dict[str, str]:
    payload = {"rule": rule_id, "parents": _PARENT_SEP.join(parent_ids), "statement": statement}
    if error:
        payload["error"] = error
    return payload


def fix_payload(node_id: str, kind: BugKind, text: str, outcome: str | None = None) -> dict[str, str]:
    payload = {"node": node_id, "element": kind.value, "text": text}
    if outcome:
        payload["outcome"] = outcome
    return payload


def justify_payload(node_id: str, rule_id: str, parent_ids: Sequence[str], error: str | None = None) -> dict[str, str]:
    payload = {"node": node_id, "rule": rule_id, "parents": _PARENT_SEP.join(parent_ids)}
    if error:
        payload["error"] = error
    return payload


def delete_payload(node_id: str, cascade: bool) -> dict[str, str]:
    return {"node": node_id, "cascade": "1" if cascade else "0"}


def hint_payload() -> dict[str, str]:
    return {}


def node_hint_payload(node_id: str) -> dict[str, str]:
    return {"node": node_id}


def read_rule_payload(rule_id: str) -> dict[str, str]:
    return {"rule": rule_id}


def we_step_payload(node_id: str) -> dict[str, str]:
    return {"step": node_id}


def end_payload(state: SessionState) -> dict[str, str]:
    return {"correct": str(state.correct_steps), "incorrect": str(state.incorrect_steps)}


class ReplayError(ValueError):
    pass


def _parents(payload: Mapping[str, str]) -> list[str]:
    raw = payload.get("parents", "")
    return raw.split(_PARENT_SEP) if raw else []


def apply_event(state: SessionState, event: EventRecord) -> None:
    """Re-apply one logged action to a session state."""
    action = event.action
    payload = event.payload
    at = event.timestamp
    if action in (Action.READ_RULE, Action.END):
        return
    if action is Action.HINT_REQUEST:
        if state.mode is ProblemMode.PS:
            state.request_hint(at)
        else:
            state.node_hint(payload["node"])
        return
    if action is Action.DELETE:
        state.delete_node(payload["node"], cascade=payload.get("cascade") == "1", at=at)
        return
    if action is Action.NEXT_STEP:
        state.next_step(at)
        return
    if action is Action.PREV_STEP:
        state.prev_step(at)
        return
    if action in (Action.CORRECT_STEP, Action.INCORRECT_STEP):
        if state.mode is ProblemMode.PS:
            state.submit_step(payload["rule"], _parents(payload), payload["statement"], at)
        elif state.mode is ProblemMode.WE:
            state.next_step(at)
        elif state.mode is ProblemMode.BUGGY:
            state.submit_fix(payload["node"], BugKind(payload["element"]), payload["text"], at)
        else:
            state.justify(payload["node"], payload["rule"], _parents(payload), at)
        return
    raise ReplayError(f"cannot replay action {action}")


def replay_session(
    records: Sequence[EventRecord],
    problems: Mapping[str, ProblemDefinition],
) -> SessionState:
    """Rebuild a session's final state from its ordered event records."""
    if not records or records[0].action is not Action.START:
        raise ReplayError("session stream must begin with a Start record")
    head = records[0]
    problem = problems.get(head.problem_id)
    if problem is None:
        raise ReplayError(f"unknown problem {head.problem_id!r}")
    mode = ProblemMode(head.payload["mode"])
    state = start_problem(problem, mode, at=head.timestamp, hints_allowed=head.payload.get("hints") != "off")
    for event in records[1:]:
        apply_event(state, event)
    return state


def replay_log(
    events: Iterable[EventRecord],
    problems: Mapping[str, ProblemDefinition],
) -> dict[str, SessionState]:
    """Rebuild every session in a log; keys are session ids."""
    return {
        session_id: replay_session(records, problems)
        for session_id, records in group_by_session(events).items()
    }
