"""Append-only interaction log.

One record per student action, one line per record, UTF-8. Field order is
timestamp, student_id, session_id, problem_id, action, then the payload as
space-separated key=value pairs with percent-encoded values (see
docs/event-log-format.md). Timestamps are epoch milliseconds and must be
non-decreasing within a session.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator
from urllib.parse import quote, unquote

__all__ = [
    "Action",
    "ACTIONS_BY_MODE",
    "EventRecord",
    "OrderViolation",
    "StorageFailure",
    "encode_event",
    "decode_event",
    "EventLog",
    "read_events",
    "group_by_session",
]


class Action(str, Enum):
    START = "Start"
    READ_RULE = "ReadRule"
    HINT_REQUEST = "HintRequest"
    CORRECT_STEP = "CorrectStep"
    INCORRECT_STEP = "IncorrectStep"
    DELETE = "Delete"
    NEXT_STEP = "NextStep"
    PREV_STEP = "PrevStep"
    END = "End"


# Legal action alphabet per problem mode: deletes only while problem solving,
# navigation only in worked examples, hints only in PS and Guided.
ACTIONS_BY_MODE: dict[str, frozenset[Action]] = {
    "PS": frozenset(
        {Action.START, Action.READ_RULE, Action.HINT_REQUEST, Action.CORRECT_STEP, Action.INCORRECT_STEP, Action.DELETE, Action.END}
    ),
    "WE": frozenset(
        {Action.START, Action.READ_RULE, Action.CORRECT_STEP, Action.INCORRECT_STEP, Action.NEXT_STEP, Action.PREV_STEP, Action.END}
    ),
    "Guided": frozenset(
        {Action.START, Action.READ_RULE, Action.HINT_REQUEST, Action.CORRECT_STEP, Action.INCORRECT_STEP, Action.END}
    ),
    "Buggy": frozenset(
        {Action.START, Action.READ_RULE, Action.CORRECT_STEP, Action.INCORRECT_STEP, Action.END}
    ),
}


@dataclass(frozen=True, slots=True)
class EventRecord:
    timestamp: int
    student_id: str
    session_id: str
    problem_id: str
    action: Action
    payload: dict[str, str] = field(default_factory=dict)


class OrderViolation(ValueError):
    """Timestamp went backwards within a session."""


class StorageFailure(OSError):
    """The log file could not be written."""


_SAFE = "._-"


def encode_event(event: EventRecord) -> str:
    parts = [
        str(event.timestamp),
        event.student_id,
        event.session_id,
        event.problem_id,
        event.action.value,
    ]
    payload = " ".join(f"{k}={quote(str(v), safe=_SAFE)}" for k, v in sorted(event.payload.items()))
    parts.append(payload)
    return "\t".join(parts)


def decode_event(line: str) -> EventRecord:
    fields = line.rstrip("\n").split("\t")
    if len(fields) != 6:
        raise ValueError(f"malformed event line (expected 6 fields, got {len(fields)}): {line!r}")
    ts, student_id, session_id, problem_id, action, payload_text = fields
    payload: dict[str, str] = {}
    if payload_text:
        for pair in payload_text.split(" "):
            key, _, value = pair.partition("=")
            payload[key] = unquote(value)
    return EventRecord(int(ts), student_id, session_id, problem_id, Action(action), payload)


class EventLog:
    """Durable append-only store over a line-delimited UTF-8 file."""

    def __init__(self, path: str | Path, fsync: bool = False):
        self.path = Path(path)
        self.fsync = fsync
        self._last_ts: dict[str, int] = {}
        if self.path.exists():
            for event in read_events(self.path):
                self._last_ts[event.session_id] = event.timestamp
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.touch()

    def append(self, event: EventRecord) -> None:
        """Durably append one record; per-session timestamp order is enforced."""
        last = self._last_ts.get(event.session_id)
        if last is not None and event.timestamp < last:
            raise OrderViolation(
                f"session {event.session_id}: timestamp {event.timestamp} is before {last}"
            )
        line = encode_event(event) + "\n"
        try:
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(line)
                if self.fsync:
                    handle.flush()
                    os.fsync(handle.fileno())
        except OSError as exc:
            raise StorageFailure(f"cannot append to {self.path}: {exc}") from exc
        self._last_ts[event.session_id] = event.timestamp

    def scan(self) -> list[EventRecord]:
        return list(read_events(self.path))


def read_events(path: str | Path) -> Iterator[EventRecord]:
    """Stream records from a log file in insertion order."""
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                yield decode_event(line)


def group_by_session(events: Iterable[EventRecord]) -> dict[str, list[EventRecord]]:
    """Split a record stream by session, preserving per-session order."""
    sessions: dict[str, list[EventRecord]] = {}
    for event in events:
        sessions.setdefault(event.session_id, []).append(event)
    return sessions
