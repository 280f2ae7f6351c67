"""First-order Markov models over interaction logs, with DOT export.

Transition counts are taken over adjacent action pairs within each session
only; sessions never contribute cross-boundary bigrams. Probabilities are
row-normalized counts, P(next action | current action).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .events import Action, EventRecord, group_by_session

__all__ = [
    "STATE_ORDER",
    "DISPLAY_LABELS",
    "EmptyFilter",
    "TransitionMatrix",
    "build_transitions",
    "per_student_transitions",
    "session_modes",
    "export_transition_dot",
]

STATE_ORDER: tuple[Action, ...] = (
    Action.START,
    Action.READ_RULE,
    Action.HINT_REQUEST,
    Action.CORRECT_STEP,
    Action.INCORRECT_STEP,
    Action.DELETE,
    Action.NEXT_STEP,
    Action.PREV_STEP,
    Action.END,
)

# Short labels used in diagrams and comparison tables.
DISPLAY_LABELS: dict[Action, str] = {
    Action.START: "Start",
    Action.READ_RULE: "Read Rule",
    Action.HINT_REQUEST: "Hint",
    Action.CORRECT_STEP: "C Step",
    Action.INCORRECT_STEP: "Inc Step",
    Action.DELETE: "Delete",
    Action.NEXT_STEP: "Next",
    Action.PREV_STEP: "Prev",
    Action.END: "End",
}


class EmptyFilter(ValueError):
    """The requested filter matched no events."""


@dataclass(slots=True)
class TransitionMatrix:
    states: tuple[Action, ...]
    counts: np.ndarray  # int, states x states

    @property
    def probs(self) -> np.ndarray:
        """Row-stochastic transition probabilities; all-zero rows stay zero."""
        totals = self.counts.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            probs = np.where(totals > 0, self.counts / np.maximum(totals, 1), 0.0)
        return probs

    def index(self, action: Action) -> int:
        return self.states.index(action)

    def probability(self, source: Action, target: Action) -> float:
        return float(self.probs[self.index(source), self.index(target)])

    def transitions(self) -> Iterable[tuple[Action, Action, float]]:
        probs = self.probs
        for i, src in enumerate(self.states):
            for j, dst in enumerate(self.states):
                if self.counts[i, j] > 0:
                    yield src, dst, float(probs[i, j])


def session_modes(events: Iterable[EventRecord]) -> dict[str, str]:
    """Map each session id to its presentation mode, read from Start events."""
    modes: dict[str, str] = {}
    for event in events:
        if event.action is Action.START and "mode" in event.payload:
            modes[event.session_id] = event.payload["mode"]
    return modes


def _filtered_sessions(
    events: Sequence[EventRecord],
    mode: str | None,
    students: set[str] | None,
) -> dict[str, list[EventRecord]]:
    modes = session_modes(events)
    sessions = group_by_session(events)
    out: dict[str, list[EventRecord]] = {}
    for session_id, records in sessions.items():
        if mode is not None and modes.get(session_id) != mode:
            continue
        if students is not None and records[0].student_id not in students:
            continue
        out[session_id] = records
    return out


def build_transitions(
    events: Sequence[EventRecord],
    mode: str | None = None,
    students: set[str] | None = None,
) -> TransitionMatrix:
    """Count adjacent action pairs within each matching session."""
    sessions = _filtered_sessions(events, mode, students)
    if not sessions:
        raise EmptyFilter(f"no sessions match mode={mode!r}, students={students!r}")
    index = {action: i for i, action in enumerate(STATE_ORDER)}
    counts = np.zeros((len(STATE_ORDER), len(STATE_ORDER)), dtype=np.int64)
    for records in sessions.values():
        for prev, current in zip(records, records[1:]):
            counts[index[prev.action], index[current.action]] += 1
    return TransitionMatrix(STATE_ORDER, counts)


def per_student_transitions(
    events: Sequence[EventRecord],
    mode: str | None = None,
) -> dict[str, TransitionMatrix]:
    """One transition matrix per student over the student's matching sessions."""
    sessions = _filtered_sessions(events, mode, None)
    if not sessions:
        raise EmptyFilter(f"no sessions match mode={mode!r}")
    index = {action: i for i, action in enumerate(STATE_ORDER)}
    out: dict[str, TransitionMatrix] = {}
    for records in sessions.values():
        student = records[0].student_id
        matrix = out.get(student)
        if matrix is None:
            matrix = TransitionMatrix(STATE_ORDER, np.zeros((len(STATE_ORDER), len(STATE_ORDER)), dtype=np.int64))
            out[student] = matrix
        for prev, current in zip(records, records[1:]):
            matrix.counts[index[prev.action], index[current.action]] += 1
    return out


def export_transition_dot(
    tm: TransitionMatrix,
    display_threshold: float = 0.15,
    highlight_threshold: float = 0.30,
    title: str = "transitions",
) -> str:
    """Render the model as a DOT digraph.

    Edges with probability strictly above ``display_threshold`` are shown;
    a node that would otherwise have no incident edge keeps its single
    strongest outgoing edge. Edges strictly above ``highlight_threshold``
    are highlighted in blue; labels show the percentage to one decimal.
    """
    probs = tm.probs
    visible: set[tuple[int, int]] = {
        (i, j)
        for i in range(len(tm.states))
        for j in range(len(tm.states))
        if probs[i, j] > display_threshold
    }
    # Rescue isolated nodes: keep their strongest outgoing connection.
    for i in range(len(tm.states)):
        incident = any(i in pair for pair in visible)
        if incident or tm.counts[i].sum() == 0:
            continue
        j = int(np.argmax(probs[i]))
        visible.add((i, j))
    lines = [f'digraph "{title}" {{', "\trankdir=LR;", '\tnode [shape=ellipse, style=filled, fillcolor="#f0f0f0"];']
    for action in tm.states:
        lines.append(f'\t"{DISPLAY_LABELS[action]}";')
    for i, j in sorted(visible):
        pct = probs[i, j] * 100.0
        attrs = [f'label="{pct:.1f}%"']
        if probs[i, j] > highlight_threshold:
            attrs.append('color="blue"')
            attrs.append("penwidth=2.0")
        else:
            attrs.append('color="gray60"')
        lines.append(
            f'\t"{DISPLAY_LABELS[tm.states[i]]}" -> "{DISPLAY_LABELS[tm.states[j]]}" [{", ".join(attrs)}];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
