"""Per-problem performance metrics and the composite 0-100 problem score.

The score combines rule application accuracy, completion time, and solution
length with equal weight. Time and length are normalized against the expert
solution's reference values as clamped ratios, so each component lies in
[0, 1] and the composite in [0, 100].
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Iterable, Mapping

from .problem import ProblemDefinition
from .proof import NodeKind
from .session import SessionState

__all__ = [
    "ProblemMetrics",
    "ScoreBaselines",
    "NoAttempts",
    "EmptyGroup",
    "rule_accuracy",
    "problem_score",
    "aggregate_scores",
    "GroupStats",
    "metrics_from_session",
    "baselines_for",
]


class NoAttempts(ValueError):
    """Accuracy is undefined when no rule application was attempted."""


class EmptyGroup(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class ProblemMetrics:
    elapsed_seconds: float
    solution_length: int
    correct_steps: int
    incorrect_steps: int

    def __post_init__(self) -> None:
        if self.elapsed_seconds < 0 or self.solution_length < 0 or self.correct_steps < 0 or self.incorrect_steps < 0:
            raise ValueError("metrics must be non-negative")


@dataclass(frozen=True, slots=True)
class ScoreBaselines:
    ref_time_seconds: float
    ref_length: int

    def __post_init__(self) -> None:
        if self.ref_time_seconds <= 0 or self.ref_length <= 0:
            raise ValueError("baselines must be positive")


def rule_accuracy(metrics: ProblemMetrics) -> float:
    """Correct rule applications divided by all rule-application attempts."""
    attempts = metrics.correct_steps + metrics.incorrect_steps
    if attempts == 0:
        raise NoAttempts("no rule applications were attempted")
    return metrics.correct_steps / attempts


def _ratio(reference: float, actual: float) -> float:
    if actual <= 0:
        return 1.0
    return min(1.0, max(0.0, reference / actual))


def problem_score(metrics: ProblemMetrics, baselines: ScoreBaselines) -> float:
    """Equal-weight composite of accuracy, speed, and solution brevity in [0, 100]."""
    accuracy = rule_accuracy(metrics)
    speed = _ratio(baselines.ref_time_seconds, metrics.elapsed_seconds)
    brevity = _ratio(float(baselines.ref_length), float(metrics.solution_length))
    return 100.0 * (accuracy + speed + brevity) / 3.0


@dataclass(frozen=True, slots=True)
class GroupStats:
    mean: float
    sd: float
    n: int


def aggregate_scores(
    rows: Iterable[tuple[str, float]], grouping: Mapping[str, str] | None = None
) -> dict[str, GroupStats]:
    """Mean and sample SD (n-1) per group.

    ``rows`` are (key, score) pairs; ``grouping`` maps keys to group labels
    (missing keys fall in "all"). Single-member groups get SD 0 and are
    recognizable by n == 1.
    """
    groups: dict[str, list[float]] = {}
    for key, score in rows:
        label = grouping.get(key, "all") if grouping else "all"
        groups.setdefault(label, []).append(score)
    if not groups:
        raise EmptyGroup("no scores to aggregate")
    out: dict[str, GroupStats] = {}
    for label, values in groups.items():
        mean = sum(values) / len(values)
        sd = statistics.stdev(values) if len(values) > 1 else 0.0
        out[label] = GroupStats(mean, sd, len(values))
    return out


def metrics_from_session(state: SessionState) -> ProblemMetrics:
    """Read the performance metrics off a finished (or abandoned) session."""
    ended = state.ended_at if state.ended_at is not None else state.started_at
    elapsed = max(0.0, (ended - state.started_at) / 1000.0)
    derived = sum(
        1
        for node in state.graph.nodes.values()
        if node.kind is not NodeKind.GIVEN and node.justification is not None
    )
    return ProblemMetrics(
        elapsed_seconds=elapsed,
        solution_length=derived,
        correct_steps=state.correct_steps,
        incorrect_steps=state.incorrect_steps,
    )


def baselines_for(problem: ProblemDefinition) -> ScoreBaselines:
    return ScoreBaselines(
        ref_time_seconds=problem.ref_time_seconds,
        ref_length=len(problem.expert_solution),
    )
