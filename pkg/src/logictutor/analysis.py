"""Reports over interaction logs: score tables, group comparisons, diagrams.

Sessions are rebuilt from the event log, scored, and grouped by training
condition or by prior knowledge (median split on pretest scores). Outputs are
delimited text plus structured records, and DOT diagrams per problem type.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Mapping, Sequence

from .events import EventRecord, read_events
from .markov import (
    DISPLAY_LABELS,
    EmptyFilter,
    build_transitions,
    export_transition_dot,
    per_student_transitions,
)
from .problem import ProblemDefinition, ProblemMode
from .replay import replay_log
from .scoring import NoAttempts, baselines_for, metrics_from_session, problem_score, rule_accuracy
from .session import SessionState
from .stats import bootstrap_ci_a, mann_whitney_u, median_split_ids, vargha_delaney_a, DegenerateSample
from .study import POSTTEST_LEVEL, TRAINING_LEVELS, StudentRecord

__all__ = [
    "ScoreRow",
    "GroupComparison",
    "score_table",
    "score_table_csv",
    "compare_groups",
    "comparisons_for_log",
    "comparisons_csv",
    "run_analysis",
]

_ANALYSIS_MODES = (ProblemMode.PS, ProblemMode.BUGGY, ProblemMode.GUIDED)


@dataclass(frozen=True, slots=True)
class ScoreRow:
    group: str
    n_students: int
    n_sessions: int
    score_mean: float
    score_sd: float
    accuracy_mean: float
    accuracy_sd: float
    time_minutes_mean: float
    time_minutes_sd: float
    length_mean: float
    length_sd: float


@dataclass(frozen=True, slots=True)
class GroupComparison:
    problem_type: str
    transition: str
    low_pct: float
    high_pct: float
    p_value: float
    effect_a: float
    ci_low: float
    ci_high: float
    n_low: int
    n_high: int

    def formatted(self) -> dict[str, str]:
        """Row with report formatting: p to 3 decimals, A and CI to 2."""
        return {
            "problem_type": self.problem_type,
            "transition": self.transition,
            "low_pct": f"{self.low_pct:.1f}",
            "high_pct": f"{self.high_pct:.1f}",
            "p_value": f"{self.p_value:.3f}",
            "effect_a": f"{self.effect_a:.2f}",
            "ci_95": f"[{self.ci_low:.2f}, {self.ci_high:.2f}]",
        }


def _mean_sd(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    if n == 1:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, var**0.5


def score_table(
    states: Mapping[str, SessionState],
    problems: Mapping[str, ProblemDefinition],
    conditions: Mapping[str, str],
    session_students: Mapping[str, str],
    level: int = POSTTEST_LEVEL,
) -> list[ScoreRow]:
    """Per-condition mean (SD) of score, accuracy, time, and length at one level."""
    by_group: dict[str, dict[str, list[float]]] = {}
    students: dict[str, set[str]] = {}
    for session_id, state in states.items():
        problem = problems[state.problem.id]
        if problem.level != level or not state.finished:
            continue
        student = session_students[session_id]
        group = conditions.get(student)
        if group is None:
            continue
        metrics = metrics_from_session(state)
        try:
            accuracy = rule_accuracy(metrics) * 100.0
        except NoAttempts:
            continue
        score = problem_score(metrics, baselines_for(problem))
        bucket = by_group.setdefault(group, {"score": [], "accuracy": [], "time": [], "length": []})
        bucket["score"].append(score)
        bucket["accuracy"].append(accuracy)
        bucket["time"].append(metrics.elapsed_seconds / 60.0)
        bucket["length"].append(float(metrics.solution_length))
        students.setdefault(group, set()).add(student)
    rows = []
    for group in sorted(by_group):
        bucket = by_group[group]
        score_m, score_sd = _mean_sd(bucket["score"])
        acc_m, acc_sd = _mean_sd(bucket["accuracy"])
        time_m, time_sd = _mean_sd(bucket["time"])
        len_m, len_sd = _mean_sd(bucket["length"])
        rows.append(
            ScoreRow(
                group=group,
                n_students=len(students[group]),
                n_sessions=len(bucket["score"]),
                score_mean=score_m,
                score_sd=score_sd,
                accuracy_mean=acc_m,
                accuracy_sd=acc_sd,
                time_minutes_mean=time_m,
                time_minutes_sd=time_sd,
                length_mean=len_m,
                length_sd=len_sd,
            )
        )
    return rows


def score_table_csv(rows: Sequence[ScoreRow]) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["Group (N)", "Problem Score", "Rule Accuracy", "Time (minutes)", "Solution Length"])
    for row in rows:
        writer.writerow(
            [
                f"{row.group} ({row.n_students})",
                f"{row.score_mean:.1f} ({row.score_sd:.1f})",
                f"{row.accuracy_mean:.1f} ({row.accuracy_sd:.1f})",
                f"{row.time_minutes_mean:.1f} ({row.time_minutes_sd:.1f})",
                f"{row.length_mean:.1f} ({row.length_sd:.1f})",
            ]
        )
    return out.getvalue()


def per_student_transition_values(
    events: Sequence[EventRecord],
    mode: ProblemMode,
    session_levels: Mapping[str, int],
    levels: tuple[int, ...] = TRAINING_LEVELS,
) -> dict[tuple[str, str], dict[str, float]]:
    """Per-student P(next | current) for each observed transition.

    A student contributes a value for transitions out of a state only when
    they visited that state at least once; otherwise the value is undefined
    and the student is excluded for those transitions (never counted as 0).
    """
    scoped = [e for e in events if session_levels.get(e.session_id) in levels]
    matrices = per_student_transitions(scoped, mode=mode.value)
    values: dict[tuple[str, str], dict[str, float]] = {}
    for student, tm in matrices.items():
        probs = tm.probs
        row_totals = tm.counts.sum(axis=1)
        for i, src in enumerate(tm.states):
            if row_totals[i] == 0:
                continue
            for j, dst in enumerate(tm.states):
                key = (DISPLAY_LABELS[src], DISPLAY_LABELS[dst])
                values.setdefault(key, {})[student] = float(probs[i, j])
    # Keep transitions somebody actually took.
    return {
        key: vals
        for key, vals in values.items()
        if any(v > 0 for v in vals.values())
    }


def compare_groups(
    values_by_transition: Mapping[tuple[str, str], Mapping[str, float]],
    low_ids: set[str],
    high_ids: set[str],
    problem_type: str,
    seed: int = 0,
    resamples: int = 2000,
) -> list[GroupComparison]:
    """One comparison row per transition, sorted by ascending p-value."""
    rows: list[GroupComparison] = []
    for (src, dst), per_student in values_by_transition.items():
        low = [per_student[s] for s in sorted(low_ids) if s in per_student]
        high = [per_student[s] for s in sorted(high_ids) if s in per_student]
        if len(low) < 2 or len(high) < 2:
            continue
        try:
            _, p = mann_whitney_u(low, high)
        except DegenerateSample:
            p = 1.0
        effect = vargha_delaney_a(low, high)
        ci_low, ci_high = bootstrap_ci_a(low, high, resamples=resamples, seed=seed)
        rows.append(
            GroupComparison(
                problem_type=problem_type,
                transition=f"{src} -> {dst}",
                low_pct=100.0 * sum(low) / len(low),
                high_pct=100.0 * sum(high) / len(high),
                p_value=p,
                effect_a=effect,
                ci_low=ci_low,
                ci_high=ci_high,
                n_low=len(low),
                n_high=len(high),
            )
        )
    rows.sort(key=lambda r: (r.p_value, r.transition))
    return rows


def comparisons_csv(rows: Sequence[GroupComparison]) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["Problem Type", "Transition", "Low Prior (%)", "High Prior (%)", "p-value", "A", "95% CI"])
    for row in rows:
        formatted = row.formatted()
        writer.writerow(
            [
                formatted["problem_type"],
                formatted["transition"],
                formatted["low_pct"],
                formatted["high_pct"],
                formatted["p_value"],
                formatted["effect_a"],
                formatted["ci_95"],
            ]
        )
    return out.getvalue()


def comparisons_for_log(
    events: Sequence[EventRecord],
    records: Sequence[StudentRecord],
    session_levels: Mapping[str, int],
    seed: int = 0,
    resamples: int = 2000,
) -> list[GroupComparison]:
    scores = {r.student_id: r.pretest_score for r in records}
    low_ids, high_ids = median_split_ids(scores)
    rows: list[GroupComparison] = []
    for mode in _ANALYSIS_MODES:
        try:
            values = per_student_transition_values(events, mode, session_levels)
        except EmptyFilter:
            continue
        rows.extend(compare_groups(values, low_ids, high_ids, mode.value, seed=seed, resamples=resamples))
    return rows


def run_analysis(
    log_path: str | Path,
    problems: Mapping[str, ProblemDefinition],
    records: Sequence[StudentRecord],
    out_dir: str | Path,
    display_threshold: float = 0.15,
    highlight_threshold: float = 0.30,
    seed: int = 0,
    resamples: int = 2000,
) -> dict[str, Path]:
    """Full offline pipeline: scores, comparisons, and one DOT per mode."""
    events = list(read_events(log_path))
    if not events:
        raise EmptyFilter(f"event log {log_path} is empty")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    states = replay_log(events, problems)
    session_levels = {sid: problems[state.problem.id].level for sid, state in states.items()}
    session_students = {e.session_id: e.student_id for e in events}
    conditions = {r.student_id: r.condition or "unassigned" for r in records}

    outputs: dict[str, Path] = {}
    rows = score_table(states, problems, conditions, session_students)
    (out / "scores.csv").write_text(score_table_csv(rows), encoding="utf-8")
    (out / "scores.json").write_text(json.dumps([asdict(r) for r in rows], indent=2) + "\n", encoding="utf-8")
    outputs["scores_csv"] = out / "scores.csv"
    outputs["scores_json"] = out / "scores.json"

    comparison_rows = comparisons_for_log(events, records, session_levels, seed=seed, resamples=resamples)
    (out / "comparisons.csv").write_text(comparisons_csv(comparison_rows), encoding="utf-8")
    (out / "comparisons.json").write_text(
        json.dumps([asdict(r) for r in comparison_rows], indent=2) + "\n", encoding="utf-8"
    )
    outputs["comparisons_csv"] = out / "comparisons.csv"
    outputs["comparisons_json"] = out / "comparisons.json"

    training_sessions = [e for e in events if session_levels.get(e.session_id) in TRAINING_LEVELS]
    for mode in _ANALYSIS_MODES:
        try:
            tm = build_transitions(training_sessions, mode=mode.value)
        except EmptyFilter:
            continue
        dot = export_transition_dot(
            tm, display_threshold=display_threshold, highlight_threshold=highlight_threshold, title=f"{mode.value} transitions"
        )
        path = out / f"transitions_{mode.value}.dot"
        path.write_text(dot, encoding="utf-8")
        outputs[f"dot_{mode.value}"] = path
    return outputs
