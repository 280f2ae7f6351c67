"""Scripted student bots that exercise the full study pipeline.

Bots take the pretest, get assigned to conditions, work the training levels
in their condition's modes, and sit the posttest, emitting the same event
records a live deployment would. Runs are deterministic for a given seed:
per-student random streams drive both behavior and simulated clocks.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from . import replay
from .events import Action, EventLog, EventRecord
from .formula import format_formula
from .problem import BugKind, ProblemDefinition, ProblemMode
from .rules import RULES, rule_by_id
from .scoring import baselines_for, metrics_from_session, problem_score
from .session import HintQuotaExceeded, SessionState, start_problem
from .study import (
    Curriculum,
    Section,
    StudentRecord,
    assign_conditions,
    condition_by_tag,
    save_manifest,
    section_for_level,
    select_training_mode,
    student_rng,
    test_mode_policy,
)

__all__ = ["BotPolicy", "SimulationResult", "simulate_cohort"]

_BASE_CLOCK_MS = 1_600_000_000_000
_WRONG_STATEMENT = "Z"  # parses, and no curriculum step ever licenses it


@dataclass(frozen=True, slots=True)
class BotPolicy:
    """Behavior knobs for one simulated student."""

    skill: float
    error_prob: float
    hint_propensity: float
    delete_propensity: float
    read_rule_propensity: float

    def __post_init__(self) -> None:
        for name in ("skill", "error_prob", "hint_propensity", "delete_propensity", "read_rule_propensity"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be a probability, got {value}")

    @staticmethod
    def from_skill(skill: float) -> "BotPolicy":
        return BotPolicy(
            skill=skill,
            error_prob=0.55 * (1.0 - skill),
            hint_propensity=0.7 * (1.0 - skill) + 0.05,
            delete_propensity=0.25 * (1.0 - skill) + 0.05,
            read_rule_propensity=0.3,
        )


@dataclass(slots=True)
class SimulationResult:
    log_path: Path
    manifest_path: Path
    states_path: Path
    records: list[StudentRecord]
    final_states: dict[str, dict]


class _Bot:
    def __init__(self, student_id: str, policy: BotPolicy, rng: random.Random, clock_ms: int, log: EventLog):
        self.student_id = student_id
        self.policy = policy
        self.rng = rng
        self.clock = clock_ms
        self.log = log

    def _tick(self) -> int:
        self.clock += self.rng.randint(700, 3500)
        return self.clock

    def _emit(self, session_id: str, problem_id: str, action: Action, payload: dict[str, str], at: int) -> None:
        self.log.append(EventRecord(at, self.student_id, session_id, problem_id, action, payload))

    def run_session(self, session_id: str, problem: ProblemDefinition, mode: ProblemMode, hints_allowed: bool) -> SessionState:
        at = self._tick()
        state = start_problem(problem, mode, at=at, hints_allowed=hints_allowed)
        self._emit(session_id, problem.id, Action.START, replay.start_payload(mode, hints_allowed), at)
        if self.rng.random() < self.policy.read_rule_propensity:
            rule = self.rng.choice(RULES)
            self._emit(session_id, problem.id, Action.READ_RULE, replay.read_rule_payload(rule.id), self._tick())
        if mode is ProblemMode.PS:
            self._solve(session_id, state)
        elif mode is ProblemMode.WE:
            self._watch(session_id, state)
        elif mode is ProblemMode.BUGGY:
            self._debug(session_id, state)
        else:
            self._reconstruct(session_id, state)
        self._emit(session_id, problem.id, Action.END, replay.end_payload(state), self._tick())
        return state

    # -- mode scripts --------------------------------------------------------

    def _solve(self, session_id: str, state: SessionState) -> None:
        problem = state.problem
        expert = problem.expert_graph()
        id_map: dict[str, str] = {gid: gid for gid in problem.given_ids}
        for step in problem.expert_solution:
            if self.rng.random() < self.policy.error_prob:
                self._wrong_step(session_id, state, step.rule_id, [id_map[p] for p in step.parent_ids])
                if state.hints_allowed and self.rng.random() < self.policy.hint_propensity:
                    self._hint(session_id, state)
                if self.rng.random() < self.policy.read_rule_propensity:
                    rule = self.rng.choice(RULES)
                    self._emit(session_id, problem.id, Action.READ_RULE, replay.read_rule_payload(rule.id), self._tick())
            statement = format_formula(expert.nodes[step.node_id].formula)
            parents = [id_map[p] for p in step.parent_ids]
            node_id = self._correct_step(session_id, state, step.rule_id, parents, statement)
            if (
                node_id != state.graph.conclusion_id
                and self.rng.random() < self.policy.delete_propensity
            ):
                at = self._tick()
                state.delete_node(node_id, cascade=False, at=at)
                self._emit(session_id, problem.id, Action.DELETE, replay.delete_payload(node_id, False), at)
                node_id = self._correct_step(session_id, state, step.rule_id, parents, statement)
            id_map[step.node_id] = node_id

    def _wrong_step(self, session_id: str, state: SessionState, rule_id: str, parents: list[str]) -> None:
        at = self._tick()
        result = state.submit_step(rule_id, parents, _WRONG_STATEMENT, at)
        assert not result.ok, "the scripted wrong statement must never verify"
        payload = replay.step_payload(rule_id, parents, _WRONG_STATEMENT, error=result.error.kind.value)
        self._emit(session_id, state.problem.id, Action.INCORRECT_STEP, payload, at)

    def _correct_step(self, session_id: str, state: SessionState, rule_id: str, parents: list[str], statement: str) -> str:
        at = self._tick()
        before = set(state.graph.nodes)
        result = state.submit_step(rule_id, parents, statement, at)
        assert result.ok, f"expert step failed: {rule_id} {parents} {statement}"
        self._emit(session_id, state.problem.id, Action.CORRECT_STEP, replay.step_payload(rule_id, parents, statement), at)
        new_nodes = set(state.graph.nodes) - before
        return new_nodes.pop() if new_nodes else state.graph.conclusion_id

    def _hint(self, session_id: str, state: SessionState) -> None:
        try:
            at = self._tick()
            state.request_hint(at)
        except HintQuotaExceeded:
            return
        self._emit(session_id, state.problem.id, Action.HINT_REQUEST, replay.hint_payload(), at)

    def _watch(self, session_id: str, state: SessionState) -> None:
        steps = state.we_steps()
        revealed = 0
        while revealed < steps:
            at = self._tick()
            step = state.problem.expert_solution[state.we_cursor]
            state.next_step(at)
            revealed += 1
            self._emit(session_id, state.problem.id, Action.CORRECT_STEP, replay.we_step_payload(step.node_id), at)
            if revealed > 1 and self.rng.random() < 0.15:
                at = self._tick()
                state.prev_step(at)
                self._emit(session_id, state.problem.id, Action.PREV_STEP, {}, at)
                at = self._tick()
                step = state.problem.expert_solution[state.we_cursor]
                state.next_step(at)
                self._emit(session_id, state.problem.id, Action.CORRECT_STEP, replay.we_step_payload(step.node_id), at)
        at = self._tick()
        state.next_step(at)
        self._emit(session_id, state.problem.id, Action.NEXT_STEP, {}, at)

    def _debug(self, session_id: str, state: SessionState) -> None:
        problem = state.problem
        bugs = sorted(problem.bugs, key=lambda b: (int(b.target_node_id), b.kind.value))
        for bug in bugs:
            if self.rng.random() < self.policy.read_rule_propensity:
                rule = self.rng.choice(RULES)
                self._emit(session_id, problem.id, Action.READ_RULE, replay.read_rule_payload(rule.id), self._tick())
            attempts = 1 + (self.rng.random() < self.policy.error_prob)
            while attempts > 1:
                attempts -= 1
                wrong = self._wrong_fix_value(bug)
                at = self._tick()
                outcome = state.submit_fix(bug.target_node_id, bug.kind, wrong, at)
                payload = replay.fix_payload(bug.target_node_id, bug.kind, wrong, outcome=outcome.value)
                self._emit(session_id, problem.id, Action.INCORRECT_STEP, payload, at)
            at = self._tick()
            outcome = state.submit_fix(bug.target_node_id, bug.kind, bug.correct_value, at)
            payload = replay.fix_payload(bug.target_node_id, bug.kind, bug.correct_value, outcome=outcome.value)
            self._emit(session_id, problem.id, Action.CORRECT_STEP, payload, at)

    def _wrong_fix_value(self, bug) -> str:
        if bug.kind is BugKind.EXPRESSION:
            return _WRONG_STATEMENT
        correct = rule_by_id(bug.correct_value).id
        options = [r.id for r in RULES if r.id not in (correct, bug.displayed_value)]
        return self.rng.choice(options)

    def _reconstruct(self, session_id: str, state: SessionState) -> None:
        problem = state.problem
        for step in problem.expert_solution:
            if step.node_id not in problem.missing_justifications():
                continue
            if self.rng.random() < self.policy.hint_propensity:
                at = self._tick()
                state.node_hint(step.node_id)
                self._emit(session_id, problem.id, Action.HINT_REQUEST, replay.node_hint_payload(step.node_id), at)
            if self.rng.random() < self.policy.error_prob:
                wrong_rule = "MP" if rule_by_id(step.rule_id).arity == 1 else "Simp"
                at = self._tick()
                result = state.justify(step.node_id, wrong_rule, list(step.parent_ids), at)
                assert not result.ok
                payload = replay.justify_payload(step.node_id, wrong_rule, step.parent_ids, error=result.error.kind.value)
                self._emit(session_id, problem.id, Action.INCORRECT_STEP, payload, at)
                if self.rng.random() < self.policy.read_rule_propensity:
                    self._emit(
                        session_id, problem.id, Action.READ_RULE, replay.read_rule_payload(step.rule_id), self._tick()
                    )
            at = self._tick()
            result = state.justify(step.node_id, step.rule_id, list(step.parent_ids), at)
            assert result.ok
            self._emit(
                session_id, problem.id, Action.CORRECT_STEP, replay.justify_payload(step.node_id, step.rule_id, step.parent_ids), at
            )


def simulate_cohort(
    n_students: int,
    seed: int,
    problems: Mapping[str, ProblemDefinition],
    out_dir: str | Path,
    policy: BotPolicy | None = None,
) -> SimulationResult:
    """Run the whole study protocol for a bot cohort and write its artifacts.

    Produces events.log (interaction records), manifest.json (students,
    seeds, conditions), and states.json (final session snapshots, used by the
    event-sourcing checks). Deterministic: same seed, same bytes.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    log_path = out / "events.log"
    if log_path.exists():
        log_path.unlink()
    log = EventLog(log_path)
    curriculum = Curriculum.from_problems(problems)

    students = [f"s{i + 1:03d}" for i in range(n_students)]
    bots: dict[str, _Bot] = {}
    policies: dict[str, BotPolicy] = {}
    for index, student_id in enumerate(students):
        rng = student_rng(seed, student_id)
        policies[student_id] = policy or BotPolicy.from_skill(rng.uniform(0.2, 0.95))
        bots[student_id] = _Bot(student_id, policies[student_id], rng, _BASE_CLOCK_MS + index * 50_000_000, log)

    final_states: dict[str, dict] = {}
    pretest_scores: dict[str, float] = {}

    def run(student_id: str, problem_id: str, mode: ProblemMode, hints_allowed: bool) -> SessionState:
        bot = bots[student_id]
        session_id = f"{student_id}-{problem_id}"
        state = bot.run_session(session_id, problems[problem_id], mode, hints_allowed)
        final_states[session_id] = state.to_dict()
        return state

    # Intro and pretest: independent problem solving for everyone.
    for student_id in students:
        for pid in curriculum.problems_for(Section.INTRO):
            run(student_id, pid, ProblemMode.PS, hints_allowed=True)
        scores = []
        for pid in curriculum.problems_for(Section.PRETEST):
            state = run(student_id, pid, ProblemMode.PS, hints_allowed=False)
            scores.append(problem_score(metrics_from_session(state), baselines_for(problems[pid])))
        pretest_scores[student_id] = sum(scores) / len(scores)

    assignment = assign_conditions(pretest_scores, seed)

    # Training: each problem's presentation drawn from the condition pool.
    for student_id in students:
        condition = condition_by_tag(assignment[student_id])
        bot = bots[student_id]
        for pid in curriculum.problems_for(Section.TRAINING):
            mode = select_training_mode(condition, bot.rng)
            run(student_id, pid, mode, hints_allowed=test_mode_policy(Section.TRAINING).hints_enabled)

    # Posttest: independent problem solving, no hints.
    for student_id in students:
        for pid in curriculum.problems_for(Section.POSTTEST):
            run(student_id, pid, ProblemMode.PS, hints_allowed=False)

    records = [
        StudentRecord(
            student_id=s,
            pretest_score=pretest_scores[s],
            condition=assignment[s],
            rng_seed=student_rng(seed, s).randint(0, 2**31),
        )
        for s in students
    ]
    manifest_path = out / "manifest.json"
    save_manifest(records, seed, manifest_path)
    states_path = out / "states.json"
    states_path.write_text(
        json.dumps(final_states, indent=1, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    return SimulationResult(log_path, manifest_path, states_path, records, final_states)
