"""Session state machines for the four problem presentations.

One SessionState per student-problem attempt, mutated by a single writer.
Independent constructions (PS), stepwise walkthroughs (WE), bug fixing
(Buggy), and justification completion (Guided) share the same workspace
graph but expose different operations; each operation enforces its mode.

All mutating operations take the event timestamp (epoch milliseconds) so a
session replayed from its event log reproduces the original state exactly.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field
from enum import Enum

from .formula import Formula, format_formula, parse_formula
from .problem import Bug, BugKind, ProblemDefinition, ProblemMode
from .proof import Justification, NodeKind, ProofGraph, ProofNode, find_proof
from .rules import StepErrorKind, VerificationResult, check_step, rule_by_id

__all__ = [
    "Color",
    "NodeStatus",
    "FixOutcome",
    "HintText",
    "SessionError",
    "ActionNotAvailable",
    "SessionFinished",
    "MissingPayload",
    "UnknownNodeError",
    "CannotDeleteGiven",
    "HasDependents",
    "HintQuotaExceeded",
    "HintsDisabled",
    "GivenImmutable",
    "AlreadyJustified",
    "SessionState",
    "start_problem",
    "HINT_QUOTA",
]

HINT_QUOTA = 4


class Color(str, Enum):
    PURPLE = "purple"
    GREEN = "green"
    YELLOW = "yellow"
    GRAY = "gray"
    CYAN = "cyan"


class FixOutcome(str, Enum):
    CORRECTED = "Corrected"
    INCORRECT = "Incorrect"
    ALREADY_CORRECT = "AlreadyCorrect"


@dataclass(slots=True)
class NodeStatus:
    expression_ok: bool = True
    rule_ok: bool = True
    color: Color = Color.GRAY


@dataclass(frozen=True, slots=True)
class HintText:
    text: str
    rule_id: str | None = None
    parent_ids: tuple[str, ...] = ()
    formula: str | None = None


class SessionError(Exception):
    """Base class for tutoring-session protocol violations."""

    code = "SessionError"


class ActionNotAvailable(SessionError):
    code = "ActionNotAvailable"


class SessionFinished(SessionError):
    code = "SessionFinished"


class MissingPayload(SessionError):
    code = "MissingPayload"


class UnknownNodeError(SessionError):
    code = "UnknownNode"


class CannotDeleteGiven(SessionError):
    code = "CannotDeleteGiven"


class HasDependents(SessionError):
    code = "HasDependents"


class HintQuotaExceeded(SessionError):
    code = "HintQuotaExceeded"


class HintsDisabled(SessionError):
    code = "HintsDisabledInTest"


class GivenImmutable(SessionError):
    code = "GivenImmutable"


class AlreadyJustified(SessionError):
    code = "AlreadyJustified"


@dataclass(slots=True)
class SessionState:
    problem: ProblemDefinition
    mode: ProblemMode
    graph: ProofGraph
    node_status: dict[str, NodeStatus]
    hints_allowed: bool = True
    hints_used: int = 0
    we_cursor: int = 0
    finished: bool = False
    correct_steps: int = 0
    incorrect_steps: int = 0
    started_at: int = 0
    ended_at: int | None = None
    remaining_bugs: set[tuple[str, str]] = field(default_factory=set)
    _next_index: int = 0
    _freq_median: float = 0.0

    # -- shared helpers ----------------------------------------------------

    def _require_mode(self, mode: ProblemMode, operation: str) -> None:
        if self.mode is not mode:
            raise ActionNotAvailable(f"{operation} is not available in {self.mode.value} problems")
        if self.finished:
            raise SessionFinished("this problem is already finished")

    def _node(self, node_id: str) -> ProofNode:
        node = self.graph.nodes.get(node_id)
        if node is None:
            raise UnknownNodeError(f"no node with id {node_id!r}")
        return node

    def _finish(self, at: int) -> None:
        self.finished = True
        self.ended_at = at

    def _fresh_node_id(self) -> str:
        while True:
            self._next_index += 1
            candidate = str(self._next_index)
            if candidate not in self.graph.nodes:
                return candidate

    def _frequency_color(self, formula: Formula) -> Color:
        count = self.problem.node_frequency.get(format_formula(formula), 0)
        if count <= 0:
            return Color.GRAY
        return Color.GREEN if count >= self._freq_median else Color.YELLOW

    # -- problem solving ----------------------------------------------------

    def submit_step(
        self, rule_id: str, parent_ids: list[str], statement_text: str, at: int = 0
    ) -> VerificationResult:
        """Derive a new statement from 1-2 parent nodes and a rule."""
        self._require_mode(ProblemMode.PS, "Submitting a step")
        rule = rule_by_id(rule_id)
        parents = [self._node(pid) for pid in parent_ids]
        candidate = parse_formula(statement_text)
        result = check_step(rule, [p.formula for p in parents], candidate)
        if not result.ok:
            self.incorrect_steps += 1
            return result
        self.correct_steps += 1
        conclusion = self.graph.nodes[self.graph.conclusion_id]
        if candidate == conclusion.formula and conclusion.justification is None:
            conclusion.justification = Justification(rule.id, tuple(parent_ids))
            self.node_status[conclusion.id].rule_ok = True
            self._finish(at)
        else:
            node_id = self._fresh_node_id()
            self.graph.add(ProofNode(node_id, candidate, NodeKind.DERIVED, Justification(rule.id, tuple(parent_ids))))
            self.node_status[node_id] = NodeStatus(color=self._frequency_color(candidate))
        return result

    def delete_node(self, node_id: str, cascade: bool = False, at: int = 0) -> list[str]:
        """Remove a derived node (and, with cascade, everything built on it)."""
        self._require_mode(ProblemMode.PS, "Deleting a node")
        node = self._node(node_id)
        if node.kind is not NodeKind.DERIVED:
            raise CannotDeleteGiven(f"node {node_id} is part of the problem statement and cannot be deleted")
        dependents = self.graph.descendants_of(node_id)
        if dependents and not cascade:
            raise HasDependents(f"node {node_id} supports {len(dependents)} other statement(s)")
        removed = sorted(dependents | {node_id})
        for rid in removed:
            del self.graph.nodes[rid]
            self.node_status.pop(rid, None)
        return removed

    def request_hint(self, at: int = 0) -> HintText:
        """Name the next useful step; at most four per training problem."""
        self._require_mode(ProblemMode.PS, "Requesting a hint")
        if not self.hints_allowed:
            raise HintsDisabled("hints are not available in test problems")
        if self.hints_used >= HINT_QUOTA:
            raise HintQuotaExceeded(f"all {HINT_QUOTA} hints have been used")
        self.hints_used += 1
        hint = self._next_expert_hint()
        if hint is None:
            hint = self._search_hint()
        if hint is None:
            hint = HintText("Work toward the conclusion from the given statements.")
        return hint

    def _present_formulas(self) -> dict[Formula, str]:
        return {
            node.formula: node.id
            for node in self.graph.nodes.values()
            if node.kind is NodeKind.GIVEN or node.justification is not None
        }

    def _next_expert_hint(self) -> HintText | None:
        expert = self.problem.expert_graph()
        present = self._present_formulas()
        for step in self.problem.expert_solution:
            if step.formula in present:
                continue
            parent_formulas = [expert.nodes[pid].formula for pid in step.parent_ids]
            if all(f in present for f in parent_formulas):
                parent_ids = tuple(present[f] for f in parent_formulas)
                return self._hint_for(step.rule_id, parent_ids, step.formula)
        return None

    def _search_hint(self) -> HintText | None:
        present = self._present_formulas()
        proof = find_proof(list(present), self.problem.conclusion, max_steps=24)
        if proof is None:
            return None
        for node in sorted(proof.nodes.values(), key=lambda n: int(n.id)):
            if node.justification is None or node.formula in present:
                continue
            parents = [proof.nodes[p].formula for p in node.justification.parent_ids]
            if all(f in present for f in parents):
                parent_ids = tuple(present[f] for f in parents)
                return self._hint_for(node.justification.rule_id, parent_ids, node.formula)
        return None

    def _hint_for(self, rule_id: str, parent_ids: tuple[str, ...], formula: Formula) -> HintText:
        rule = rule_by_id(rule_id)
        shown = " and ".join(
            f"{pid} ({format_formula(self.graph.nodes[pid].formula)})" for pid in parent_ids
        )
        return HintText(
            text=f"Apply {rule.name} to {shown} to derive {format_formula(formula)}.",
            rule_id=rule.id,
            parent_ids=parent_ids,
            formula=format_formula(formula),
        )

    # -- worked example -----------------------------------------------------

    def we_steps(self) -> int:
        return len(self.problem.expert_solution)

    def next_step(self, at: int = 0) -> None:
        """Reveal the next demonstrated step; past the last step, finish."""
        if self.mode is not ProblemMode.WE:
            raise ActionNotAvailable("Step navigation is only available in worked examples")
        if self.finished:
            return
        if self.we_cursor < self.we_steps():
            step = self.problem.expert_solution[self.we_cursor]
            self.we_cursor += 1
            if step.node_id == self.graph.conclusion_id:
                self.graph.nodes[step.node_id].justification = Justification(step.rule_id, step.parent_ids)
                self.node_status[step.node_id].rule_ok = True
            else:
                self.graph.add(
                    ProofNode(step.node_id, step.formula, NodeKind.DERIVED, Justification(step.rule_id, step.parent_ids))
                )
                self.node_status[step.node_id] = NodeStatus(color=Color.GREEN)
        else:
            self._finish(at)

    def prev_step(self, at: int = 0) -> None:
        """Walk one demonstrated step back; clamped at the beginning."""
        if self.mode is not ProblemMode.WE:
            raise ActionNotAvailable("Step navigation is only available in worked examples")
        if self.finished or self.we_cursor == 0:
            return
        self.we_cursor -= 1
        step = self.problem.expert_solution[self.we_cursor]
        if step.node_id == self.graph.conclusion_id:
            self.graph.nodes[step.node_id].justification = None
            self.node_status[step.node_id].rule_ok = False
        else:
            del self.graph.nodes[step.node_id]
            self.node_status.pop(step.node_id, None)

    # -- buggy example ------------------------------------------------------

    def node_options(self, node_id: str) -> list[str]:
        """The two fix choices for a solution node; givens are immutable."""
        if self.mode is not ProblemMode.BUGGY:
            raise ActionNotAvailable("Fixing is only available in buggy examples")
        node = self._node(node_id)
        if node.kind is NodeKind.GIVEN:
            raise GivenImmutable("given statements are always correct and cannot be modified")
        return ["Edit Expression", "Edit Rule Name"]

    def submit_fix(self, node_id: str, kind: BugKind, text: str, at: int = 0) -> FixOutcome:
        """Check a typed replacement for one element of the displayed solution."""
        self._require_mode(ProblemMode.BUGGY, "Submitting a fix")
        node = self._node(node_id)
        if node.kind is NodeKind.GIVEN:
            raise GivenImmutable("given statements are always correct and cannot be modified")
        expert = self.problem.expert_step_for(node_id)
        assert expert is not None
        if kind is BugKind.EXPRESSION:
            already = node.formula == expert.formula
            value = parse_formula(text)
            correct = value == expert.formula
        else:
            assert node.justification is not None
            already = _same_rule(node.justification.rule_id, expert.rule_id)
            correct = _same_rule(text, expert.rule_id)
        if already:
            self._refresh_buggy_color(node_id)
            return FixOutcome.ALREADY_CORRECT
        if not correct:
            self.incorrect_steps += 1
            return FixOutcome.INCORRECT
        if kind is BugKind.EXPRESSION:
            node.formula = expert.formula
        else:
            node.justification = Justification(expert.rule_id, node.justification.parent_ids)
        self.correct_steps += 1
        self.remaining_bugs.discard((node_id, kind.value))
        self._refresh_buggy_color(node_id)
        if not self.remaining_bugs:
            self._finish(at)
            for other in self.graph.nodes.values():
                if other.kind is not NodeKind.GIVEN:
                    self.node_status[other.id].color = Color.GREEN
        return FixOutcome.CORRECTED

    def _refresh_buggy_color(self, node_id: str) -> None:
        node = self.graph.nodes[node_id]
        expert = self.problem.expert_step_for(node_id)
        assert expert is not None and node.justification is not None
        status = self.node_status[node_id]
        status.expression_ok = node.formula == expert.formula
        status.rule_ok = _same_rule(node.justification.rule_id, expert.rule_id)
        if status.expression_ok and status.rule_ok:
            status.color = Color.GREEN

    # -- guided example -----------------------------------------------------

    def justify(self, node_id: str, rule_id: str, parent_ids: list[str], at: int = 0) -> VerificationResult:
        """Attach a rule and parents to an unjustified statement."""
        self._require_mode(ProblemMode.GUIDED, "Justifying a node")
        node = self._node(node_id)
        if node.kind is NodeKind.GIVEN:
            raise GivenImmutable("given statements need no justification")
        if node.justification is not None:
            raise AlreadyJustified(f"node {node_id} is already justified")
        rule = rule_by_id(rule_id)
        parents = [self._node(pid) for pid in parent_ids]
        if any(node_id == pid or node_id in self.graph.ancestors_of(pid) for pid in parent_ids):
            self.incorrect_steps += 1
            return VerificationResult.failed(
                StepErrorKind.CYCLE, "That connection would make the statement depend on itself."
            )
        result = check_step(rule, [p.formula for p in parents], node.formula)
        if not result.ok:
            self.incorrect_steps += 1
            return result
        node.justification = Justification(rule.id, tuple(parent_ids))
        self.correct_steps += 1
        self.node_status[node_id].rule_ok = True
        self.node_status[node_id].color = Color.GREEN
        if all(
            n.kind is NodeKind.GIVEN or n.justification is not None for n in self.graph.nodes.values()
        ):
            self._finish(at)
        return result

    def node_hint(self, node_id: str) -> HintText:
        """Authored hover hint for a node, or a generated fallback."""
        if self.mode is not ProblemMode.GUIDED:
            raise ActionNotAvailable("Node hints are only available in guided examples")
        node = self._node(node_id)
        authored = self.problem.hint_texts.get(node_id)
        if authored:
            return HintText(authored)
        if node.kind is NodeKind.GIVEN:
            return HintText("This statement is given; it needs no justification.")
        step = self.problem.expert_step_for(node_id)
        assert step is not None
        rule = rule_by_id(step.rule_id)
        shown = " and ".join(step.parent_ids)
        return HintText(
            text=f"Apply {rule.name} to {shown}.",
            rule_id=rule.id,
            parent_ids=step.parent_ids,
        )

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        nodes = {}
        for node_id in sorted(self.graph.nodes):
            node = self.graph.nodes[node_id]
            nodes[node_id] = {
                "formula": format_formula(node.formula),
                "kind": node.kind.value,
                "rule": node.justification.rule_id if node.justification else None,
                "parents": list(node.justification.parent_ids) if node.justification else [],
            }
        return {
            "problem_id": self.problem.id,
            "mode": self.mode.value,
            "conclusion_id": self.graph.conclusion_id,
            "finished": self.finished,
            "correct_steps": self.correct_steps,
            "incorrect_steps": self.incorrect_steps,
            "hints_used": self.hints_used,
            "hints_allowed": self.hints_allowed,
            "we_cursor": self.we_cursor,
            "started_at": self.started_at,
            "ended_at": self.ended_at,
            "remaining_bugs": sorted(list(pair) for pair in self.remaining_bugs),
            "nodes": nodes,
            "status": {
                node_id: {
                    "expression_ok": status.expression_ok,
                    "rule_ok": status.rule_ok,
                    "color": status.color.value,
                }
                for node_id, status in sorted(self.node_status.items())
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)


def _same_rule(a: str, b: str) -> bool:
    return a.strip().lower() == b.strip().lower()


def start_problem(
    problem: ProblemDefinition,
    mode: ProblemMode,
    at: int = 0,
    hints_allowed: bool = True,
) -> SessionState:
    """Initial session state for one problem in one presentation mode."""
    if not problem.supports(mode):
        raise MissingPayload(f"problem {problem.id} has no payload for {mode.value}")
    graph = ProofGraph()
    status: dict[str, NodeStatus] = {}
    for node_id, formula in zip(problem.given_ids, problem.givens):
        graph.add(ProofNode(node_id, formula, NodeKind.GIVEN))
        status[node_id] = NodeStatus(color=Color.PURPLE)
    state = SessionState(
        problem=problem,
        mode=mode,
        graph=graph,
        node_status=status,
        hints_allowed=hints_allowed,
        started_at=at,
        _next_index=len(problem.givens),
    )
    nonzero = [c for c in problem.node_frequency.values() if c > 0]
    state._freq_median = statistics.median(nonzero) if nonzero else 0.0

    if mode in (ProblemMode.PS, ProblemMode.WE):
        graph.add(ProofNode(problem.conclusion_node_id, problem.conclusion, NodeKind.CONCLUSION))
        graph.conclusion_id = problem.conclusion_node_id
        status[problem.conclusion_node_id] = NodeStatus(rule_ok=False, color=Color.PURPLE)
        return state

    if mode is ProblemMode.BUGGY:
        bugged = apply_bugs_to_graph(problem)
        state.graph = bugged
        for node in bugged.nodes.values():
            if node.kind is NodeKind.GIVEN:
                status[node.id] = NodeStatus(color=Color.PURPLE)
            else:
                expert = problem.expert_step_for(node.id)
                assert expert is not None and node.justification is not None
                status[node.id] = NodeStatus(
                    expression_ok=node.formula == expert.formula,
                    rule_ok=_same_rule(node.justification.rule_id, expert.rule_id),
                    color=Color.GRAY,
                )
        state.remaining_bugs = {(bug.target_node_id, bug.kind.value) for bug in problem.bugs}
        return state

    # Guided: full solution with some justifications removed.
    full = problem.expert_graph()
    missing = set(problem.missing_justifications())
    subgoals = {chunk.subgoal_node_id for chunk in problem.chunks}
    state.graph = full
    for node in full.nodes.values():
        if node.kind is NodeKind.GIVEN:
            status[node.id] = NodeStatus(color=Color.PURPLE)
            continue
        if node.id in missing:
            node.justification = None
        color = Color.CYAN if node.id in subgoals else Color.GRAY
        status[node.id] = NodeStatus(rule_ok=node.id not in missing, color=color)
    return state


def apply_bugs_to_graph(problem: ProblemDefinition) -> ProofGraph:
    from .problem import apply_bugs

    return apply_bugs(problem.expert_graph(), problem.bugs)
