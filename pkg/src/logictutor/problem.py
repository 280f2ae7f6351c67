"""Problem definitions: givens, conclusion, expert solution, and mode payloads.

One problem per JSON file; the exact field names are documented in
docs/problem-file-schema.md. The same underlying problem backs all four
presentation modes, so the payloads for bug-fixing practice (bugs), guided
reconstruction (chunks, hints, missing justifications), and workspace
coloring (node frequencies) all live on the definition.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

from .formula import And, Formula, Iff, Implies, Not, Or, ParseError, format_formula, parse_formula
from .proof import Justification, NodeKind, ProofGraph, ProofNode, validate_proof
from .rules import RULES, UnknownRuleError, check_step, rule_by_id

__all__ = [
    "ProblemMode",
    "OpLabel",
    "ExpertStep",
    "BugKind",
    "Bug",
    "Chunk",
    "ProblemDefinition",
    "ProblemFormatError",
    "Diagnostic",
    "load_problem",
    "save_problem",
    "load_problem_dir",
    "validate_problem_file",
    "NoPerturbableElement",
    "perturb_solution",
]


class ProblemMode(str, Enum):
    PS = "PS"
    WE = "WE"
    BUGGY = "Buggy"
    GUIDED = "Guided"


class OpLabel(str, Enum):
    CONSTRUCT = "construct"
    EXTRACT = "extract"
    TRANSFORM = "transform"


class BugKind(str, Enum):
    EXPRESSION = "expression"
    RULE = "rule"


@dataclass(frozen=True, slots=True)
class ExpertStep:
    node_id: str
    formula: Formula
    rule_id: str
    parent_ids: tuple[str, ...]
    op_label: OpLabel


@dataclass(frozen=True, slots=True)
class Bug:
    target_node_id: str
    kind: BugKind
    displayed_value: str
    correct_value: str


@dataclass(frozen=True, slots=True)
class Chunk:
    id: str
    member_node_ids: tuple[str, ...]
    subgoal_node_id: str
    guidance_text: str


@dataclass(slots=True)
class ProblemDefinition:
    id: str
    level: int
    givens: list[Formula]
    conclusion: Formula
    expert_solution: list[ExpertStep]
    ref_time_seconds: float
    bugs: list[Bug] = field(default_factory=list)
    chunks: list[Chunk] = field(default_factory=list)
    guided_missing: list[str] = field(default_factory=list)
    hint_texts: dict[str, str] = field(default_factory=dict)
    node_frequency: dict[str, int] = field(default_factory=dict)

    @property
    def given_ids(self) -> list[str]:
        return [str(i + 1) for i in range(len(self.givens))]

    @property
    def conclusion_node_id(self) -> str:
        return self.expert_solution[-1].node_id

    def expert_graph(self) -> ProofGraph:
        """The full expert solution as a proof graph."""
        graph = ProofGraph()
        for node_id, formula in zip(self.given_ids, self.givens):
            graph.add(ProofNode(node_id, formula, NodeKind.GIVEN))
        last = self.expert_solution[-1].node_id
        for step in self.expert_solution:
            kind = NodeKind.CONCLUSION if step.node_id == last else NodeKind.DERIVED
            graph.add(ProofNode(step.node_id, step.formula, kind, Justification(step.rule_id, step.parent_ids)))
        graph.conclusion_id = last
        return graph

    def supports(self, mode: ProblemMode) -> bool:
        if mode is ProblemMode.BUGGY:
            return bool(self.bugs)
        if mode is ProblemMode.GUIDED:
            return bool(self.missing_justifications())
        return True

    def missing_justifications(self) -> list[str]:
        """Node ids left unjustified in guided presentations."""
        if self.guided_missing:
            return list(self.guided_missing)
        return [step.node_id for step in self.expert_solution]

    def expert_step_for(self, node_id: str) -> ExpertStep | None:
        for step in self.expert_solution:
            if step.node_id == node_id:
                return step
        return None

    def solution_length(self) -> int:
        return len(self.expert_solution)


class ProblemFormatError(ValueError):
    """Raised when a problem file cannot be interpreted at all."""


def _require(mapping: dict, key: str, kind: type, where: str):
    if key not in mapping:
        raise ProblemFormatError(f"{where}: missing field {key!r}")
    value = mapping[key]
    if not isinstance(value, kind):
        raise ProblemFormatError(f"{where}: field {key!r} must be {kind.__name__}")
    return value


def problem_from_dict(data: dict, where: str = "problem") -> ProblemDefinition:
    problem_id = _require(data, "id", str, where)
    level = _require(data, "level", int, where)
    givens = [parse_formula(g) for g in _require(data, "givens", list, where)]
    conclusion = parse_formula(_require(data, "conclusion", str, where))
    steps = []
    for i, raw in enumerate(_require(data, "expert_solution", list, where)):
        ctx = f"{where}.expert_solution[{i}]"
        steps.append(
            ExpertStep(
                node_id=_require(raw, "node_id", str, ctx),
                formula=parse_formula(_require(raw, "formula", str, ctx)),
                rule_id=_require(raw, "rule", str, ctx),
                parent_ids=tuple(_require(raw, "parents", list, ctx)),
                op_label=OpLabel(_require(raw, "op_label", str, ctx)),
            )
        )
    if not steps:
        raise ProblemFormatError(f"{where}: expert_solution must not be empty")
    bugs = [
        Bug(
            target_node_id=_require(raw, "target_node_id", str, f"{where}.bugs[{i}]"),
            kind=BugKind(_require(raw, "kind", str, f"{where}.bugs[{i}]")),
            displayed_value=_require(raw, "displayed_value", str, f"{where}.bugs[{i}]"),
            correct_value=_require(raw, "correct_value", str, f"{where}.bugs[{i}]"),
        )
        for i, raw in enumerate(data.get("bugs", []))
    ]
    chunks = [
        Chunk(
            id=_require(raw, "id", str, f"{where}.chunks[{i}]"),
            member_node_ids=tuple(_require(raw, "member_node_ids", list, f"{where}.chunks[{i}]")),
            subgoal_node_id=_require(raw, "subgoal_node_id", str, f"{where}.chunks[{i}]"),
            guidance_text=_require(raw, "guidance_text", str, f"{where}.chunks[{i}]"),
        )
        for i, raw in enumerate(data.get("chunks", []))
    ]
    return ProblemDefinition(
        id=problem_id,
        level=level,
        givens=givens,
        conclusion=conclusion,
        expert_solution=steps,
        ref_time_seconds=float(data.get("ref_time_seconds", 60.0 * len(steps))),
        bugs=bugs,
        chunks=chunks,
        guided_missing=list(data.get("guided_missing", [])),
        hint_texts=dict(data.get("hints", {})),
        node_frequency={k: int(v) for k, v in data.get("node_frequency", {}).items()},
    )


def problem_to_dict(problem: ProblemDefinition) -> dict:
    return {
        "id": problem.id,
        "level": problem.level,
        "givens": [format_formula(g) for g in problem.givens],
        "conclusion": format_formula(problem.conclusion),
        "ref_time_seconds": problem.ref_time_seconds,
        "expert_solution": [
            {
                "node_id": s.node_id,
                "formula": format_formula(s.formula),
                "rule": s.rule_id,
                "parents": list(s.parent_ids),
                "op_label": s.op_label.value,
            }
            for s in problem.expert_solution
        ],
        "bugs": [
            {
                "target_node_id": b.target_node_id,
                "kind": b.kind.value,
                "displayed_value": b.displayed_value,
                "correct_value": b.correct_value,
            }
            for b in problem.bugs
        ],
        "chunks": [
            {
                "id": c.id,
                "member_node_ids": list(c.member_node_ids),
                "subgoal_node_id": c.subgoal_node_id,
                "guidance_text": c.guidance_text,
            }
            for c in problem.chunks
        ],
        "guided_missing": list(problem.guided_missing),
        "hints": dict(problem.hint_texts),
        "node_frequency": dict(problem.node_frequency),
    }


def load_problem(path: str | Path) -> ProblemDefinition:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"{path}: not valid JSON ({exc})") from exc
    return problem_from_dict(data, where=path.name)


def save_problem(problem: ProblemDefinition, path: str | Path) -> None:
    Path(path).write_text(json.dumps(problem_to_dict(problem), ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def load_problem_dir(directory: str | Path) -> dict[str, ProblemDefinition]:
    """All problems in a directory, keyed by id, files taken in name order."""
    problems: dict[str, ProblemDefinition] = {}
    for path in sorted(Path(directory).glob("*.json")):
        problem = load_problem(path)
        if problem.id in problems:
            raise ProblemFormatError(f"{path}: duplicate problem id {problem.id!r}")
        problems[problem.id] = problem
    return problems


# ---------------------------------------------------------------------------
# Authoring-time validation.


@dataclass(frozen=True, slots=True)
class Diagnostic:
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


def validate_problem_file(path: str | Path) -> list[Diagnostic]:
    """Full authoring check of one problem file; empty list means OK."""
    try:
        problem = load_problem(path)
    except (ProblemFormatError, ParseError, ValueError) as exc:
        return [Diagnostic(str(path), str(exc))]
    return validate_problem(problem)


def validate_problem(problem: ProblemDefinition) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    where = problem.id
    ids_seen = set(problem.given_ids)
    for step in problem.expert_solution:
        if step.node_id in ids_seen:
            out.append(Diagnostic(f"{where}.expert_solution", f"duplicate node id {step.node_id!r}"))
        ids_seen.add(step.node_id)
    graph = None
    try:
        graph = problem.expert_graph()
    except ValueError as exc:
        out.append(Diagnostic(f"{where}.expert_solution", str(exc)))
    if graph is not None:
        if problem.expert_solution[-1].formula != problem.conclusion:
            out.append(Diagnostic(f"{where}.expert_solution", "last step must derive the conclusion"))
        for node_id, result in validate_proof(graph):
            message = result.error.message if result.error else "invalid"
            out.append(Diagnostic(f"{where}.expert_solution[{node_id}]", message))
    derived_ids = {s.node_id for s in problem.expert_solution} - {problem.conclusion_node_id}
    all_node_ids = ids_seen
    for i, bug in enumerate(problem.bugs):
        loc = f"{where}.bugs[{i}]"
        bug_ok = True
        step = problem.expert_step_for(bug.target_node_id)
        if step is None:
            out.append(Diagnostic(loc, f"target node {bug.target_node_id!r} is not part of the expert solution"))
            continue
        if bug.displayed_value == bug.correct_value:
            out.append(Diagnostic(loc, "displayed value equals the correct value"))
            bug_ok = False
        if bug.kind is BugKind.EXPRESSION:
            try:
                parse_formula(bug.displayed_value)
            except ParseError as exc:
                out.append(Diagnostic(loc, f"displayed expression does not parse: {exc}"))
                bug_ok = False
            try:
                if parse_formula(bug.correct_value) != step.formula:
                    out.append(Diagnostic(loc, "correct value must match the expert statement"))
            except ParseError as exc:
                out.append(Diagnostic(loc, f"correct expression does not parse: {exc}"))
        else:
            for label, value in (("displayed", bug.displayed_value), ("correct", bug.correct_value)):
                try:
                    rule_by_id(value)
                except UnknownRuleError:
                    out.append(Diagnostic(loc, f"{label} value {value!r} is not a rule id"))
                    bug_ok = False
            try:
                if rule_by_id(bug.correct_value).id != rule_by_id(step.rule_id).id:
                    out.append(Diagnostic(loc, "correct value must match the expert rule"))
            except UnknownRuleError:
                pass
        if graph is not None and bug_ok:
            bugged = apply_bugs(graph, [bug])
            if not validate_proof(bugged):
                out.append(Diagnostic(loc, "applying this bug leaves the solution fully valid"))
    chunk_members: list[str] = []
    for i, chunk in enumerate(problem.chunks):
        loc = f"{where}.chunks[{i}]"
        if chunk.subgoal_node_id not in chunk.member_node_ids:
            out.append(Diagnostic(loc, "subgoal must be one of the chunk members"))
        for member in chunk.member_node_ids:
            if member not in all_node_ids:
                out.append(Diagnostic(loc, f"member {member!r} does not exist"))
        chunk_members.extend(chunk.member_node_ids)
    if problem.chunks:
        if len(chunk_members) != len(set(chunk_members)):
            out.append(Diagnostic(f"{where}.chunks", "chunks overlap"))
        if set(chunk_members) != derived_ids:
            out.append(Diagnostic(f"{where}.chunks", "chunks must exactly cover the derived (non-conclusion) nodes"))
    for node_id in problem.guided_missing:
        if node_id not in all_node_ids:
            out.append(Diagnostic(f"{where}.guided_missing", f"node {node_id!r} does not exist"))
        elif node_id in problem.given_ids:
            out.append(Diagnostic(f"{where}.guided_missing", f"node {node_id!r} is a given and needs no justification"))
    for node_id in problem.hint_texts:
        if node_id not in all_node_ids:
            out.append(Diagnostic(f"{where}.hints", f"node {node_id!r} does not exist"))
    for text, count in problem.node_frequency.items():
        try:
            parse_formula(text)
        except ParseError as exc:
            out.append(Diagnostic(f"{where}.node_frequency", f"key {text!r} does not parse: {exc}"))
        if count < 0:
            out.append(Diagnostic(f"{where}.node_frequency", f"count for {text!r} is negative"))
    if problem.ref_time_seconds <= 0:
        out.append(Diagnostic(f"{where}.ref_time_seconds", "must be positive"))
    return out


def apply_bugs(graph: ProofGraph, bugs: Iterable[Bug]) -> ProofGraph:
    """Copy of the graph with each bug's displayed value substituted in."""
    bugged = graph.copy()
    for bug in bugs:
        node = bugged.nodes[bug.target_node_id]
        if bug.kind is BugKind.EXPRESSION:
            node.formula = parse_formula(bug.displayed_value)
        else:
            assert node.justification is not None
            node.justification = Justification(bug.displayed_value, node.justification.parent_ids)
    return bugged


# ---------------------------------------------------------------------------
# Bug generation.


class NoPerturbableElement(ValueError):
    """No single-element perturbation of this solution produces a broken proof."""


def _connective_flips(f: Formula) -> Iterator[Formula]:
    """Each variant of ``f`` with exactly one binary connective exchanged."""
    swap = {And: Or, Or: And, Implies: Iff, Iff: Implies}
    if isinstance(f, Not):
        for child in _connective_flips(f.child):
            yield Not(child)
        return
    if isinstance(f, (And, Or, Implies, Iff)):
        yield swap[type(f)](f.left, f.right)
        for left in _connective_flips(f.left):
            yield type(f)(left, f.right)
        for right in _connective_flips(f.right):
            yield type(f)(f.left, right)


def _negation_toggles(f: Formula) -> Iterator[Formula]:
    """Each variant of ``f`` with one negation added or removed."""
    yield Not(f)
    if isinstance(f, Not):
        yield f.child
        for child in _negation_toggles(f.child):
            yield Not(child)
    elif isinstance(f, (And, Or, Implies, Iff)):
        for left in _negation_toggles(f.left):
            yield type(f)(left, f.right)
        for right in _negation_toggles(f.right):
            yield type(f)(f.left, right)


def perturb_solution(problem: ProblemDefinition, kind: BugKind, rng: random.Random) -> Bug:
    """Generate one bug of the requested kind that breaks the expert solution.

    Expression bugs flip a single binary connective or toggle a single
    negation in a derived (non-conclusion) statement; rule bugs replace one
    step's rule with a different rule of the same arity. Only perturbations
    that actually invalidate the proof are returned.
    """
    graph = problem.expert_graph()
    candidates: list[Bug] = []
    if kind is BugKind.EXPRESSION:
        for step in problem.expert_solution:
            if step.node_id == problem.conclusion_node_id:
                continue
            variants = list(_connective_flips(step.formula)) + list(_negation_toggles(step.formula))
            for variant in variants:
                if variant != step.formula:
                    candidates.append(
                        Bug(step.node_id, kind, format_formula(variant), format_formula(step.formula))
                    )
    else:
        for step in problem.expert_solution:
            arity = rule_by_id(step.rule_id).arity
            for rule in RULES:
                if rule.arity != arity or rule.id == rule_by_id(step.rule_id).id:
                    continue
                premises = [graph.nodes[p].formula for p in step.parent_ids]
                if not check_step(rule, premises, step.formula).ok:
                    candidates.append(Bug(step.node_id, kind, rule.id, rule_by_id(step.rule_id).id))
    rng.shuffle(candidates)
    for bug in candidates:
        if validate_proof(apply_bugs(graph, [bug])):
            return bug
    raise NoPerturbableElement(f"problem {problem.id}: no {kind.value} perturbation breaks the solution")
