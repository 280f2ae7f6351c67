"""Proof graphs: statement nodes with rule-labelled justification edges.

A proof is a DAG. Given nodes carry no justification; every other node may
cite a rule and 1-2 parent nodes. The graph is complete when the conclusion
and all of its ancestors are justified (or given).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .formula import And, Formula, Implies, Not, Or, subformulas
from .rules import (
    StepErrorKind,
    UnknownRuleError,
    VerificationResult,
    check_step,
    rule_by_id,
)

__all__ = [
    "NodeKind",
    "Justification",
    "ProofNode",
    "ProofGraph",
    "validate_proof",
    "find_proof",
]


class NodeKind(str, Enum):
    GIVEN = "Given"
    DERIVED = "Derived"
    CONCLUSION = "Conclusion"


@dataclass(frozen=True, slots=True)
class Justification:
    rule_id: str
    parent_ids: tuple[str, ...]


@dataclass(slots=True)
class ProofNode:
    id: str
    formula: Formula
    kind: NodeKind
    justification: Justification | None = None

    def __post_init__(self) -> None:
        if self.kind is NodeKind.GIVEN and self.justification is not None:
            raise ValueError(f"given node {self.id} must not carry a justification")


@dataclass(slots=True)
class ProofGraph:
    nodes: dict[str, ProofNode] = field(default_factory=dict)
    conclusion_id: str = ""

    def add(self, node: ProofNode) -> None:
        if node.id in self.nodes:
            raise ValueError(f"duplicate node id {node.id!r}")
        self.nodes[node.id] = node

    def parents_of(self, node_id: str) -> tuple[str, ...]:
        just = self.nodes[node_id].justification
        return just.parent_ids if just else ()

    def children_of(self, node_id: str) -> list[str]:
        return [
            n.id
            for n in self.nodes.values()
            if n.justification and node_id in n.justification.parent_ids
        ]

    def descendants_of(self, node_id: str) -> set[str]:
        """Ids of nodes that depend on ``node_id``, transitively."""
        out: set[str] = set()
        frontier = [node_id]
        while frontier:
            current = frontier.pop()
            for child in self.children_of(current):
                if child not in out:
                    out.add(child)
                    frontier.append(child)
        return out

    def ancestors_of(self, node_id: str) -> set[str]:
        out: set[str] = set()
        frontier = list(self.parents_of(node_id))
        while frontier:
            current = frontier.pop()
            if current in out or current not in self.nodes:
                continue
            out.add(current)
            frontier.extend(self.parents_of(current))
        return out

    def is_complete(self) -> bool:
        """Conclusion and every ancestor justified or given, with no dangling ids."""
        if self.conclusion_id not in self.nodes:
            return False
        for node_id in {self.conclusion_id} | self.ancestors_of(self.conclusion_id):
            node = self.nodes[node_id]
            if node.kind is not NodeKind.GIVEN and node.justification is None:
                return False
            for parent in self.parents_of(node_id):
                if parent not in self.nodes:
                    return False
        return True

    def copy(self) -> "ProofGraph":
        return ProofGraph(
            {nid: ProofNode(n.id, n.formula, n.kind, n.justification) for nid, n in self.nodes.items()},
            self.conclusion_id,
        )


def _cycle_members(graph: ProofGraph) -> set[str]:
    """Nodes on a justification cycle, found by iteratively peeling leaves."""
    remaining = {nid: set(graph.parents_of(nid)) & set(graph.nodes) for nid in graph.nodes}
    changed = True
    while changed:
        changed = False
        for nid in list(remaining):
            if not remaining[nid]:
                del remaining[nid]
                for deps in remaining.values():
                    deps.discard(nid)
                changed = True
    return set(remaining)


def validate_proof(graph: ProofGraph) -> list[tuple[str, VerificationResult]]:
    """Check every justified node and the completeness of the graph.

    Returns one (node_id, result) entry per failing node; an empty list means
    the proof is fully correct. Structural problems (unknown parents, cycles,
    unjustified required nodes) come back as failed results, never exceptions.
    """
    failures: list[tuple[str, VerificationResult]] = []
    cyclic = _cycle_members(graph)
    for nid in sorted(cyclic):
        failures.append(
            (nid, VerificationResult.failed(StepErrorKind.CYCLE, "This statement depends on itself through its parents."))
        )
    for nid in sorted(graph.nodes):
        node = graph.nodes[nid]
        if node.justification is None or nid in cyclic:
            continue
        result = _check_node(graph, node)
        if not result.ok:
            failures.append((nid, result))
    if graph.conclusion_id not in graph.nodes:
        failures.append(
            ("", VerificationResult.failed(StepErrorKind.UNKNOWN_NODE, "The conclusion node is missing."))
        )
    else:
        required = {graph.conclusion_id} | graph.ancestors_of(graph.conclusion_id)
        for nid in sorted(required):
            node = graph.nodes.get(nid)
            if node is None:
                continue
            if node.kind is not NodeKind.GIVEN and node.justification is None:
                failures.append(
                    (nid, VerificationResult.failed(StepErrorKind.UNJUSTIFIED, "This statement has not been justified yet."))
                )
    return failures


def _check_node(graph: ProofGraph, node: ProofNode) -> VerificationResult:
    just = node.justification
    assert just is not None
    try:
        rule = rule_by_id(just.rule_id)
    except UnknownRuleError:
        return VerificationResult.failed(StepErrorKind.UNKNOWN_RULE, f"Unknown rule {just.rule_id!r}.")
    premises = []
    for pid in just.parent_ids:
        parent = graph.nodes.get(pid)
        if parent is None:
            return VerificationResult.failed(StepErrorKind.UNKNOWN_NODE, f"Parent node {pid!r} does not exist.")
        premises.append(parent.formula)
    return check_step(rule, premises, node.formula)


# ---------------------------------------------------------------------------
# Forward-chaining proof search.


def find_proof(
    givens: Iterable[Formula],
    conclusion: Formula,
    max_steps: int = 12,
    max_rounds: int = 30,
    max_known: int = 4000,
) -> ProofGraph | None:
    """Breadth-first forward chaining from the givens to the conclusion.

    Elimination-style rules run unrestricted; introduction-style outputs
    (Addition, Conjunction, added double negations) are restricted to
    subformulas of the problem so the search terminates. Returns a graph
    whose derived-node count is at most ``max_steps``, or None.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    given_list = list(dict.fromkeys(givens))
    relevant: set[Formula] = set()
    for f in (*given_list, conclusion):
        relevant.update(subformulas(f))
    relevant |= {Not(s) for s in list(relevant)}
    relevant |= {Not(Not(s)) for s in list(relevant)}
    goal_disjunctions = {s for s in subformulas(conclusion) if isinstance(s, Or)}

    # formula -> (rule_id, parent formulas); givens map to None
    derivations: dict[Formula, tuple[str, tuple[Formula, ...]] | None] = {f: None for f in given_list}

    def consider(formula: Formula, rule_id: str, parents: tuple[Formula, ...], batch: dict) -> None:
        if formula in derivations or formula in batch:
            return
        batch[formula] = (rule_id, parents)

    for _ in range(max_rounds):
        if conclusion in derivations:
            break
        batch: dict[Formula, tuple[str, tuple[Formula, ...]]] = {}
        known = list(derivations)
        for f in known:
            _unary_candidates(f, goal_disjunctions, relevant, batch, consider)
        for i, a in enumerate(known):
            for b in known[i:]:
                _binary_candidates(a, b, relevant, batch, consider)
        batch = {f: j for f, j in batch.items() if f not in derivations}
        if not batch or len(derivations) + len(batch) > max_known:
            derivations.update(batch)
            break
        derivations.update(batch)
    if conclusion not in derivations:
        return None
    return _extract_proof(given_list, conclusion, derivations, max_steps)


def _unary_candidates(f: Formula, goal_disjunctions, relevant, batch, consider) -> None:
    if isinstance(f, And):
        consider(f.left, "Simp", (f,), batch)
        consider(f.right, "Simp", (f,), batch)
        if isinstance(f.left, Not) and isinstance(f.right, Not):
            consider(Not(Or(f.left.child, f.right.child)), "DeM", (f,), batch)
    if isinstance(f, Or) and isinstance(f.left, Not) and isinstance(f.right, Not):
        consider(Not(And(f.left.child, f.right.child)), "DeM", (f,), batch)
    if isinstance(f, Not):
        inner = f.child
        if isinstance(inner, And):
            consider(Or(Not(inner.left), Not(inner.right)), "DeM", (f,), batch)
        elif isinstance(inner, Or):
            consider(And(Not(inner.left), Not(inner.right)), "DeM", (f,), batch)
        elif isinstance(inner, Not):
            consider(inner.child, "DN", (f,), batch)
    if isinstance(f, Implies):
        contra = Implies(Not(f.right), Not(f.left))
        if contra in relevant:
            consider(contra, "Contra", (f,), batch)
        if isinstance(f.left, Not) and isinstance(f.right, Not):
            consider(Implies(f.right.child, f.left.child), "Contra", (f,), batch)
    doubled = Not(Not(f))
    if doubled in relevant:
        consider(doubled, "DN", (f,), batch)
    for goal in goal_disjunctions:
        if f in (goal.left, goal.right):
            consider(goal, "Add", (f,), batch)


def _binary_candidates(a: Formula, b: Formula, relevant, batch, consider) -> None:
    for p, q in ((a, b), (b, a)):
        if isinstance(p, Implies):
            if p.left == q:
                consider(p.right, "MP", (p, q), batch)
            if q == Not(p.right):
                consider(Not(p.left), "MT", (p, q), batch)
            if isinstance(q, Implies) and p.right == q.left:
                consider(Implies(p.left, q.right), "HS", (p, q), batch)
        if isinstance(p, Or):
            if q == Not(p.left):
                consider(p.right, "DS", (p, q), batch)
            if q == Not(p.right):
                consider(p.left, "DS", (p, q), batch)
    for conj in (And(a, b), And(b, a)):
        if conj in relevant:
            consider(conj, "Conj", (a, b), batch)


def _extract_proof(
    given_list: Sequence[Formula],
    conclusion: Formula,
    derivations: dict[Formula, tuple[str, tuple[Formula, ...]] | None],
    max_steps: int,
) -> ProofGraph | None:
    needed: list[Formula] = []
    seen: set[Formula] = set()

    def visit(f: Formula) -> None:
        if f in seen:
            return
        seen.add(f)
        just = derivations[f]
        if just is not None:
            for parent in just[1]:
                visit(parent)
            needed.append(f)

    visit(conclusion)
    if len(needed) > max_steps:
        return None

    graph = ProofGraph()
    ids: dict[Formula, str] = {}
    counter = 0
    for f in given_list:
        counter += 1
        ids[f] = str(counter)
        graph.add(ProofNode(str(counter), f, NodeKind.GIVEN))
    for f in needed:
        rule_id, parents = derivations[f]  # type: ignore[misc]
        counter += 1
        ids[f] = str(counter)
        kind = NodeKind.CONCLUSION if f == conclusion else NodeKind.DERIVED
        graph.add(ProofNode(str(counter), f, kind, Justification(rule_id, tuple(ids[p] for p in parents))))
    graph.conclusion_id = ids[conclusion]
    return graph
