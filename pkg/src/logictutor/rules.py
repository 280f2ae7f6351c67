"""Inference rules and single-step verification.

A step is (rule, premises, candidate). Verification is purely structural:
the premises must fit the rule's shape and the candidate must be one of the
statements the rule licenses from them. Premise order never matters; every
two-premise rule is matched under both orderings.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .formula import And, Formula, Implies, Not, Or, format_formula

__all__ = [
    "Rule",
    "RULES",
    "rule_by_id",
    "UnknownRuleError",
    "StepErrorKind",
    "StepError",
    "VerificationResult",
    "check_step",
]


@dataclass(frozen=True, slots=True)
class Rule:
    id: str
    name: str
    arity: int
    description: str


RULES: tuple[Rule, ...] = (
    Rule("MP", "Modus Ponens", 2, "From P → Q and P, derive Q."),
    Rule("MT", "Modus Tollens", 2, "From P → Q and ¬Q, derive ¬P."),
    Rule("DS", "Disjunctive Syllogism", 2, "From P ∨ Q and the negation of one side, derive the other side."),
    Rule("HS", "Hypothetical Syllogism", 2, "From P → Q and Q → R, derive P → R."),
    Rule("Simp", "Simplification", 1, "From P ∧ Q, derive P (or Q)."),
    Rule("Conj", "Conjunction", 2, "From P and Q, derive P ∧ Q."),
    Rule("Add", "Addition", 1, "From P, derive P ∨ Q for any statement Q."),
    Rule("DeM", "De Morgan", 1, "Exchange ¬(P ∧ Q) with ¬P ∨ ¬Q, or ¬(P ∨ Q) with ¬P ∧ ¬Q."),
    Rule("DN", "Double Negation", 1, "Add or remove a double negation: P and ¬¬P are interchangeable."),
    Rule("Contra", "Contrapositive", 1, "Exchange P → Q with ¬Q → ¬P."),
)

_BY_ID = {r.id.lower(): r for r in RULES}


class UnknownRuleError(KeyError):
    def __init__(self, rule_id: str):
        self.rule_id = rule_id
        super().__init__(f"unknown rule: {rule_id!r}")


def rule_by_id(rule_id: str) -> Rule:
    """Look up a rule by its short code, case-insensitively."""
    rule = _BY_ID.get(rule_id.strip().lower())
    if rule is None:
        raise UnknownRuleError(rule_id)
    return rule


class StepErrorKind(str, Enum):
    WRONG_RULE_SHAPE = "WrongRuleShape"
    WRONG_DERIVED_STATEMENT = "WrongDerivedStatement"
    PARENT_ARITY_MISMATCH = "ParentArityMismatch"
    UNKNOWN_RULE = "UnknownRule"
    UNKNOWN_NODE = "UnknownNode"
    UNJUSTIFIED = "Unjustified"
    CYCLE = "CycleDetected"


@dataclass(frozen=True, slots=True)
class StepError:
    kind: StepErrorKind
    message: str


@dataclass(frozen=True, slots=True)
class VerificationResult:
    ok: bool
    error: StepError | None = None

    @staticmethod
    def passed() -> "VerificationResult":
        return VerificationResult(True)

    @staticmethod
    def failed(kind: StepErrorKind, message: str) -> "VerificationResult":
        return VerificationResult(False, StepError(kind, message))


def _ordered_pairs(premises: Sequence[Formula]):
    a, b = premises
    yield a, b
    if a != b:
        yield b, a


def _check_mp(premises, candidate):
    fits = False
    for imp, minor in _ordered_pairs(premises):
        if isinstance(imp, Implies) and imp.left == minor:
            fits = True
            if candidate == imp.right:
                return True, True
    return fits, False


def _check_mt(premises, candidate):
    fits = False
    for imp, minor in _ordered_pairs(premises):
        if isinstance(imp, Implies) and minor == Not(imp.right):
            fits = True
            if candidate == Not(imp.left):
                return True, True
    return fits, False


def _check_ds(premises, candidate):
    fits = False
    for disj, minor in _ordered_pairs(premises):
        if not isinstance(disj, Or):
            continue
        if minor == Not(disj.left):
            fits = True
            if candidate == disj.right:
                return True, True
        if minor == Not(disj.right):
            fits = True
            if candidate == disj.left:
                return True, True
    return fits, False


def _check_hs(premises, candidate):
    fits = False
    for first, second in _ordered_pairs(premises):
        if isinstance(first, Implies) and isinstance(second, Implies) and first.right == second.left:
            fits = True
            if candidate == Implies(first.left, second.right):
                return True, True
    return fits, False


def _check_simp(premises, candidate):
    (p,) = premises
    if not isinstance(p, And):
        return False, False
    return True, candidate in (p.left, p.right)


def _check_conj(premises, candidate):
    a, b = premises
    return True, candidate in (And(a, b), And(b, a))


def _check_add(premises, candidate):
    (p,) = premises
    return True, isinstance(candidate, Or) and p in (candidate.left, candidate.right)


def _check_dem(premises, candidate):
    (p,) = premises
    licensed = []
    if isinstance(p, Not):
        inner = p.child
        if isinstance(inner, And):
            licensed.append(Or(Not(inner.left), Not(inner.right)))
        elif isinstance(inner, Or):
            licensed.append(And(Not(inner.left), Not(inner.right)))
    if isinstance(p, (And, Or)) and isinstance(p.left, Not) and isinstance(p.right, Not):
        joined = Or(p.left.child, p.right.child) if isinstance(p, And) else And(p.left.child, p.right.child)
        licensed.append(Not(joined))
    if not licensed:
        return False, False
    return True, candidate in licensed


def _check_dn(premises, candidate):
    (p,) = premises
    if candidate == Not(Not(p)):
        return True, True
    if isinstance(p, Not) and isinstance(p.child, Not) and candidate == p.child.child:
        return True, True
    return True, False


def _check_contra(premises, candidate):
    (p,) = premises
    if not isinstance(p, Implies):
        return False, False
    if candidate == Implies(Not(p.right), Not(p.left)):
        return True, True
    if isinstance(p.left, Not) and isinstance(p.right, Not) and candidate == Implies(p.right.child, p.left.child):
        return True, True
    return True, False


_CHECKERS = {
    "MP": _check_mp,
    "MT": _check_mt,
    "DS": _check_ds,
    "HS": _check_hs,
    "Simp": _check_simp,
    "Conj": _check_conj,
    "Add": _check_add,
    "DeM": _check_dem,
    "DN": _check_dn,
    "Contra": _check_contra,
}


def check_step(rule: Rule, premises: Sequence[Formula], candidate: Formula) -> VerificationResult:
    """Verify that the premises and rule justify the candidate statement.

    Returns a failed result with kind ``ParentArityMismatch`` when the number
    of premises is wrong, ``WrongRuleShape`` when the premises cannot fit the
    rule at all, and ``WrongDerivedStatement`` when they fit but do not
    license the candidate. Pure and deterministic.
    """
    if len(premises) != rule.arity:
        return VerificationResult.failed(
            StepErrorKind.PARENT_ARITY_MISMATCH,
            f"{rule.name} needs {rule.arity} parent statement{'s' if rule.arity > 1 else ''}, "
            f"but {len(premises)} {'was' if len(premises) == 1 else 'were'} selected.",
        )
    fits, ok = _CHECKERS[rule.id](tuple(premises), candidate)
    if ok:
        return VerificationResult.passed()
    shown = ", ".join(format_formula(p) for p in premises)
    if not fits:
        return VerificationResult.failed(
            StepErrorKind.WRONG_RULE_SHAPE,
            f"{rule.name} does not apply to {shown}. {rule.description}",
        )
    return VerificationResult.failed(
        StepErrorKind.WRONG_DERIVED_STATEMENT,
        f"{format_formula(candidate)} does not follow from {shown} by {rule.name}. {rule.description}",
    )
