"""Propositional formulas: AST types, parser, canonical printer, truth tables.

Statements are finite trees over single-letter atoms (A-Z) and the five
connectives negation, conjunction, disjunction, implication, biconditional.
The concrete syntax accepts both the Unicode symbols and ASCII aliases;
canonical output always uses the Unicode symbols.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Sequence

__all__ = [
    "Formula",
    "Atom",
    "Not",
    "And",
    "Or",
    "Implies",
    "Iff",
    "ParseError",
    "parse_formula",
    "format_formula",
    "atoms",
    "evaluate",
    "entails",
    "subformulas",
    "enumerate_formulas",
]


class Formula:
    """Base class for propositional formula nodes."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True, slots=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Iff(Formula):
    left: Formula
    right: Formula


class ParseError(ValueError):
    """Raised for malformed formula text; carries position and a hint."""

    def __init__(self, message: str, position: int, expected: str | None = None):
        self.position = position
        self.expected = expected
        detail = f"{message} at position {position}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)


# Token kinds. Binary connectives carry their AST constructor.
_ATOM = "atom"
_NOT = "not"
_AND = "and"
_OR = "or"
_IMPLIES = "implies"
_IFF = "iff"
_LPAREN = "("
_RPAREN = ")"
_END = "end"

# Single-character aliases; "->" and "<->" are handled in the scanner.
_SINGLE = {
    "¬": _NOT,
    "~": _NOT,
    "−": _NOT,  # U+2212 minus sign, common in pasted text
    "∧": _AND,
    "&": _AND,
    "∨": _OR,
    "|": _OR,
    "→": _IMPLIES,
    "↔": _IFF,
    "(": _LPAREN,
    ")": _RPAREN,
}


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens: list[tuple[str, int]] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "-":
            if i + 1 < n and text[i + 1] == ">":
                tokens.append((_IMPLIES, i))
                i += 2
            else:
                tokens.append((_NOT, i))
                i += 1
            continue
        if ch == "<":
            if text[i : i + 3] == "<->":
                tokens.append((_IFF, i))
                i += 3
                continue
            raise ParseError(f"unexpected character {ch!r}", i, expected="'<->'")
        if ch in _SINGLE:
            tokens.append((_SINGLE[ch], i))
            i += 1
            continue
        if "A" <= ch <= "Z":
            tokens.append((_ATOM + ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i, expected="an atom A-Z, a connective, or parentheses")
    tokens.append((_END, n))
    return tokens


class _Parser:
    """Recursive descent over the token list.

    Precedence, tightest first: ¬, ∧, ∨, →, ↔.  ∧ and ∨ associate left,
    → and ↔ associate right; parentheses override everything.
    """

    def __init__(self, tokens: list[tuple[str, int]]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> tuple[str, int]:
        return self.tokens[self.pos]

    def advance(self) -> tuple[str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> Formula:
        f = self.iff()
        kind, pos = self.peek()
        if kind != _END:
            raise ParseError("trailing input", pos, expected="end of statement")
        return f

    def iff(self) -> Formula:
        left = self.implies()
        if self.peek()[0] == _IFF:
            self.advance()
            return Iff(left, self.iff())
        return left

    def implies(self) -> Formula:
        left = self.disjunction()
        if self.peek()[0] == _IMPLIES:
            self.advance()
            return Implies(left, self.implies())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek()[0] == _OR:
            self.advance()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.peek()[0] == _AND:
            self.advance()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        kind, pos = self.advance()
        if kind == _NOT:
            return Not(self.unary())
        if kind == _LPAREN:
            f = self.iff()
            close, cpos = self.advance()
            if close != _RPAREN:
                raise ParseError("unbalanced parenthesis", cpos, expected="')'")
            return f
        if kind.startswith(_ATOM):
            return Atom(kind[-1])
        raise ParseError("unexpected token", pos, expected="an atom, '¬', or '('")


def parse_formula(text: str) -> Formula:
    """Parse concrete syntax into an AST.

    Accepts the Unicode connectives ¬ ∧ ∨ → ↔ and the ASCII aliases
    ~ or - (negation), & , | , -> , <->.
    """
    return _Parser(_tokenize(text)).parse()


_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4, Not: 5, Atom: 6}
_SYMBOL = {Iff: "↔", Implies: "→", Or: "∨", And: "∧"}
_RIGHT_ASSOC = (Implies, Iff)


def format_formula(f: Formula) -> str:
    """Render canonical text; ``parse_formula`` round-trips it exactly."""
    return _fmt(f, 0, False)


def _fmt(f: Formula, parent_prec: int, tighten: bool) -> str:
    # tighten=True when a child at equal precedence needs parentheses
    # (the non-associative side of its parent).
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return "¬" + _fmt(f.child, _PREC[Not], False)
    prec = _PREC[type(f)]
    needs_parens = prec < parent_prec or (prec == parent_prec and tighten)
    right_assoc = isinstance(f, _RIGHT_ASSOC)
    left = _fmt(f.left, prec, right_assoc)
    right = _fmt(f.right, prec, not right_assoc)
    text = f"{left} {_SYMBOL[type(f)]} {right}"
    return f"({text})" if needs_parens else text


def atoms(f: Formula) -> frozenset[str]:
    """Set of atom names occurring in ``f``."""
    if isinstance(f, Atom):
        return frozenset((f.name,))
    if isinstance(f, Not):
        return atoms(f.child)
    return atoms(f.left) | atoms(f.right)  # type: ignore[attr-defined]


def evaluate(f: Formula, assignment: Mapping[str, bool]) -> bool:
    """Truth value of ``f`` under a total assignment of its atoms."""
    if isinstance(f, Atom):
        return assignment[f.name]
    if isinstance(f, Not):
        return not evaluate(f.child, assignment)
    left = evaluate(f.left, assignment)  # type: ignore[attr-defined]
    right = evaluate(f.right, assignment)  # type: ignore[attr-defined]
    if isinstance(f, And):
        return left and right
    if isinstance(f, Or):
        return left or right
    if isinstance(f, Implies):
        return (not left) or right
    return left == right


def entails(premises: Sequence[Formula], conclusion: Formula, max_atoms: int = 8) -> bool:
    """Truth-table entailment: every model of the premises satisfies the conclusion.

    Brute force over all assignments; refuses absurdly wide inputs.
    """
    names = sorted(frozenset().union(atoms(conclusion), *(atoms(p) for p in premises)))
    if len(names) > max_atoms:
        raise ValueError(f"entailment check limited to {max_atoms} atoms, got {len(names)}")
    for bits in range(1 << len(names)):
        assignment = {name: bool(bits >> i & 1) for i, name in enumerate(names)}
        if all(evaluate(p, assignment) for p in premises) and not evaluate(conclusion, assignment):
            return False
    return True


def subformulas(f: Formula) -> Iterator[Formula]:
    """Yield ``f`` and every strict subformula, preorder."""
    yield f
    if isinstance(f, Not):
        yield from subformulas(f.child)
    elif not isinstance(f, Atom):
        yield from subformulas(f.left)  # type: ignore[attr-defined]
        yield from subformulas(f.right)  # type: ignore[attr-defined]


def enumerate_formulas(names: Sequence[str], max_depth: int) -> list[Formula]:
    """All formulas over ``names`` of connective depth at most ``max_depth``.

    Atoms have depth 0. The count grows very quickly; intended for small
    bounds (depth 2 over 3 atoms is 7101 formulas).
    """
    by_depth: list[list[Formula]] = [[Atom(n) for n in names]]
    binary: tuple[Callable[[Formula, Formula], Formula], ...] = (And, Or, Implies, Iff)
    for depth in range(1, max_depth + 1):
        prev = by_depth[depth - 1]
        shallower = [f for level in by_depth[:-1] for f in level]
        level: list[Formula] = [Not(f) for f in prev]
        for ctor in binary:
            # at least one side must have depth exactly depth-1
            level.extend(ctor(a, b) for a in prev for b in prev)
            level.extend(ctor(a, b) for a in prev for b in shallower)
            level.extend(ctor(a, b) for a in shallower for b in prev)
        by_depth.append(level)
    return [f for level in by_depth for f in level]
