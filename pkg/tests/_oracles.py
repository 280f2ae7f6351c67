"""Independent oracles used to cross-check the library.

Everything here is deliberately written with a different mechanism than the
code under test: the rule oracle is a schema unifier rather than hand-coded
pattern checks, the effect-size oracle is a double loop, the rank-test oracle
enumerates group assignments, and the DOT checker is a tiny grammar parser.
"""

from __future__ import annotations

import itertools
import math
import re
from fractions import Fraction

from logictutor.formula import And, Atom, Formula, Iff, Implies, Not, Or

# ---------------------------------------------------------------------------
# Rule schemas.  Metavariables are strings; a schema is (premises, conclusion)
# over pattern trees built from the same AST plus bare strings as holes.

_V = str  # metavariable


def _pat_not(p):
    return ("not", p)


def _pat(op, a, b):
    return (op, a, b)


# Each rule id maps to a list of (premise_patterns, conclusion_pattern).
# Premise order within a schema is immaterial; the matcher tries all
# permutations of the actual premises.
RULE_SCHEMAS: dict[str, list[tuple[tuple, object]]] = {
    "MP": [((("imp", "X", "Y"), "X"), "Y")],
    "MT": [((("imp", "X", "Y"), ("not", "Y")), ("not", "X"))],
    "DS": [
        ((("or", "X", "Y"), ("not", "X")), "Y"),
        ((("or", "X", "Y"), ("not", "Y")), "X"),
    ],
    "HS": [((("imp", "X", "Y"), ("imp", "Y", "Z")), ("imp", "X", "Z"))],
    "Simp": [
        ((("and", "X", "Y"),), "X"),
        ((("and", "X", "Y"),), "Y"),
    ],
    "Conj": [
        (("X", "Y"), ("and", "X", "Y")),
        (("X", "Y"), ("and", "Y", "X")),
    ],
    "Add": [
        (("X",), ("or", "X", "Y")),
        (("X",), ("or", "Y", "X")),
    ],
    "DeM": [
        ((("not", ("and", "X", "Y")),), ("or", ("not", "X"), ("not", "Y"))),
        ((("not", ("or", "X", "Y")),), ("and", ("not", "X"), ("not", "Y"))),
        ((("or", ("not", "X"), ("not", "Y")),), ("not", ("and", "X", "Y"))),
        ((("and", ("not", "X"), ("not", "Y")),), ("not", ("or", "X", "Y"))),
    ],
    "DN": [
        (("X",), ("not", ("not", "X"))),
        ((("not", ("not", "X")),), "X"),
    ],
    "Contra": [
        ((("imp", "X", "Y"),), ("imp", ("not", "Y"), ("not", "X"))),
        ((("imp", ("not", "X"), ("not", "Y")),), ("imp", "Y", "X")),
    ],
}

_OPS = {"not": Not, "and": And, "or": Or, "imp": Implies, "iff": Iff}


def _unify(pattern, value: Formula, bindings: dict[str, Formula]) -> dict[str, Formula] | None:
    if isinstance(pattern, str):
        bound = bindings.get(pattern)
        if bound is None:
            out = dict(bindings)
            out[pattern] = value
            return out
        return bindings if bound == value else None
    op = pattern[0]
    if op == "not":
        if not isinstance(value, Not):
            return None
        return _unify(pattern[1], value.child, bindings)
    if type(value) is not _OPS[op]:
        return None
    mid = _unify(pattern[1], value.left, bindings)
    if mid is None:
        return None
    return _unify(pattern[2], value.right, mid)


def oracle_fits(rule_id: str, premises: tuple[Formula, ...]) -> bool:
    """True when the premises match some schema of the rule, in some order."""
    for patterns, _ in RULE_SCHEMAS[rule_id]:
        if len(patterns) != len(premises):
            continue
        for order in itertools.permutations(premises):
            bindings: dict[str, Formula] | None = {}
            for pat, prem in zip(patterns, order):
                bindings = _unify(pat, prem, bindings)
                if bindings is None:
                    break
            if bindings is not None:
                return True
    return False


def oracle_accepts(rule_id: str, premises: tuple[Formula, ...], candidate: Formula) -> bool:
    """True when premises and candidate jointly match some schema of the rule."""
    for patterns, conclusion in RULE_SCHEMAS[rule_id]:
        if len(patterns) != len(premises):
            continue
        for order in itertools.permutations(premises):
            bindings: dict[str, Formula] | None = {}
            for pat, prem in zip(patterns, order):
                bindings = _unify(pat, prem, bindings)
                if bindings is None:
                    break
            if bindings is None:
                continue
            if _unify(conclusion, candidate, bindings) is not None:
                return True
    return False


def oracle_licensed(rule_id: str, premises: tuple[Formula, ...], universe) -> set[Formula]:
    """Constructive licensed set within ``universe``.

    For every schema the conclusion is instantiated from the premise bindings;
    free conclusion metavariables (Addition) range over the universe.
    """
    out: set[Formula] = set()
    for patterns, conclusion in RULE_SCHEMAS[rule_id]:
        if len(patterns) != len(premises):
            continue
        for order in itertools.permutations(premises):
            bindings: dict[str, Formula] | None = {}
            for pat, prem in zip(patterns, order):
                bindings = _unify(pat, prem, bindings)
                if bindings is None:
                    break
            if bindings is None:
                continue
            free = _free_vars(conclusion) - set(bindings)
            if not free:
                out.add(_instantiate(conclusion, bindings))
            else:
                assert len(free) == 1, "schemas use at most one free conclusion variable"
                (hole,) = free
                for filler in universe:
                    full = dict(bindings)
                    full[hole] = filler
                    out.add(_instantiate(conclusion, full))
    return out


def _free_vars(pattern) -> set[str]:
    if isinstance(pattern, str):
        return {pattern}
    if pattern[0] == "not":
        return _free_vars(pattern[1])
    return _free_vars(pattern[1]) | _free_vars(pattern[2])


def _instantiate(pattern, bindings: dict[str, Formula]) -> Formula:
    if isinstance(pattern, str):
        return bindings[pattern]
    if pattern[0] == "not":
        return Not(_instantiate(pattern[1], bindings))
    ctor = _OPS[pattern[0]]
    return ctor(_instantiate(pattern[1], bindings), _instantiate(pattern[2], bindings))


# ---------------------------------------------------------------------------
# Statistics oracles.


def brute_force_a(a, b) -> float:
    """Pairwise dominance probability by explicit double loop."""
    wins = 0.0
    for x in a:
        for y in b:
            if x > y:
                wins += 1.0
            elif x == y:
                wins += 0.5
    return wins / (len(a) * len(b))


def enumerate_mann_whitney_p(a, b) -> float:
    """Two-sided exact p-value by enumerating all group assignments.

    Walks every way of choosing which pooled observations belong to the first
    group and counts assignments whose U statistic is at least as extreme
    (two-sided, about the null mean nm/2) as the observed one.
    """
    pooled = list(a) + list(b)
    n, m = len(a), len(b)

    def u_of(first_idx: tuple[int, ...]) -> float:
        first = [pooled[i] for i in first_idx]
        rest = [pooled[i] for i in range(len(pooled)) if i not in set(first_idx)]
        u = 0.0
        for x in first:
            for y in rest:
                if x > y:
                    u += 1.0
                elif x == y:
                    u += 0.5
        return u

    observed = u_of(tuple(range(n)))
    center = n * m / 2.0
    observed_dev = abs(observed - center)
    extreme = 0
    total = 0
    for combo in itertools.combinations(range(n + m), n):
        total += 1
        if abs(u_of(combo) - center) >= observed_dev - 1e-12:
            extreme += 1
    return extreme / total


def exact_mean_sd(values) -> tuple[float, float]:
    """Mean and sample SD via fractions, immune to accumulation error."""
    fracs = [Fraction(v).limit_denominator(10**9) for v in values]
    n = len(fracs)
    mean = sum(fracs) / n
    if n == 1:
        return float(mean), 0.0
    var = sum((v - mean) ** 2 for v in fracs) / (n - 1)
    return float(mean), math.sqrt(float(var))


# ---------------------------------------------------------------------------
# Minimal DOT parser: enough grammar to validate the exported digraphs.

_DOT_ID = r'(?:"(?:[^"\\]|\\.)*"|[A-Za-z_][A-Za-z0-9_]*)'
_DOT_ATTR = re.compile(rf"\s*({_DOT_ID})\s*=\s*({_DOT_ID})\s*(?:,|$)")
_DOT_EDGE = re.compile(rf"^\s*({_DOT_ID})\s*->\s*({_DOT_ID})\s*(?:\[(.*)\])?\s*;\s*$")
_DOT_NODE = re.compile(rf"^\s*({_DOT_ID})\s*(?:\[(.*)\])?\s*;\s*$")
_DOT_STMT = re.compile(rf"^\s*({_DOT_ID})\s*=\s*({_DOT_ID})\s*;\s*$")


def _unquote(ident: str) -> str:
    if ident.startswith('"'):
        return ident[1:-1].replace('\\"', '"')
    return ident


def _parse_attrs(text: str | None) -> dict[str, str]:
    attrs: dict[str, str] = {}
    if not text:
        return attrs
    pos = 0
    while pos < len(text.rstrip()):
        match = _DOT_ATTR.match(text, pos)
        if match is None:
            raise ValueError(f"bad attribute list at {text[pos:]!r}")
        attrs[_unquote(match.group(1))] = _unquote(match.group(2))
        pos = match.end()
    return attrs


def parse_dot(text: str):
    """Parse a digraph produced by the exporter; raises ValueError when malformed.

    Returns (nodes, edges) with edges as (tail, head, attrs) triples.
    """
    lines = [line.strip() for line in text.strip().splitlines()]
    if not lines or not re.match(rf"^digraph\s+{_DOT_ID}?\s*{{$", lines[0]):
        raise ValueError("missing digraph header")
    if lines[-1] != "}":
        raise ValueError("missing closing brace")
    nodes: dict[str, dict[str, str]] = {}
    edges: list[tuple[str, str, dict[str, str]]] = []
    for line in lines[1:-1]:
        if not line:
            continue
        edge = _DOT_EDGE.match(line)
        if edge:
            edges.append((_unquote(edge.group(1)), _unquote(edge.group(2)), _parse_attrs(edge.group(3))))
            continue
        if _DOT_STMT.match(line):
            continue
        node = _DOT_NODE.match(line)
        if node:
            name = _unquote(node.group(1))
            if name not in ("graph", "node", "edge"):
                nodes[name] = _parse_attrs(node.group(2))
            continue
        raise ValueError(f"unparseable statement: {line!r}")
    return nodes, edges
