#!/usr/bin/env python3
"""Build the curriculum problem files under problems/.

Each problem is hand-designed here as compact data; the script expands it
into the full JSON schema (bugs, chunks, hints, node frequencies), checks
everything with the library's validators, and confirms the proof search
finds each solution within the expert length + 2.
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

from logictutor.formula import And, Iff, Implies, Not, Or, format_formula, parse_formula
from logictutor.problem import (
    ProblemDefinition,
    load_problem,
    problem_from_dict,
    save_problem,
    validate_problem,
)
from logictutor.proof import find_proof, validate_proof
from logictutor.rules import rule_by_id

OUT = Path(__file__).resolve().parent.parent / "problems"

# (id, level, givens, steps, bugs)
# steps: (node_id, formula, rule, parents, op_label); last step derives the conclusion
# bugs: (target_node_id, kind, displayed_value)
PROBLEMS = [
    ("intro-1", 0, ["P", "P → Q"],
     [("3", "Q", "MP", ["2", "1"], "extract")], []),
    ("intro-2", 0, ["A ∧ B"],
     [("2", "B", "Simp", ["1"], "extract")], []),

    ("pre-1", 1, ["P → Q", "Q → R", "P"],
     [("4", "Q", "MP", ["1", "3"], "extract"),
      ("5", "R", "MP", ["2", "4"], "extract")], []),
    ("pre-2", 1, ["¬A", "A ∨ B"],
     [("3", "B", "DS", ["2", "1"], "extract"),
      ("4", "B ∨ C", "Add", ["3"], "construct")], []),

    ("L2P1", 2, ["G ∧ ¬H"],
     [("2", "¬H", "Simp", ["1"], "extract"),
      ("3", "¬H ∨ J", "Add", ["2"], "construct")],
     [("2", "expression", "H"), ("2", "rule", "Conj")]),
    ("L2P2", 2, ["P → Q", "¬Q"],
     [("3", "¬P", "MT", ["1", "2"], "extract"),
      ("4", "¬P ∨ R", "Add", ["3"], "construct")],
     [("3", "expression", "P"), ("4", "rule", "DN")]),
    ("L2P3", 2, ["A", "B", "A ∧ B → C"],
     [("4", "A ∧ B", "Conj", ["1", "2"], "construct"),
      ("5", "C", "MP", ["3", "4"], "extract")],
     [("4", "expression", "A ∨ B"), ("4", "rule", "Simp")]),
    ("L2P4", 2, ["¬(P ∧ Q)", "P"],
     [("3", "¬P ∨ ¬Q", "DeM", ["1"], "transform"),
      ("4", "¬¬P", "DN", ["2"], "transform"),
      ("5", "¬Q", "DS", ["3", "4"], "extract")],
     [("3", "expression", "¬P ∧ ¬Q"), ("4", "rule", "Contra")]),

    ("L3P1", 3, ["A → B", "B → C", "A"],
     [("4", "A → C", "HS", ["1", "2"], "construct"),
      ("5", "C", "MP", ["4", "3"], "extract"),
      ("6", "C ∨ D", "Add", ["5"], "construct")],
     [("4", "expression", "A ↔ C"), ("5", "rule", "MT")]),
    ("L3P2", 3, ["P ∧ Q", "P → R"],
     [("3", "P", "Simp", ["1"], "extract"),
      ("4", "R", "MP", ["2", "3"], "extract"),
      ("5", "Q", "Simp", ["1"], "extract"),
      ("6", "R ∧ Q", "Conj", ["4", "5"], "construct")],
     [("4", "expression", "¬R"), ("3", "rule", "Add")]),
    ("L3P3", 3, ["¬B", "A → B", "¬A → D"],
     [("4", "¬A", "MT", ["2", "1"], "extract"),
      ("5", "D", "MP", ["3", "4"], "extract"),
      ("6", "D ∨ C", "Add", ["5"], "construct")],
     [("5", "expression", "¬D"), ("4", "rule", "MP")]),
    ("L3P4", 3, ["P ∨ Q", "¬P", "Q → S"],
     [("4", "Q", "DS", ["1", "2"], "extract"),
      ("5", "S", "MP", ["3", "4"], "extract"),
      ("6", "Q ∧ S", "Conj", ["4", "5"], "construct")],
     [("6", "expression", "Q ∨ S"), ("5", "rule", "HS")]),

    ("L4P1", 4, ["A ∧ B", "A → C", "B → D"],
     [("4", "A", "Simp", ["1"], "extract"),
      ("5", "B", "Simp", ["1"], "extract"),
      ("6", "C", "MP", ["2", "4"], "extract"),
      ("7", "D", "MP", ["3", "5"], "extract"),
      ("8", "C ∧ D", "Conj", ["6", "7"], "construct")],
     [("6", "expression", "¬C"), ("5", "rule", "Conj")]),
    ("L4P2", 4, ["¬(A ∨ B)", "C → A"],
     [("3", "¬A ∧ ¬B", "DeM", ["1"], "transform"),
      ("4", "¬A", "Simp", ["3"], "extract"),
      ("5", "¬C", "MT", ["2", "4"], "extract"),
      ("6", "¬B", "Simp", ["3"], "extract"),
      ("7", "¬C ∧ ¬B", "Conj", ["5", "6"], "construct")],
     [("3", "expression", "¬A ∨ ¬B"), ("4", "rule", "DN")]),
    ("L4P3", 4, ["P → Q", "R → S", "P ∨ R", "¬Q"],
     [("5", "¬P", "MT", ["1", "4"], "extract"),
      ("6", "R", "DS", ["3", "5"], "extract"),
      ("7", "S", "MP", ["2", "6"], "extract"),
      ("8", "S ∨ T", "Add", ["7"], "construct")],
     [("6", "expression", "¬R"), ("7", "rule", "DS")]),
    ("L4P4", 4, ["A → B ∧ C", "A", "C → E"],
     [("4", "B ∧ C", "MP", ["1", "2"], "extract"),
      ("5", "C", "Simp", ["4"], "extract"),
      ("6", "E", "MP", ["3", "5"], "extract"),
      ("7", "B", "Simp", ["4"], "extract"),
      ("8", "B ∧ E", "Conj", ["7", "6"], "construct")],
     [("4", "expression", "B ∨ C"), ("7", "rule", "DeM")]),

    ("L5P1", 5, ["P → Q", "Q → R", "¬R"],
     [("4", "P → R", "HS", ["1", "2"], "construct"),
      ("5", "¬P", "MT", ["4", "3"], "extract"),
      ("6", "¬Q", "MT", ["2", "3"], "extract"),
      ("7", "¬P ∧ ¬Q", "Conj", ["5", "6"], "construct"),
      ("8", "(¬P ∧ ¬Q) ∨ S", "Add", ["7"], "construct")],
     [("6", "expression", "Q"), ("4", "rule", "MP")]),
    ("L5P2", 5, ["¬(P ∧ Q)", "R → P", "Q"],
     [("4", "¬P ∨ ¬Q", "DeM", ["1"], "transform"),
      ("5", "¬¬Q", "DN", ["3"], "transform"),
      ("6", "¬P", "DS", ["4", "5"], "extract"),
      ("7", "¬R", "MT", ["2", "6"], "extract"),
      ("8", "¬R ∨ T", "Add", ["7"], "construct")],
     [("5", "expression", "¬Q"), ("6", "rule", "Simp")]),
    ("L5P3", 5, ["A ∨ B", "¬A", "B → C ∧ D"],
     [("4", "B", "DS", ["1", "2"], "extract"),
      ("5", "C ∧ D", "MP", ["3", "4"], "extract"),
      ("6", "C", "Simp", ["5"], "extract"),
      ("7", "C ∨ E", "Add", ["6"], "construct"),
      ("8", "D", "Simp", ["5"], "extract"),
      ("9", "(C ∨ E) ∧ D", "Conj", ["7", "8"], "construct")],
     [("5", "expression", "C ∨ D"), ("8", "rule", "Add")]),
    ("L5P4", 5, ["P → Q", "S → ¬Q", "T", "T → S"],
     [("5", "S", "MP", ["4", "3"], "extract"),
      ("6", "¬Q", "MP", ["2", "5"], "extract"),
      ("7", "¬Q → ¬P", "Contra", ["1"], "transform"),
      ("8", "¬P", "MP", ["7", "6"], "extract"),
      ("9", "¬P ∨ W", "Add", ["8"], "construct")],
     [("6", "expression", "Q"), ("7", "rule", "DeM")]),

    ("L6P1", 6, ["¬(B ∨ F)", "A → B", "C → F"],
     [("4", "¬B ∧ ¬F", "DeM", ["1"], "transform"),
      ("5", "¬B", "Simp", ["4"], "extract"),
      ("6", "¬A", "MT", ["2", "5"], "extract"),
      ("7", "¬F", "Simp", ["4"], "extract"),
      ("8", "¬C", "MT", ["3", "7"], "extract"),
      ("9", "¬A ∧ ¬C", "Conj", ["6", "8"], "construct")],
     [("4", "expression", "¬B ∨ ¬F"), ("5", "rule", "DS")]),
    ("L6P2", 6, ["P ∨ Q", "P → R", "Q → S", "S → W", "¬R"],
     [("6", "¬P", "MT", ["2", "5"], "extract"),
      ("7", "Q", "DS", ["1", "6"], "extract"),
      ("8", "Q → W", "HS", ["3", "4"], "construct"),
      ("9", "W", "MP", ["8", "7"], "extract"),
      ("10", "W ∨ T", "Add", ["9"], "construct"),
      ("11", "(W ∨ T) ∧ Q", "Conj", ["10", "7"], "construct")],
     [("7", "expression", "¬Q"), ("8", "rule", "MP")]),
    ("L6P3", 6, ["D → A", "¬A", "¬D → B ∧ C"],
     [("4", "¬D", "MT", ["1", "2"], "extract"),
      ("5", "B ∧ C", "MP", ["3", "4"], "extract"),
      ("6", "B", "Simp", ["5"], "extract"),
      ("7", "B ∨ X", "Add", ["6"], "construct"),
      ("8", "C", "Simp", ["5"], "extract"),
      ("9", "(B ∨ X) ∧ C", "Conj", ["7", "8"], "construct")],
     [("5", "expression", "B ∨ C"), ("6", "rule", "DN")]),
    ("L6P4", 6, ["¬(P ∧ Q)", "¬P → T", "Q", "T → U ∧ V"],
     [("5", "¬P ∨ ¬Q", "DeM", ["1"], "transform"),
      ("6", "¬¬Q", "DN", ["3"], "transform"),
      ("7", "¬P", "DS", ["5", "6"], "extract"),
      ("8", "T", "MP", ["2", "7"], "extract"),
      ("9", "U ∧ V", "MP", ["4", "8"], "extract"),
      ("10", "U", "Simp", ["9"], "extract"),
      ("11", "U ∨ W", "Add", ["10"], "construct")],
     [("9", "expression", "U ∨ V"), ("10", "rule", "Conj")]),

    ("post-1", 7, ["A ∧ B", "B → C"],
     [("3", "B", "Simp", ["1"], "extract"),
      ("4", "C", "MP", ["2", "3"], "extract"),
      ("5", "C ∨ D", "Add", ["4"], "construct")], []),
    ("post-2", 7, ["P → Q", "Q → R", "P"],
     [("4", "Q", "MP", ["1", "3"], "extract"),
      ("5", "R", "MP", ["2", "4"], "extract"),
      ("6", "R ∧ P", "Conj", ["5", "3"], "construct")], []),
    ("post-3", 7, ["¬(A ∨ B)", "C → B"],
     [("3", "¬A ∧ ¬B", "DeM", ["1"], "transform"),
      ("4", "¬B", "Simp", ["3"], "extract"),
      ("5", "¬C", "MT", ["2", "4"], "extract"),
      ("6", "¬A", "Simp", ["3"], "extract"),
      ("7", "¬A ∧ ¬C", "Conj", ["6", "5"], "construct")], []),
    ("post-4", 7, ["P ∨ Q", "¬P", "Q → R ∧ S"],
     [("4", "Q", "DS", ["1", "2"], "extract"),
      ("5", "R ∧ S", "MP", ["3", "4"], "extract"),
      ("6", "S", "Simp", ["5"], "extract"),
      ("7", "S ∨ T", "Add", ["6"], "construct")], []),
    ("post-5", 7, ["A → B", "B → C", "¬C"],
     [("4", "A → C", "HS", ["1", "2"], "construct"),
      ("5", "¬A", "MT", ["4", "3"], "extract"),
      ("6", "¬A ∨ D", "Add", ["5"], "construct")], []),
    ("post-6", 7, ["¬P ∨ ¬Q", "R → P", "S → Q", "R"],
     [("5", "P", "MP", ["2", "4"], "extract"),
      ("6", "¬¬P", "DN", ["5"], "transform"),
      ("7", "¬Q", "DS", ["1", "6"], "extract"),
      ("8", "¬S", "MT", ["3", "7"], "extract"),
      ("9", "¬S ∨ U", "Add", ["8"], "construct")], []),
]


def flipped_variant(text: str) -> str | None:
    f = parse_formula(text)
    swap = {And: Or, Or: And, Implies: Iff, Iff: Implies}
    if isinstance(f, tuple(swap)):
        return format_formula(swap[type(f)](f.left, f.right))
    if isinstance(f, Not):
        return format_formula(f.child)
    return format_formula(Not(f))


def build(raw) -> dict:
    pid, level, givens, steps, bugs = raw
    n_steps = len(steps)
    derived = [s for s in steps[:-1]]
    conclusion = steps[-1][1]

    expert = [
        {"node_id": nid, "formula": text, "rule": rule, "parents": parents, "op_label": op}
        for nid, text, rule, parents, op in steps
    ]

    bug_dicts = []
    for target, kind, displayed in bugs:
        step = next(s for s in steps if s[0] == target)
        correct = step[1] if kind == "expression" else step[2]
        bug_dicts.append(
            {"target_node_id": target, "kind": kind, "displayed_value": displayed, "correct_value": correct}
        )

    training = 2 <= level <= 6
    chunks = []
    missing = []
    hints = {}
    if training:
        ids = [s[0] for s in derived]
        if len(ids) >= 2:
            half = (len(ids) + 1) // 2
            groups = [ids[:half], ids[half:]]
        else:
            groups = [ids]
        for i, members in enumerate(g for g in groups if g):
            subgoal = members[-1]
            sub_formula = next(s[1] for s in steps if s[0] == subgoal)
            chunks.append(
                {
                    "id": str(i + 1),
                    "member_node_ids": members,
                    "subgoal_node_id": subgoal,
                    "guidance_text": f"First work toward the subgoal {sub_formula}, then connect it onward.",
                }
            )
        missing = [s[0] for s in derived[0::2]] + [steps[-1][0]]
        for nid in missing:
            step = next(s for s in steps if s[0] == nid)
            rule = rule_by_id(step[2])
            parents = ", ".join(step[3])
            hints[nid] = f"Apply {rule.name} to node(s) {parents} to justify {step[1]}."

    freq = {}
    for i, (nid, text, rule, parents, op) in enumerate(steps):
        freq[format_formula(parse_formula(text))] = 30 - 3 * i
    variant = flipped_variant(steps[0][1])
    if variant and variant not in freq:
        freq[variant] = 2

    return {
        "id": pid,
        "level": level,
        "givens": givens,
        "conclusion": conclusion,
        "ref_time_seconds": 60.0 * n_steps,
        "expert_solution": expert,
        "bugs": bug_dicts,
        "chunks": chunks,
        "guided_missing": missing,
        "hints": hints,
        "node_frequency": freq,
    }


def main() -> int:
    OUT.mkdir(exist_ok=True)
    failures = 0
    for raw in PROBLEMS:
        data = build(raw)
        problem = problem_from_dict(data)
        diagnostics = validate_problem(problem)
        if diagnostics:
            failures += 1
            print(f"INVALID {problem.id}:")
            for d in diagnostics:
                print(f"  {d}")
            continue
        t0 = time.perf_counter()
        proof = find_proof(problem.givens, problem.conclusion, max_steps=len(problem.expert_solution) + 2)
        dt = time.perf_counter() - t0
        if proof is None or validate_proof(proof):
            failures += 1
            print(f"SEARCH FAILED {problem.id}")
            continue
        found = sum(1 for n in proof.nodes.values() if n.justification is not None)
        expert_len = len(problem.expert_solution)
        if found > expert_len + 2:
            failures += 1
            print(f"TOO LONG {problem.id}: found {found} vs expert {expert_len}")
            continue
        name = f"{problem.level}_{problem.id}.json"
        save_problem(problem, OUT / name)
        reloaded = load_problem(OUT / name)
        assert not validate_problem(reloaded)
        print(f"ok {problem.id}: steps={expert_len} search={found} ({dt*1000:.0f} ms)")
    print(f"{len(PROBLEMS) - failures}/{len(PROBLEMS)} problems written to {OUT}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
