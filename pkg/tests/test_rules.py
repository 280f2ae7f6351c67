import itertools

import pytest

from logictutor.formula import And, Atom, Implies, Not, Or, entails, enumerate_formulas, parse_formula
from logictutor.rules import (
    RULES,
    StepErrorKind,
    UnknownRuleError,
    check_step,
    rule_by_id,
)

from _oracles import oracle_accepts, oracle_fits

P, Q, R = Atom("P"), Atom("Q"), Atom("R")


def test_registry_ids_unique_and_arities_legal():
    ids = [r.id for r in RULES]
    assert len(ids) == len(set(ids))
    assert all(r.arity in (1, 2) for r in RULES)
    assert all(r.description for r in RULES)


def test_rule_lookup_case_insensitive():
    assert rule_by_id("simp").id == "Simp"
    assert rule_by_id(" MP ").id == "MP"
    with pytest.raises(UnknownRuleError):
        rule_by_id("Resolution")


def test_simplification_accepts_component():
    premise = parse_formula("G & -H")
    assert check_step(rule_by_id("Simp"), [premise], parse_formula("-H")).ok
    assert check_step(rule_by_id("Simp"), [premise], parse_formula("G")).ok


def test_simplification_rejects_disjunction():
    result = check_step(rule_by_id("Simp"), [parse_formula("J | K")], parse_formula("J"))
    assert not result.ok
    assert result.error.kind is StepErrorKind.WRONG_RULE_SHAPE


def test_modus_ponens_canonical():
    assert check_step(rule_by_id("MP"), [P, Implies(P, Q)], Q).ok
    assert check_step(rule_by_id("MP"), [Implies(P, Q), P], Q).ok


def test_wrong_candidate_is_wrong_derived_statement():
    result = check_step(rule_by_id("MP"), [Implies(P, Q), P], R)
    assert not result.ok
    assert result.error.kind is StepErrorKind.WRONG_DERIVED_STATEMENT


def test_arity_mismatch_reported_not_raised():
    result = check_step(rule_by_id("MP"), [P], Q)
    assert not result.ok
    assert result.error.kind is StepErrorKind.PARENT_ARITY_MISMATCH


def test_error_messages_name_the_rule():
    result = check_step(rule_by_id("Simp"), [Or(P, Q)], P)
    assert "Simplification" in result.error.message


@pytest.mark.parametrize(
    "rule_id,premises,candidate,ok",
    [
        ("MT", ["P -> Q", "-Q"], "-P", True),
        ("MT", ["-Q", "P -> Q"], "-P", True),
        ("DS", ["P | Q", "-P"], "Q", True),
        ("DS", ["P | Q", "-Q"], "P", True),
        ("DS", ["P | Q", "P"], "Q", False),
        ("HS", ["P -> Q", "Q -> R"], "P -> R", True),
        ("HS", ["Q -> R", "P -> Q"], "P -> R", True),
        ("Conj", ["P", "Q"], "P & Q", True),
        ("Conj", ["P", "Q"], "Q & P", True),
        ("Conj", ["P", "Q"], "P | Q", False),
        ("Add", ["P"], "P | R", True),
        ("Add", ["P"], "R | P", True),
        ("Add", ["P"], "P & R", False),
        ("DeM", ["-(P & Q)"], "-P | -Q", True),
        ("DeM", ["-(P | Q)"], "-P & -Q", True),
        ("DeM", ["-P | -Q"], "-(P & Q)", True),
        ("DeM", ["-P & -Q"], "-(P | Q)", True),
        ("DeM", ["P & Q"], "-(-P | -Q)", False),
        ("DN", ["P"], "--P", True),
        ("DN", ["--P"], "P", True),
        ("DN", ["-P"], "P", False),
        ("Contra", ["P -> Q"], "-Q -> -P", True),
        ("Contra", ["-P -> -Q"], "Q -> P", True),
        ("Contra", ["P -> Q"], "Q -> P", False),
    ],
)
def test_individual_rule_cases(rule_id, premises, candidate, ok):
    parsed = [parse_formula(p) for p in premises]
    assert check_step(rule_by_id(rule_id), parsed, parse_formula(candidate)).ok is ok


def test_deterministic_and_pure():
    premises = [parse_formula("P -> Q"), P]
    before = [p for p in premises]
    first = check_step(rule_by_id("MP"), premises, Q)
    second = check_step(rule_by_id("MP"), premises, Q)
    assert first == second
    assert premises == before


def _small_universe():
    return enumerate_formulas(["P", "Q", "R"], 1)


def test_agreement_with_oracle_depth1():
    """Every rule, every premise tuple and candidate over the depth-1 universe."""
    universe = _small_universe()
    for rule in RULES:
        tuples = (
            [(f,) for f in universe]
            if rule.arity == 1
            else [(a, b) for a in universe for b in universe]
        )
        for premises in tuples:
            fits = oracle_fits(rule.id, premises)
            for candidate in universe:
                expected = oracle_accepts(rule.id, premises, candidate)
                result = check_step(rule, list(premises), candidate)
                assert result.ok is expected, (rule.id, premises, candidate)
                if not result.ok:
                    expected_kind = (
                        StepErrorKind.WRONG_DERIVED_STATEMENT if fits else StepErrorKind.WRONG_RULE_SHAPE
                    )
                    assert result.error.kind is expected_kind, (rule.id, premises, candidate)


def test_accepted_steps_are_semantically_sound_depth1():
    universe = _small_universe()
    for rule in RULES:
        tuples = (
            [(f,) for f in universe]
            if rule.arity == 1
            else [(a, b) for a, b in itertools.combinations_with_replacement(universe, 2)]
        )
        for premises in tuples:
            for candidate in universe:
                if check_step(rule, list(premises), candidate).ok:
                    assert entails(list(premises), candidate), (rule.id, premises, candidate)
