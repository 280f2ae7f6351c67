import pytest
from hypothesis import given, strategies as st

from logictutor.formula import (
    And,
    Atom,
    Iff,
    Implies,
    Not,
    Or,
    ParseError,
    atoms,
    entails,
    enumerate_formulas,
    evaluate,
    format_formula,
    parse_formula,
)


def test_parse_ascii_conjunction_with_negation():
    assert parse_formula("G & -H") == And(Atom("G"), Not(Atom("H")))


def test_parse_single_atom():
    assert parse_formula("A") == Atom("A")


def test_parse_ascii_disjunction():
    assert parse_formula("J | K") == Or(Atom("J"), Atom("K"))


def test_parse_unicode_and_ascii_agree():
    pairs = [
        ("¬A", "~A"),
        ("A ∧ B", "A & B"),
        ("A ∨ B", "A | B"),
        ("A → B", "A -> B"),
        ("A ↔ B", "A <-> B"),
        ("G ∧ ¬H", "G & -H"),
        ("G ∧ −H", "G & ~H"),
    ]
    for unicode_text, ascii_text in pairs:
        assert parse_formula(unicode_text) == parse_formula(ascii_text)


@pytest.mark.parametrize(
    "text,expected",
    [
        ("A & B | C", Or(And(Atom("A"), Atom("B")), Atom("C"))),
        ("A | B -> C", Implies(Or(Atom("A"), Atom("B")), Atom("C"))),
        ("A -> B <-> C", Iff(Implies(Atom("A"), Atom("B")), Atom("C"))),
        ("-A & B", And(Not(Atom("A")), Atom("B"))),
        ("A -> B -> C", Implies(Atom("A"), Implies(Atom("B"), Atom("C")))),
        ("A & B & C", And(And(Atom("A"), Atom("B")), Atom("C"))),
        ("(A | B) & C", And(Or(Atom("A"), Atom("B")), Atom("C"))),
        ("--A", Not(Not(Atom("A")))),
    ],
)
def test_precedence_and_associativity(text, expected):
    assert parse_formula(text) == expected


@pytest.mark.parametrize("bad", ["", "A &", "& A", "(A", "A)", "a", "A B", "A <- B", "A ->", "P & & Q"])
def test_parse_errors_carry_position(bad):
    with pytest.raises(ParseError) as exc:
        parse_formula(bad)
    assert exc.value.position >= 0


def test_parse_error_mentions_expectation():
    with pytest.raises(ParseError, match="expected"):
        parse_formula("A &")


def test_format_canonical_unicode():
    assert format_formula(And(Atom("G"), Not(Atom("H")))) == "G ∧ ¬H"
    assert format_formula(Atom("F")) == "F"
    assert format_formula(Or(Atom("J"), Atom("K"))) == "J ∨ K"


def test_format_disambiguates_nesting():
    assert format_formula(Implies(Implies(Atom("A"), Atom("B")), Atom("C"))) == "(A → B) → C"
    assert format_formula(Implies(Atom("A"), Implies(Atom("B"), Atom("C")))) == "A → B → C"
    assert format_formula(And(Atom("A"), Or(Atom("B"), Atom("C")))) == "A ∧ (B ∨ C)"
    assert format_formula(Not(And(Atom("A"), Atom("B")))) == "¬(A ∧ B)"
    assert format_formula(And(And(Atom("A"), Atom("B")), Atom("C"))) == "A ∧ B ∧ C"
    assert format_formula(And(Atom("A"), And(Atom("B"), Atom("C")))) == "A ∧ (B ∧ C)"


def test_roundtrip_exhaustive_depth2_two_atoms():
    for f in enumerate_formulas(["P", "Q"], 2):
        assert parse_formula(format_formula(f)) == f


def _formula_strategy(names="PQRS", max_depth=4):
    leaves = st.sampled_from([Atom(n) for n in names])

    def extend(children):
        return st.one_of(
            children.map(Not),
            st.tuples(children, children).map(lambda t: And(*t)),
            st.tuples(children, children).map(lambda t: Or(*t)),
            st.tuples(children, children).map(lambda t: Implies(*t)),
            st.tuples(children, children).map(lambda t: Iff(*t)),
        )

    return st.recursive(leaves, extend, max_leaves=2**max_depth)


@given(_formula_strategy())
def test_roundtrip_property(f):
    assert parse_formula(format_formula(f)) == f


def test_atoms_and_evaluate():
    f = parse_formula("(P -> Q) & -R")
    assert atoms(f) == frozenset({"P", "Q", "R"})
    assert evaluate(f, {"P": False, "Q": False, "R": False}) is True
    assert evaluate(f, {"P": True, "Q": False, "R": False}) is False
    assert evaluate(f, {"P": True, "Q": True, "R": True}) is False


def test_entails_basics():
    p, q = Atom("P"), Atom("Q")
    assert entails([Implies(p, q), p], q)
    assert not entails([Or(p, q)], p)
    assert entails([], Or(p, Not(p)))


def test_enumerate_counts():
    assert len(enumerate_formulas(["P", "Q", "R"], 0)) == 3
    assert len(enumerate_formulas(["P", "Q", "R"], 1)) == 42
    assert len(enumerate_formulas(["P", "Q", "R"], 2)) == 7101
