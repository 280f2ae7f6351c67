import pytest

from logictutor.formula import ParseError, format_formula
from logictutor.problem import BugKind, ProblemMode, load_problem_dir
from logictutor.proof import NodeKind, validate_proof
from logictutor.rules import StepErrorKind
from logictutor.session import (
    AlreadyJustified,
    CannotDeleteGiven,
    Color,
    FixOutcome,
    GivenImmutable,
    HasDependents,
    HintQuotaExceeded,
    HintsDisabled,
    MissingPayload,
    ActionNotAvailable,
    UnknownNodeError,
    start_problem,
)

PROBLEMS = load_problem_dir("problems")


def _ps(pid="L4P1", hints=True):
    return start_problem(PROBLEMS[pid], ProblemMode.PS, at=1000, hints_allowed=hints)


# -- start states ------------------------------------------------------------


def test_ps_start_shows_givens_and_conclusion_only():
    s = _ps()
    problem = PROBLEMS["L4P1"]
    assert len(s.graph.nodes) == len(problem.givens) + 1
    conclusion = s.graph.nodes[s.graph.conclusion_id]
    assert conclusion.kind is NodeKind.CONCLUSION
    assert conclusion.justification is None
    assert all(s.node_status[g].color is Color.PURPLE for g in problem.given_ids)
    assert s.node_status[conclusion.id].color is Color.PURPLE


def test_we_start_has_cursor_zero_and_no_derived():
    s = start_problem(PROBLEMS["L2P1"], ProblemMode.WE, at=0)
    assert s.we_cursor == 0
    assert all(n.kind is not NodeKind.DERIVED for n in s.graph.nodes.values())


def test_buggy_start_differs_from_expert_exactly_at_bugs():
    problem = PROBLEMS["L3P1"]
    s = start_problem(problem, ProblemMode.BUGGY, at=0)
    expert = problem.expert_graph()
    diffs = set()
    for nid, node in s.graph.nodes.items():
        if node.formula != expert.nodes[nid].formula:
            diffs.add((nid, "expression"))
        ours = node.justification
        theirs = expert.nodes[nid].justification
        if (ours.rule_id if ours else None) != (theirs.rule_id if theirs else None):
            diffs.add((nid, "rule"))
    assert diffs == {(b.target_node_id, b.kind.value) for b in problem.bugs}
    for nid, node in s.graph.nodes.items():
        expected = Color.PURPLE if node.kind is NodeKind.GIVEN else Color.GRAY
        assert s.node_status[nid].color is expected


def test_buggy_requires_payload():
    with pytest.raises(MissingPayload):
        start_problem(PROBLEMS["post-1"], ProblemMode.BUGGY, at=0)


def test_guided_start_marks_missing_and_subgoals():
    problem = PROBLEMS["L4P1"]
    s = start_problem(problem, ProblemMode.GUIDED, at=0)
    missing = set(problem.missing_justifications())
    for nid, node in s.graph.nodes.items():
        if node.kind is NodeKind.GIVEN:
            continue
        assert (node.justification is None) == (nid in missing)
    subgoals = {c.subgoal_node_id for c in problem.chunks}
    for nid in subgoals:
        assert s.node_status[nid].color is Color.CYAN


# -- problem solving ---------------------------------------------------------


def test_ps_valid_step_adds_node_and_counts():
    s = _ps()
    result = s.submit_step("Simp", ["1"], "A", at=2000)
    assert result.ok
    assert s.correct_steps == 1
    new = [n for n in s.graph.nodes.values() if n.kind is NodeKind.DERIVED]
    assert len(new) == 1 and new[0].formula == PROBLEMS["L4P1"].givens[0].left


def test_ps_node_color_follows_frequency():
    s = _ps()
    s.submit_step("Simp", ["1"], "A", at=0)  # frequent statement: green
    node_id = next(n.id for n in s.graph.nodes.values() if n.kind is NodeKind.DERIVED)
    assert s.node_status[node_id].color is Color.GREEN
    # a correct but never-seen statement gets gray
    s.submit_step("Add", [node_id], "A | Q", at=0)
    fresh = [n for n in s.graph.nodes.values() if n.kind is NodeKind.DERIVED and n.id != node_id]
    assert s.node_status[fresh[0].id].color is Color.GRAY


def test_ps_invalid_step_keeps_graph_and_counts_incorrect():
    s = _ps()
    before = set(s.graph.nodes)
    result = s.submit_step("Simp", ["2"], "A", at=0)  # given 2 is an implication
    assert not result.ok
    assert result.error.kind is StepErrorKind.WRONG_RULE_SHAPE
    assert "Simplification" in result.error.message
    assert set(s.graph.nodes) == before
    assert (s.correct_steps, s.incorrect_steps) == (0, 1)


def test_ps_parse_error_changes_nothing():
    s = _ps()
    with pytest.raises(ParseError):
        s.submit_step("Simp", ["1"], "A &&", at=0)
    assert (s.correct_steps, s.incorrect_steps) == (0, 0)


def test_ps_deriving_conclusion_finishes():
    s = _ps("intro-1")
    result = s.submit_step("MP", ["2", "1"], "Q", at=9000)
    assert result.ok
    assert s.finished and s.ended_at == 9000
    conclusion = s.graph.nodes[s.graph.conclusion_id]
    assert conclusion.justification is not None
    assert validate_proof(s.graph) == []


def test_ps_delete_leaf_and_given_rules():
    s = _ps()
    s.submit_step("Simp", ["1"], "A", at=0)
    node_id = next(n.id for n in s.graph.nodes.values() if n.kind is NodeKind.DERIVED)
    with pytest.raises(CannotDeleteGiven):
        s.delete_node("1")
    removed = s.delete_node(node_id)
    assert removed == [node_id]
    assert node_id not in s.graph.nodes
    assert (s.correct_steps, s.incorrect_steps) == (1, 0)


def test_ps_delete_cascade_removes_descendants():
    s = _ps()
    s.submit_step("Simp", ["1"], "A", at=0)
    first = sorted(n.id for n in s.graph.nodes.values() if n.kind is NodeKind.DERIVED)[0]
    s.submit_step("Add", [first], "A | B", at=0)
    with pytest.raises(HasDependents):
        s.delete_node(first)
    removed = s.delete_node(first, cascade=True)
    assert len(removed) == 2
    assert all(n.kind is not NodeKind.DERIVED for n in s.graph.nodes.values())


def test_ps_hint_sequence_and_quota():
    s = _ps("L2P1")
    first = s.request_hint()
    assert first.rule_id == "Simp" and first.formula == "¬H"
    for _ in range(3):
        s.request_hint()
    assert s.hints_used == 4
    with pytest.raises(HintQuotaExceeded):
        s.request_hint()
    assert s.hints_used == 4


def test_ps_hint_suggestion_passes_check_step():
    from logictutor.rules import check_step, rule_by_id
    from logictutor.formula import parse_formula

    s = _ps("L4P1")
    s.submit_step("Simp", ["1"], "A", at=0)
    hint = s.request_hint()
    premises = [s.graph.nodes[p].formula for p in hint.parent_ids]
    assert check_step(rule_by_id(hint.rule_id), premises, parse_formula(hint.formula)).ok


def test_hints_disabled_in_tests():
    s = _ps("post-1", hints=False)
    with pytest.raises(HintsDisabled):
        s.request_hint()


def test_ps_rejects_other_mode_ops():
    s = _ps()
    with pytest.raises(ActionNotAvailable):
        s.next_step()
    with pytest.raises(ActionNotAvailable):
        s.justify("8", "Conj", ["6", "7"])
    with pytest.raises(ActionNotAvailable):
        s.submit_fix("8", BugKind.RULE, "Conj")
    with pytest.raises(UnknownNodeError):
        s.submit_step("Simp", ["404"], "A")


# -- worked example ----------------------------------------------------------


def test_we_walkthrough_and_clamps():
    problem = PROBLEMS["L2P1"]
    s = start_problem(problem, ProblemMode.WE, at=0)
    s.prev_step()
    assert s.we_cursor == 0
    s.next_step()
    assert s.we_cursor == 1
    step = problem.expert_solution[0]
    assert s.graph.nodes[step.node_id].justification is not None
    s.prev_step()
    assert s.we_cursor == 0 and step.node_id not in s.graph.nodes
    for _ in range(len(problem.expert_solution)):
        s.next_step()
    assert not s.finished
    s.next_step(at=777)
    assert s.finished and s.ended_at == 777
    assert validate_proof(s.graph) == []
    assert (s.correct_steps, s.incorrect_steps) == (0, 0)


def test_we_delete_not_available():
    s = start_problem(PROBLEMS["L2P1"], ProblemMode.WE, at=0)
    with pytest.raises(ActionNotAvailable):
        s.delete_node("1")
    with pytest.raises(ActionNotAvailable):
        s.request_hint()


# -- buggy example -----------------------------------------------------------


def test_buggy_node_options():
    problem = PROBLEMS["L2P1"]
    s = start_problem(problem, ProblemMode.BUGGY, at=0)
    assert s.node_options("2") == ["Edit Expression", "Edit Rule Name"]
    assert s.node_options(s.graph.conclusion_id) == ["Edit Expression", "Edit Rule Name"]
    with pytest.raises(GivenImmutable):
        s.node_options("1")


def test_buggy_fix_protocol_and_roundtrip():
    problem = PROBLEMS["L2P1"]
    s = start_problem(problem, ProblemMode.BUGGY, at=0)
    expr_bug = next(b for b in problem.bugs if b.kind is BugKind.EXPRESSION)
    rule_bug = next(b for b in problem.bugs if b.kind is BugKind.RULE)

    assert s.submit_fix(expr_bug.target_node_id, BugKind.EXPRESSION, "G") is FixOutcome.INCORRECT
    assert s.incorrect_steps == 1
    assert s.submit_fix(expr_bug.target_node_id, BugKind.EXPRESSION, expr_bug.correct_value) is FixOutcome.CORRECTED
    # expression fixed, rule on the same node still bugged: stays gray
    assert s.node_status[expr_bug.target_node_id].color is Color.GRAY
    assert s.submit_fix(expr_bug.target_node_id, BugKind.EXPRESSION, expr_bug.correct_value) is FixOutcome.ALREADY_CORRECT
    assert s.submit_fix(rule_bug.target_node_id, BugKind.RULE, rule_bug.correct_value, at=5555) is FixOutcome.CORRECTED
    assert s.finished and s.ended_at == 5555
    for node in s.graph.nodes.values():
        if node.kind is not NodeKind.GIVEN:
            assert s.node_status[node.id].color is Color.GREEN
    assert validate_proof(s.graph) == []
    assert (s.correct_steps, s.incorrect_steps) == (2, 1)


def test_buggy_fix_on_unbugged_node_reports_already_correct():
    problem = PROBLEMS["L4P1"]
    s = start_problem(problem, ProblemMode.BUGGY, at=0)
    bugged = {b.target_node_id for b in problem.bugs}
    clean = next(
        n.id for n in s.graph.nodes.values() if n.kind is not NodeKind.GIVEN and n.id not in bugged
    )
    value = format_formula(s.graph.nodes[clean].formula)
    assert s.submit_fix(clean, BugKind.EXPRESSION, value) is FixOutcome.ALREADY_CORRECT
    assert (s.correct_steps, s.incorrect_steps) == (0, 0)


def test_buggy_given_fix_rejected():
    s = start_problem(PROBLEMS["L2P1"], ProblemMode.BUGGY, at=0)
    with pytest.raises(GivenImmutable):
        s.submit_fix("1", BugKind.EXPRESSION, "G")


# -- guided example ----------------------------------------------------------


def test_guided_justify_correct_and_wrong():
    problem = PROBLEMS["L2P1"]
    s = start_problem(problem, ProblemMode.GUIDED, at=0)
    missing = problem.missing_justifications()
    assert len(missing) >= 2
    node = missing[0]
    step = problem.expert_step_for(node)
    wrong = s.justify(node, "Conj" if step.rule_id != "Conj" else "Simp", list(step.parent_ids))
    assert not wrong.ok
    assert s.incorrect_steps == 1
    ok = s.justify(node, step.rule_id, list(step.parent_ids))
    assert ok.ok
    assert not s.finished
    assert s.node_status[node].color is Color.GREEN
    with pytest.raises(AlreadyJustified):
        s.justify(node, step.rule_id, list(step.parent_ids))


def test_guided_finishes_when_all_justified():
    problem = PROBLEMS["L3P1"]
    s = start_problem(problem, ProblemMode.GUIDED, at=0)
    for node in problem.missing_justifications():
        step = problem.expert_step_for(node)
        assert s.justify(node, step.rule_id, list(step.parent_ids), at=42).ok
    assert s.finished
    assert validate_proof(s.graph) == []


def test_guided_hints_authored_generated_and_unknown():
    problem = PROBLEMS["L4P1"]
    s = start_problem(problem, ProblemMode.GUIDED, at=0)
    authored_node = next(iter(problem.hint_texts))
    assert s.node_hint(authored_node).text == problem.hint_texts[authored_node]
    plain = next(
        step.node_id for step in problem.expert_solution if step.node_id not in problem.hint_texts
    )
    generated = s.node_hint(plain)
    assert "Apply" in generated.text
    with pytest.raises(UnknownNodeError):
        s.node_hint("404")
    # hints never count against a quota in guided mode
    for _ in range(10):
        s.node_hint(authored_node)
    assert s.hints_used == 0


def test_guided_cycle_rejected_and_counted():
    problem = PROBLEMS["L2P4"]  # has a De Morgan step
    s = start_problem(problem, ProblemMode.GUIDED, at=0)
    # node 3 (¬P ∨ ¬Q) comes from 1; justifying 1's... the graph has no
    # unjustified pair, so force one: justify 3 from 4 won't cycle; instead
    # check self-parent rejection.
    node = problem.missing_justifications()[0]
    step = problem.expert_step_for(node)
    result = s.justify(node, step.rule_id, [node])
    assert not result.ok
    assert result.error.kind is StepErrorKind.CYCLE
    assert s.incorrect_steps == 1


def test_counters_equal_attempt_ops_across_modes():
    problem = PROBLEMS["L2P1"]
    s = start_problem(problem, ProblemMode.BUGGY, at=0)
    attempts = 0
    for bug in problem.bugs:
        if s.submit_fix(bug.target_node_id, bug.kind, bug.correct_value) is not FixOutcome.ALREADY_CORRECT:
            attempts += 1
    assert s.correct_steps + s.incorrect_steps == attempts
