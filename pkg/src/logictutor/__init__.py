"""Propositional-logic proof tutor.

A library for multi-step proof practice: a formula parser and rule engine,
proof graphs with validation and search, four problem presentations
(independent solving, worked examples, bug fixing, guided reconstruction),
study machinery (curriculum, stratified assignment, interaction logging),
and an analysis pipeline (first-order Markov transition models, rank-based
statistics, DOT diagram export). An HTTP service and a CLI sit on top.
"""

from .formula import (
    And,
    Atom,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    ParseError,
    format_formula,
    parse_formula,
)
from .rules import RULES, Rule, StepErrorKind, VerificationResult, check_step, rule_by_id
from .proof import Justification, NodeKind, ProofGraph, ProofNode, find_proof, validate_proof
from .problem import (
    Bug,
    BugKind,
    Chunk,
    ExpertStep,
    ProblemDefinition,
    ProblemMode,
    load_problem,
    load_problem_dir,
    perturb_solution,
    save_problem,
    validate_problem_file,
)
from .session import FixOutcome, HintText, SessionState, start_problem
from .scoring import ProblemMetrics, ScoreBaselines, aggregate_scores, problem_score, rule_accuracy
from .events import Action, EventLog, EventRecord, read_events
from .study import Curriculum, Section, StudentRecord, assign_conditions, select_training_mode, test_mode_policy
from .markov import TransitionMatrix, build_transitions, export_transition_dot
from .stats import bonferroni_alpha, bootstrap_ci_a, mann_whitney_u, median_split, vargha_delaney_a
from .replay import replay_log, replay_session
from .simulate import BotPolicy, simulate_cohort
from .analysis import compare_groups, run_analysis

__version__ = "0.1.0"
