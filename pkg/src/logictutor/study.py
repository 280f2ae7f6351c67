"""Curriculum structure, condition assignment, and section policies.

The tutor runs four ordered sections: a two-problem introduction, a
two-problem pretest, five training levels of four problems each (levels
2-6), and a six-problem posttest (level 7). Students are assigned to one of
three training conditions after the pretest by stratified randomization on a
median split of pretest scores.
"""

from __future__ import annotations

import hashlib
import json
import random
import statistics
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from .problem import ProblemDefinition, ProblemMode

__all__ = [
    "Section",
    "SectionPolicy",
    "section_for_level",
    "test_mode_policy",
    "Condition",
    "CONDITIONS",
    "condition_by_tag",
    "StudentRecord",
    "assign_conditions",
    "select_training_mode",
    "student_rng",
    "median_threshold",
    "Curriculum",
    "CurriculumError",
    "save_manifest",
    "load_manifest",
]


class Section(str, Enum):
    INTRO = "intro"
    PRETEST = "pretest"
    TRAINING = "training"
    POSTTEST = "posttest"


INTRO_LEVEL = 0
PRETEST_LEVEL = 1
TRAINING_LEVELS = (2, 3, 4, 5, 6)
POSTTEST_LEVEL = 7

_SECTION_SIZES = {Section.INTRO: 2, Section.PRETEST: 2, Section.POSTTEST: 6}
_TRAINING_SIZE = 4


def section_for_level(level: int) -> Section:
    if level == INTRO_LEVEL:
        return Section.INTRO
    if level == PRETEST_LEVEL:
        return Section.PRETEST
    if level in TRAINING_LEVELS:
        return Section.TRAINING
    if level == POSTTEST_LEVEL:
        return Section.POSTTEST
    raise ValueError(f"no section for level {level}")


@dataclass(frozen=True, slots=True)
class SectionPolicy:
    section: Section
    hints_enabled: bool
    error_feedback: bool
    scored: bool


def test_mode_policy(section: Section) -> SectionPolicy:
    """Hint and feedback policy per section.

    Test sections (pretest/posttest) offer no next-step hints but keep
    immediate error feedback; the introduction is unscored practice.
    """
    if section in (Section.PRETEST, Section.POSTTEST):
        return SectionPolicy(section, hints_enabled=False, error_feedback=True, scored=True)
    if section is Section.INTRO:
        return SectionPolicy(section, hints_enabled=True, error_feedback=True, scored=False)
    return SectionPolicy(section, hints_enabled=True, error_feedback=True, scored=True)


@dataclass(frozen=True, slots=True)
class Condition:
    tag: str
    training_pool: tuple[ProblemMode, ProblemMode]


CONDITIONS: tuple[Condition, ...] = (
    Condition("Control", (ProblemMode.PS, ProblemMode.WE)),
    Condition("Buggy", (ProblemMode.PS, ProblemMode.BUGGY)),
    Condition("Guided", (ProblemMode.PS, ProblemMode.GUIDED)),
)

_CONDITION_BY_TAG = {c.tag: c for c in CONDITIONS}


def condition_by_tag(tag: str) -> Condition:
    try:
        return _CONDITION_BY_TAG[tag]
    except KeyError:
        raise ValueError(f"unknown condition {tag!r}") from None


@dataclass(slots=True)
class StudentRecord:
    student_id: str
    pretest_score: float
    condition: str | None = None
    rng_seed: int = 0


def median_threshold(scores: Sequence[float]) -> float:
    return float(statistics.median(scores))


def assign_conditions(scores: Mapping[str, float], seed: int) -> dict[str, str]:
    """Stratified random assignment to the three conditions.

    Students are split at the median pretest score (scores equal to the
    median go to the low stratum); each stratum is shuffled and dealt
    round-robin over a seed-shuffled condition order, so per-stratum group
    sizes differ by at most one. Deterministic for a given seed.
    """
    if not scores:
        return {}
    threshold = median_threshold(list(scores.values()))
    rng = random.Random(seed)
    order = [c.tag for c in CONDITIONS]
    assignment: dict[str, str] = {}
    low = sorted(s for s in scores if scores[s] <= threshold)
    high = sorted(s for s in scores if scores[s] > threshold)
    for stratum in (low, high):
        rng.shuffle(stratum)
        tags = list(order)
        rng.shuffle(tags)
        for i, student in enumerate(stratum):
            assignment[student] = tags[i % len(tags)]
    return assignment


def select_training_mode(condition: Condition | str, rng: random.Random) -> ProblemMode:
    """Uniform draw from the condition's two-mode training pool."""
    if isinstance(condition, str):
        condition = condition_by_tag(condition)
    return rng.choice(list(condition.training_pool))


def student_rng(global_seed: int, student_id: str) -> random.Random:
    """Independent, replayable random stream for one student."""
    digest = hashlib.sha256(f"{global_seed}:{student_id}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


class CurriculumError(ValueError):
    pass


@dataclass(slots=True)
class Curriculum:
    """Problem ids grouped by level, with the fixed section sizes enforced."""

    by_level: dict[int, list[str]]

    @staticmethod
    def from_problems(problems: Mapping[str, ProblemDefinition]) -> "Curriculum":
        by_level: dict[int, list[str]] = {}
        for problem in problems.values():
            by_level.setdefault(problem.level, []).append(problem.id)
        for level in by_level:
            by_level[level].sort()
        curriculum = Curriculum(by_level)
        curriculum.check()
        return curriculum

    def check(self) -> None:
        expected = {INTRO_LEVEL: 2, PRETEST_LEVEL: 2, POSTTEST_LEVEL: 6}
        expected.update({lvl: _TRAINING_SIZE for lvl in TRAINING_LEVELS})
        for level, count in expected.items():
            have = len(self.by_level.get(level, []))
            if have != count:
                raise CurriculumError(f"level {level} must have {count} problems, found {have}")
        extra = set(self.by_level) - set(expected)
        if extra:
            raise CurriculumError(f"unexpected levels: {sorted(extra)}")

    def levels(self) -> list[int]:
        return sorted(self.by_level)

    def problems_for(self, section: Section) -> list[str]:
        if section is Section.INTRO:
            return list(self.by_level[INTRO_LEVEL])
        if section is Section.PRETEST:
            return list(self.by_level[PRETEST_LEVEL])
        if section is Section.POSTTEST:
            return list(self.by_level[POSTTEST_LEVEL])
        return [pid for lvl in TRAINING_LEVELS for pid in self.by_level[lvl]]


def save_manifest(records: Sequence[StudentRecord], seed: int, path: str | Path) -> None:
    data = {
        "seed": seed,
        "students": [
            {
                "student_id": r.student_id,
                "pretest_score": r.pretest_score,
                "condition": r.condition,
                "rng_seed": r.rng_seed,
            }
            for r in records
        ],
    }
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_manifest(path: str | Path) -> tuple[int, list[StudentRecord]]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    records = [
        StudentRecord(
            student_id=raw["student_id"],
            pretest_score=float(raw["pretest_score"]),
            condition=raw.get("condition"),
            rng_seed=int(raw.get("rng_seed", 0)),
        )
        for raw in data["students"]
    ]
    return int(data["seed"]), records
