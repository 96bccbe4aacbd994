"""Synthetic question bank with known per-attempt correctness."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .advantages import Group
from .errors import ConfigError, PreconditionError
from .reward_judge import TERNARY, RewardScheme, Verdict


@dataclass(frozen=True)
class Question:
    id: int
    p_true: float
    answerable: bool

    def __post_init__(self):
        if not 0.0 <= self.p_true <= 1.0:
            raise PreconditionError(f"p_true must lie in [0, 1], got {self.p_true}")
        if self.answerable != (self.p_true > 0.0):
            raise PreconditionError("a question is unanswerable exactly when p_true == 0")


@dataclass(frozen=True)
class BankSpec:
    """How to draw a question bank.

    Grid mode (``grid`` set): every grid value is repeated ``copies`` times,
    value-major. Distribution mode: ``n_questions`` questions, a
    ``unanswerable_fraction`` of them get ``p_true = 0`` and the rest draw
    ``p_true`` from ``uniform(low, high]`` or ``beta(beta_a, beta_b)``.
    """

    grid: tuple[float, ...] | None = None
    copies: int = 1
    n_questions: int = 0
    distribution: str = "uniform"
    low: float = 0.0
    high: float = 1.0
    beta_a: float = 1.0
    beta_b: float = 1.0
    unanswerable_fraction: float = 0.0

    def __post_init__(self):
        if self.grid is not None:
            object.__setattr__(self, "grid", tuple(float(p) for p in self.grid))

    def validate(self):
        if self.grid is not None:
            if not self.grid:
                raise ConfigError("bank.grid", "grid is empty")
            if any(not 0.0 <= p <= 1.0 for p in self.grid):
                raise ConfigError("bank.grid", "grid values must lie in [0, 1]")
            if self.copies < 1:
                raise ConfigError("bank.copies", "must be >= 1")
            return
        if self.n_questions < 1:
            raise ConfigError("bank.n_questions", "an empty bank was requested")
        if self.distribution not in ("uniform", "beta"):
            raise ConfigError("bank.distribution", f"unknown distribution {self.distribution!r}")
        if not 0.0 <= self.unanswerable_fraction <= 1.0:
            raise ConfigError("bank.unanswerable_fraction", "must lie in [0, 1]")
        if self.distribution == "uniform" and not 0.0 <= self.low < self.high <= 1.0:
            raise ConfigError("bank.low", "need 0 <= low < high <= 1")
        if self.distribution == "beta" and (self.beta_a <= 0 or self.beta_b <= 0):
            raise ConfigError("bank.beta_a", "beta parameters must be positive")


@dataclass(frozen=True)
class QuestionBank:
    questions: tuple[Question, ...]
    spec: BankSpec
    seed: int

    def __len__(self):
        return len(self.questions)

    def __iter__(self):
        return iter(self.questions)

    def __getitem__(self, i):
        return self.questions[i]

    @property
    def p_true(self) -> np.ndarray:
        return np.array([q.p_true for q in self.questions])

    @property
    def answerable(self) -> np.ndarray:
        return np.array([q.answerable for q in self.questions])

    def to_json(self) -> dict:
        return {"seed": self.seed, "questions": [asdict(q) for q in self.questions]}

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")

    @classmethod
    def from_json(cls, data: dict, spec: BankSpec | None = None) -> "QuestionBank":
        questions = tuple(
            Question(int(q["id"]), float(q["p_true"]), bool(q["answerable"])) for q in data["questions"]
        )
        if [q.id for q in questions] != list(range(len(questions))):
            raise ConfigError("questions", "ids must be unique and dense from 0")
        return cls(questions, spec or BankSpec(grid=tuple(q.p_true for q in questions)), int(data["seed"]))

    @classmethod
    def load(cls, path) -> "QuestionBank":
        return cls.from_json(json.loads(Path(path).read_text()))


def build_bank(spec: BankSpec, seed: int = 0) -> QuestionBank:
    spec.validate()
    if spec.grid is not None:
        p_values = [p for p in spec.grid for _ in range(spec.copies)]
    else:
        rng = np.random.default_rng(seed)
        n = spec.n_questions
        n_unanswerable = int(round(spec.unanswerable_fraction * n))
        unanswerable = np.zeros(n, dtype=bool)
        unanswerable[rng.permutation(n)[:n_unanswerable]] = True
        if spec.distribution == "uniform":
            # high - (high - low) * U lies in (low, high], so answerable draws are never 0
            draws = spec.high - (spec.high - spec.low) * rng.random(n)
        else:
            draws = np.maximum(rng.beta(spec.beta_a, spec.beta_b, n), np.finfo(float).tiny)
        p_values = np.where(unanswerable, 0.0, draws).tolist()
    questions = tuple(Question(i, float(p), p > 0.0) for i, p in enumerate(p_values))
    return QuestionBank(questions, spec, seed)


def sample_verdicts(p_true: float, abstain_prob: float, G: int, rng: np.random.Generator) -> np.ndarray:
    if G < 2:
        raise PreconditionError(f"group size must be >= 2, got {G}")
    if not 0.0 <= abstain_prob <= 1.0:
        raise PreconditionError(f"abstain_prob must lie in [0, 1], got {abstain_prob}")
    u = rng.random((2, G))
    abstain = u[0] < abstain_prob
    correct = u[1] < p_true
    return np.where(abstain, Verdict.ABSTAIN, np.where(correct, Verdict.CORRECT, Verdict.WRONG)).astype(np.int8)


def sample_group(question: Question, abstain_prob: float, G: int, rng: np.random.Generator,
                 scheme: RewardScheme = TERNARY) -> Group:
    """Draw ``G`` independent decisions for ``question`` from a policy abstaining w.p. ``abstain_prob``."""
    return Group.from_verdicts(sample_verdicts(question.p_true, abstain_prob, G, rng), scheme)
