"""Abstention F1 / recall / precision and accuracy over evaluation samples."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import PreconditionError

# How abstentions on answerable questions enter the accuracy denominator.
ACCURACY_ALL_ANSWERABLE = "all_answerable"
ACCURACY_ATTEMPTED_ONLY = "attempted_only"


@dataclass(frozen=True)
class EvaluationRecord:
    """Column-oriented evaluation samples, one row per sampled decision."""

    question_id: np.ndarray
    answerable: np.ndarray
    abstained: np.ndarray
    correct: np.ndarray

    def __post_init__(self):
        cols = {
            "question_id": np.asarray(self.question_id, dtype=np.int64),
            "answerable": np.asarray(self.answerable, dtype=bool),
            "abstained": np.asarray(self.abstained, dtype=bool),
            "correct": np.asarray(self.correct, dtype=bool),
        }
        n = len(cols["question_id"])
        if any(c.shape != (n,) for c in cols.values()):
            raise PreconditionError("evaluation columns must be 1-d and of equal length")
        if np.any(cols["correct"] & cols["abstained"]):
            raise PreconditionError("an abstention cannot be scored correct")
        if np.any(cols["correct"] & ~cols["answerable"]):
            raise PreconditionError("an unanswerable question cannot be answered correctly")
        for name, col in cols.items():
            object.__setattr__(self, name, col)

    @classmethod
    def from_entries(cls, entries) -> "EvaluationRecord":
        entries = list(entries)
        if not entries:
            return cls(*(np.empty(0) for _ in range(4)))
        return cls(*map(np.array, zip(*entries)))

    @property
    def entries(self) -> list[tuple[int, bool, bool, bool]]:
        return [
            (int(q), bool(a), bool(b), bool(c))
            for q, a, b, c in zip(self.question_id, self.answerable, self.abstained, self.correct)
        ]

    def __len__(self):
        return len(self.question_id)

    def subset(self, mask) -> "EvaluationRecord":
        mask = np.asarray(mask, dtype=bool)
        return EvaluationRecord(self.question_id[mask], self.answerable[mask], self.abstained[mask], self.correct[mask])


@dataclass(frozen=True)
class MetricReport:
    """``None`` marks a metric whose denominator is zero."""

    abstention_f1: float | None
    abstention_recall: float | None
    abstention_precision: float | None
    accuracy: float | None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "MetricReport":
        return cls(**{k: data[k] for k in ("abstention_f1", "abstention_recall", "abstention_precision", "accuracy")})


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def f1_score(precision: float | None, recall: float | None) -> float | None:
    if precision is None or recall is None:
        return None
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def compute_metrics(record: EvaluationRecord, accuracy_mode: str = ACCURACY_ALL_ANSWERABLE) -> MetricReport:
    """Score an evaluation record.

    Recall is the share of unanswerable samples that were abstained on,
    precision the share of abstentions that hit an unanswerable question.
    Accuracy counts correct answers over answerable samples; with
    ``accuracy_mode="attempted_only"`` abstentions leave the denominator.
    """
    if len(record) == 0:
        raise PreconditionError("cannot compute metrics on an empty record")
    unanswerable = ~record.answerable
    hits = int(np.sum(record.abstained & unanswerable))
    recall = _ratio(hits, int(unanswerable.sum()))
    precision = _ratio(hits, int(record.abstained.sum()))
    if accuracy_mode == ACCURACY_ALL_ANSWERABLE:
        acc_den = int(record.answerable.sum())
    elif accuracy_mode == ACCURACY_ATTEMPTED_ONLY:
        acc_den = int(np.sum(record.answerable & ~record.abstained))
    else:
        raise PreconditionError(f"unknown accuracy mode {accuracy_mode!r}")
    accuracy = _ratio(int(record.correct.sum()), acc_den)
    return MetricReport(f1_score(precision, recall), recall, precision, accuracy)
