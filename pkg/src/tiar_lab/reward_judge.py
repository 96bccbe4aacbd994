"""Ternary / coupled-dynamic reward assignment and a simulated noisy judge."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError


class Verdict(enum.IntEnum):
    CORRECT = 0
    WRONG = 1
    ABSTAIN = 2


# A trajectory is a single decision here, so its outcome is just the verdict.
TrajectoryOutcome = Verdict


class SchemeKind(str, enum.Enum):
    TERNARY = "ternary"
    COUPLED_DYNAMIC = "coupled_dynamic"


@dataclass(frozen=True)
class RewardScheme:
    kind: SchemeKind = SchemeKind.TERNARY
    correct_reward: float = 1.0
    wrong_reward: float = -1.0


TERNARY = RewardScheme(SchemeKind.TERNARY)
COUPLED_DYNAMIC = RewardScheme(SchemeKind.COUPLED_DYNAMIC)


@dataclass(frozen=True)
class JudgeNoise:
    """Per-verdict mislabeling probabilities of the simulated judge.

    ``flip_correct`` turns a correct answer into wrong, ``flip_wrong`` turns a
    wrong answer into correct and ``miss_abstain`` labels an abstention as a
    wrong answer. All zeros is a perfect judge.
    """

    flip_correct: float = 0.0
    flip_wrong: float = 0.0
    miss_abstain: float = 0.0

    def __post_init__(self):
        for name in ("flip_correct", "flip_wrong", "miss_abstain"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise PreconditionError(f"{name} must lie in [0, 1], got {value}")

    @property
    def is_perfect(self) -> bool:
        return self.flip_correct == 0.0 and self.flip_wrong == 0.0 and self.miss_abstain == 0.0


PERFECT_JUDGE = JudgeNoise()


def abstention_reward(p_hat: float) -> float:
    """Dynamic abstention reward ``1 - 2 p_hat`` used by the coupled scheme."""
    if not 0.0 <= p_hat <= 1.0:
        raise PreconditionError(f"p_hat must lie in [0, 1], got {p_hat}")
    return 1.0 - 2.0 * p_hat


def score_outcome(outcome: Verdict, scheme: RewardScheme = TERNARY, group_p_hat: float | None = None) -> float:
    if outcome == Verdict.CORRECT:
        return scheme.correct_reward
    if outcome == Verdict.WRONG:
        return scheme.wrong_reward
    if scheme.kind == SchemeKind.TERNARY:
        return 0.0
    if group_p_hat is None:
        raise PreconditionError("coupled-dynamic abstention reward needs the group's p_hat")
    return abstention_reward(group_p_hat)


def score_verdicts(verdicts: np.ndarray, scheme: RewardScheme = TERNARY, group_p_hat: float | None = None) -> np.ndarray:
    """Vectorised :func:`score_outcome` over an array of verdict codes."""
    verdicts = np.asarray(verdicts)
    rewards = np.zeros(verdicts.shape, dtype=float)
    rewards[verdicts == Verdict.CORRECT] = scheme.correct_reward
    rewards[verdicts == Verdict.WRONG] = scheme.wrong_reward
    abstained = verdicts == Verdict.ABSTAIN
    if scheme.kind == SchemeKind.COUPLED_DYNAMIC and abstained.any():
        if group_p_hat is None:
            raise PreconditionError("coupled-dynamic abstention reward needs the group's p_hat")
        rewards[abstained] = abstention_reward(group_p_hat)
    return rewards


def apply_judge_noise(outcome: Verdict, noise: JudgeNoise, rng: np.random.Generator) -> Verdict:
    """Return the verdict the simulated judge reports for ``outcome``.

    A perfect judge never touches ``rng``, so adding a zero-noise judge does
    not perturb any downstream random stream.
    """
    if noise.is_perfect:
        return Verdict(outcome)
    return Verdict(int(apply_judge_noise_array(np.array([outcome]), noise, rng)[0]))


def apply_judge_noise_array(verdicts: np.ndarray, noise: JudgeNoise, rng: np.random.Generator) -> np.ndarray:
    verdicts = np.asarray(verdicts)
    if noise.is_perfect:
        return verdicts.copy()
    u = rng.random(verdicts.shape)
    flip_prob = np.select(
        [verdicts == Verdict.CORRECT, verdicts == Verdict.WRONG, verdicts == Verdict.ABSTAIN],
        [noise.flip_correct, noise.flip_wrong, noise.miss_abstain],
    )
    target = np.select(
        [verdicts == Verdict.CORRECT, verdicts == Verdict.WRONG],
        [Verdict.WRONG, Verdict.CORRECT],
        default=Verdict.WRONG,
    )
    return np.where(u < flip_prob, target, verdicts).astype(verdicts.dtype)
