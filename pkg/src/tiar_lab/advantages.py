"""Group-relative advantages, the decoupled TIAR adjustment and the coupled variant.

All functions work on a single group of ``G`` trajectories answering one
question; groups never share statistics.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .reward_judge import COUPLED_DYNAMIC, TERNARY, RewardScheme, SchemeKind, Verdict, abstention_reward, score_verdicts

# ddof for the group std; 0 is the population std, 1 the Bessel-corrected one.
STD_DDOF = 0


@dataclass(frozen=True)
class Group:
    verdicts: np.ndarray
    rewards: np.ndarray
    n_c: int = field(init=False)
    n_w: int = field(init=False)
    n_a: int = field(init=False)

    def __post_init__(self):
        verdicts = np.asarray(self.verdicts, dtype=np.int8)
        rewards = np.asarray(self.rewards, dtype=float)
        if verdicts.ndim != 1 or verdicts.shape != rewards.shape:
            raise PreconditionError("verdicts and rewards must be 1-d arrays of equal length")
        if len(verdicts) < 2:
            raise PreconditionError(f"group size must be >= 2, got {len(verdicts)}")
        if verdicts.min() < 0 or verdicts.max() > 2:
            raise PreconditionError("unknown verdict code in group")
        counts = np.bincount(verdicts, minlength=3)
        object.__setattr__(self, "verdicts", verdicts)
        object.__setattr__(self, "rewards", rewards)
        object.__setattr__(self, "n_c", int(counts[Verdict.CORRECT]))
        object.__setattr__(self, "n_w", int(counts[Verdict.WRONG]))
        object.__setattr__(self, "n_a", int(counts[Verdict.ABSTAIN]))

    @classmethod
    def from_verdicts(cls, verdicts, scheme: RewardScheme = TERNARY) -> "Group":
        verdicts = np.asarray(verdicts, dtype=np.int8)
        p_hat = None
        if scheme.kind == SchemeKind.COUPLED_DYNAMIC:
            p_hat = _p_hat_from_counts(
                int(np.sum(verdicts == Verdict.CORRECT)), int(np.sum(verdicts == Verdict.WRONG))
            )
        return cls(verdicts, score_verdicts(verdicts, scheme, p_hat))

    @classmethod
    def from_counts(cls, n_c: int, n_w: int, n_a: int, scheme: RewardScheme = TERNARY) -> "Group":
        verdicts = [Verdict.CORRECT] * n_c + [Verdict.WRONG] * n_w + [Verdict.ABSTAIN] * n_a
        return cls.from_verdicts(verdicts, scheme)

    @property
    def size(self) -> int:
        return len(self.verdicts)

    @property
    def p_hat(self) -> float | None:
        return _p_hat_from_counts(self.n_c, self.n_w)


@dataclass(frozen=True)
class AdvantageVector:
    values: np.ndarray
    lambda_used: float = 0.0
    p_hat: float | None = None
    # Statistics of the reward vector that was normalised.
    reward_mean: float = 0.0
    reward_std: float = 0.0

    def __len__(self):
        return len(self.values)


def _p_hat_from_counts(n_c: int, n_w: int) -> float | None:
    attempted = n_c + n_w
    if attempted == 0:
        return None
    return n_c / attempted


def empirical_correctness(group: Group) -> float | None:
    """Fraction of correct answers among the group's non-abstaining trajectories.

    Returns ``None`` when every trajectory abstained.
    """
    return group.p_hat


def attempt_value(p_hat: float) -> float:
    """Expected ternary reward of attempting, ``2 p_hat - 1``."""
    if not 0.0 <= p_hat <= 1.0:
        raise PreconditionError(f"p_hat must lie in [0, 1], got {p_hat}")
    return 2.0 * p_hat - 1.0


def optimal_abstention_reward(p_hat: float) -> float:
    """Loss avoided minus gain forgone by abstaining: ``1 - 2 p_hat``."""
    return abstention_reward(p_hat)


def normalize_rewards(rewards, ddof: int = STD_DDOF, eps: float | None = None) -> tuple[np.ndarray, float, float]:
    """Standardise ``rewards`` within the group.

    With ``eps=None`` a zero-variance group maps to all-zero advantages;
    otherwise the divisor is ``std + eps`` as in most GRPO codebases.
    Returns ``(advantages, mean, std)``.
    """
    rewards = np.asarray(rewards, dtype=float)
    if rewards.size < 2:
        raise PreconditionError(f"group size must be >= 2, got {rewards.size}")
    mean = float(rewards.mean())
    std = float(rewards.std(ddof=ddof))
    centered = rewards - mean
    if eps is not None:
        return centered / (std + eps), mean, std
    if std == 0.0:
        return np.zeros_like(rewards), mean, std
    return centered / std, mean, std


def normalize_advantages(group: Group, ddof: int = STD_DDOF, eps: float | None = None) -> AdvantageVector:
    values, mean, std = normalize_rewards(group.rewards, ddof=ddof, eps=eps)
    return AdvantageVector(values, 0.0, group.p_hat, mean, std)


def tiar_adjust(advantages: AdvantageVector, group: Group, lam: float) -> AdvantageVector:
    """Shift every abstention advantage by ``lam * (1 - 2 p_hat)``.

    Correct and wrong advantages are returned untouched, and groups with no
    attempted trajectory are passed through unchanged.
    """
    if len(advantages) != group.size:
        raise PreconditionError(
            f"advantage vector has {len(advantages)} entries but the group has {group.size}"
        )
    if lam < 0:
        raise PreconditionError(f"lambda must be >= 0, got {lam}")
    values = np.array(advantages.values, dtype=float, copy=True)
    p_hat = group.p_hat
    if p_hat is not None:
        values[group.verdicts == Verdict.ABSTAIN] += lam * (1.0 - 2.0 * p_hat)
    return AdvantageVector(values, float(lam), p_hat, advantages.reward_mean, advantages.reward_std)


def coupled_advantages(group: Group, ddof: int = STD_DDOF, eps: float | None = None) -> AdvantageVector:
    """Advantages after substituting the dynamic abstention reward before normalising.

    An all-abstain group has no ``p_hat``; it falls back to ternary rewards.
    """
    p_hat = group.p_hat
    if p_hat is None:
        rewards = score_verdicts(group.verdicts, TERNARY)
    else:
        rewards = score_verdicts(group.verdicts, COUPLED_DYNAMIC, p_hat)
    values, mean, std = normalize_rewards(rewards, ddof=ddof, eps=eps)
    return AdvantageVector(values, 0.0, p_hat, mean, std)


def group_means(n_c: int, n_w: int, n_a: int) -> tuple[float, float]:
    """Closed-form group reward means ``(ternary, dynamic)`` for a composition.

    The dynamic mean equals the ternary one when ``n_c + n_w == 0``.
    """
    G = n_c + n_w + n_a
    ternary = (n_c - n_w) / G
    p_hat = _p_hat_from_counts(n_c, n_w)
    if p_hat is None:
        return ternary, ternary
    return ternary, ternary + n_a * (1.0 - 2.0 * p_hat) / G


def compositions(G: int):
    """Yield every ``(n_c, n_w, n_a)`` with non-negative entries summing to ``G``."""
    for n_c in range(G + 1):
        for n_w in range(G + 1 - n_c):
            yield n_c, n_w, G - n_c - n_w
