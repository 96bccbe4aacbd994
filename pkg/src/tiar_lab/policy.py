"""Tabular abstain/attempt policy trained with the clipped GRPO surrogate.

Each question owns one logit; ``sigmoid(logit)`` is the probability of
abstaining. A trajectory is a single decision, so the per-token average of
the surrogate collapses to the per-trajectory term and every gradient below
is exact.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from . import advantages as adv
from .environment import QuestionBank, sample_verdicts
from .errors import ConfigError, PreconditionError
from .metrics import EvaluationRecord
from .reward_judge import PERFECT_JUDGE, JudgeNoise, Verdict, apply_judge_noise_array

# Sub-stream tags mixed into every derived seed.
ROLLOUT_STREAM = 1
EVAL_STREAM = 2


class TrainingScheme(str, enum.Enum):
    TIAR = "tiar"
    TERNARY = "ternary"
    COUPLED = "coupled"


def log_sigmoid(x):
    return -np.logaddexp(0.0, -np.asarray(x, dtype=float))


def sigmoid(x):
    return np.exp(log_sigmoid(x))


def bernoulli_kl(logit_p, logit_q):
    """KL(Bern(sigmoid(logit_p)) || Bern(sigmoid(logit_q)))."""
    p = sigmoid(logit_p)
    return p * (log_sigmoid(logit_p) - log_sigmoid(logit_q)) + (1.0 - p) * (
        log_sigmoid(-np.asarray(logit_p)) - log_sigmoid(-np.asarray(logit_q))
    )


@dataclass(frozen=True)
class OptimizerConfig:
    learning_rate: float = 0.05
    clip_epsilon: float = 0.2
    kl_beta: float = 0.001
    lam: float = 1.0
    group_size: int = 8
    steps: int = 200
    scheme: TrainingScheme = TrainingScheme.TIAR
    std_ddof: int = adv.STD_DDOF
    std_eps: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", TrainingScheme(self.scheme))

    def validate(self):
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate", "must be > 0")
        if not self.clip_epsilon > 0:
            raise ConfigError("clip_epsilon", "must be > 0")
        if self.kl_beta < 0:
            raise ConfigError("kl_beta", "must be >= 0")
        if self.lam < 0:
            raise ConfigError("lambda", "must be >= 0")
        if self.group_size < 2:
            raise ConfigError("group_size", "must be >= 2")
        if self.steps < 0:
            raise ConfigError("steps", "must be >= 0")
        if self.std_ddof not in (0, 1):
            raise ConfigError("std_ddof", "must be 0 (population) or 1 (sample)")

    @property
    def effective_lambda(self) -> float:
        # the ternary baseline is the TIAR path with the strength pinned to zero
        return 0.0 if self.scheme == TrainingScheme.TERNARY else self.lam


@dataclass(frozen=True)
class PolicyTable:
    logits: np.ndarray
    reference_logits: np.ndarray
    rollout_logits: np.ndarray

    def __post_init__(self):
        arrays = [np.array(a, dtype=float) for a in (self.logits, self.reference_logits, self.rollout_logits)]
        if not arrays[0].ndim == 1 or any(a.shape != arrays[0].shape for a in arrays):
            raise PreconditionError("policy logits, reference and rollout snapshots must share one 1-d shape")
        for name, a in zip(("logits", "reference_logits", "rollout_logits"), arrays):
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @classmethod
    def initial(cls, n_questions: int, logit: float = 0.0) -> "PolicyTable":
        logits = np.full(n_questions, float(logit))
        return cls(logits, logits, logits)

    def __len__(self):
        return len(self.logits)

    @property
    def abstain_prob(self) -> np.ndarray:
        return sigmoid(self.logits)


@dataclass(frozen=True)
class StepReport:
    """Per-question summary of one training step; NaN marks an undefined entry."""

    step: int
    p_hat: np.ndarray
    abstain_prob: np.ndarray
    mean_reward: np.ndarray
    adv_abstain_mean: np.ndarray
    adv_correct_mean: np.ndarray
    grad: np.ndarray = field(repr=False)


def _ratio_and_slope(theta, theta_old, abstained):
    p, q = sigmoid(theta), sigmoid(-theta)
    p_old, q_old = sigmoid(theta_old), sigmoid(-theta_old)
    dp = p * q
    # a saturated rollout policy never samples the other action; silence its 0/0
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(abstained, p / p_old, q / q_old)
        dw = np.where(abstained, dp / p_old, -dp / q_old)
    return w, dw


def surrogate_objective(theta, theta_old, theta_ref, verdicts, advantages, clip_epsilon, kl_beta) -> float:
    """Per-question clipped surrogate minus ``kl_beta * KL(pi_theta || pi_ref)`` (to be maximised)."""
    abstained = np.asarray(verdicts) == Verdict.ABSTAIN
    a = np.asarray(advantages, dtype=float)
    w, _ = _ratio_and_slope(theta, theta_old, abstained)
    clipped = np.clip(w, 1.0 - clip_epsilon, 1.0 + clip_epsilon)
    surrogate = np.minimum(w * a, clipped * a).mean()
    return float(surrogate - kl_beta * bernoulli_kl(theta, theta_ref))


def surrogate_grad(theta, theta_old, theta_ref, verdicts, advantages, clip_epsilon, kl_beta) -> float:
    """Analytic d/dtheta of :func:`surrogate_objective`.

    A trajectory contributes ``A * dw/dtheta`` when the min selects the
    unclipped term and nothing otherwise; at an exact clip boundary the
    unclipped branch is taken.
    """
    abstained = np.asarray(verdicts) == Verdict.ABSTAIN
    a = np.asarray(advantages, dtype=float)
    if abstained.shape != a.shape:
        raise PreconditionError(f"{a.size} advantages for {abstained.size} trajectories")
    w, dw = _ratio_and_slope(theta, theta_old, abstained)
    unclipped = np.where(a >= 0, w <= 1.0 + clip_epsilon, w >= 1.0 - clip_epsilon)
    surrogate = np.where(unclipped, a * dw, 0.0).mean()
    p = sigmoid(theta)
    # d/dtheta KL(Bern(p) || Bern(q)) = p (1 - p) (logit p - logit q)
    kl = p * (1.0 - p) * (theta - theta_ref)
    return float(surrogate - kl_beta * kl)


def surrogate_gradient(question_index: int, group: adv.Group, advantages: adv.AdvantageVector,
                       policy: PolicyTable, config: OptimizerConfig) -> float:
    if len(advantages) != group.size:
        raise PreconditionError(f"{len(advantages)} advantages for a group of {group.size}")
    i = question_index
    return surrogate_grad(
        policy.logits[i], policy.rollout_logits[i], policy.reference_logits[i],
        group.verdicts, advantages.values, config.clip_epsilon, config.kl_beta,
    )


def group_advantages(group: adv.Group, config: OptimizerConfig) -> adv.AdvantageVector:
    """Advantages for a ternary-scored group under the configured scheme."""
    if config.scheme == TrainingScheme.COUPLED:
        return adv.coupled_advantages(group, ddof=config.std_ddof, eps=config.std_eps)
    normalized = adv.normalize_advantages(group, ddof=config.std_ddof, eps=config.std_eps)
    return adv.tiar_adjust(normalized, group, config.effective_lambda)


def rollout_rng(seed: int, question_id: int, step: int) -> np.random.Generator:
    return np.random.default_rng([seed, ROLLOUT_STREAM, question_id, step])


def train_step(bank: QuestionBank, policy: PolicyTable, config: OptimizerConfig,
               judge: JudgeNoise = PERFECT_JUDGE, seed: int = 0, step: int = 1) -> tuple[PolicyTable, StepReport]:
    """One on-policy GRPO update over every question in the bank.

    Sampling for question ``q`` at step ``step`` draws only from the stream
    ``(seed, q, step)``, so the bank order never changes a question's samples.
    """
    if len(policy) != len(bank):
        raise PreconditionError(f"policy has {len(policy)} logits for {len(bank)} questions")
    snapshot = PolicyTable(policy.logits, policy.reference_logits, policy.logits)
    n = len(bank)
    grads = np.zeros(n)
    p_hat = np.full(n, np.nan)
    mean_reward = np.zeros(n)
    adv_abstain = np.full(n, np.nan)
    adv_correct = np.full(n, np.nan)
    abstain_prob = sigmoid(snapshot.rollout_logits)
    for question in bank:
        i = question.id
        rng = rollout_rng(seed, i, step)
        verdicts = sample_verdicts(question.p_true, abstain_prob[i], config.group_size, rng)
        verdicts = apply_judge_noise_array(verdicts, judge, rng)
        group = adv.Group.from_verdicts(verdicts)
        advantages = group_advantages(group, config)
        grads[i] = surrogate_gradient(i, group, advantages, snapshot, config)

        if group.p_hat is not None:
            p_hat[i] = group.p_hat
        mean_reward[i] = group.rewards.mean()
        abstained = group.verdicts == Verdict.ABSTAIN
        correct = group.verdicts == Verdict.CORRECT
        if abstained.any():
            adv_abstain[i] = advantages.values[abstained].mean()
        if correct.any():
            adv_correct[i] = advantages.values[correct].mean()

    new_logits = snapshot.logits + config.learning_rate * grads
    updated = PolicyTable(new_logits, snapshot.reference_logits, snapshot.rollout_logits)
    report = StepReport(step, p_hat, sigmoid(new_logits), mean_reward, adv_abstain, adv_correct, grads)
    return updated, report


def evaluate_policy(bank: QuestionBank, policy: PolicyTable, samples_per_question: int,
                    seed: int = 0) -> EvaluationRecord:
    """Sample ``samples_per_question`` decisions per question from the current policy."""
    if samples_per_question < 1:
        raise PreconditionError("samples_per_question must be >= 1")
    if len(policy) != len(bank):
        raise PreconditionError(f"policy has {len(policy)} logits for {len(bank)} questions")
    k = samples_per_question
    probs = policy.abstain_prob
    qids, answerable, abstained, correct = [], [], [], []
    for question in bank:
        rng = np.random.default_rng([seed, EVAL_STREAM, question.id])
        u = rng.random((2, k))
        abst = u[0] < probs[question.id]
        qids.append(np.full(k, question.id))
        answerable.append(np.full(k, question.answerable))
        abstained.append(abst)
        correct.append(~abst & (u[1] < question.p_true))
    return EvaluationRecord(*(np.concatenate(c) for c in (qids, answerable, abstained, correct)))


def train(bank: QuestionBank, config: OptimizerConfig, judge: JudgeNoise = PERFECT_JUDGE, seed: int = 0,
          initial_logit: float = 0.0, callback=None) -> PolicyTable:
    """Run ``config.steps`` training steps from a uniform initial policy.

    ``callback(report)`` is invoked after every step.
    """
    config.validate()
    policy = PolicyTable.initial(len(bank), initial_logit)
    for step in range(1, config.steps + 1):
        policy, report = train_step(bank, policy, config, judge, seed, step)
        if callback is not None:
            callback(report)
    return policy


def with_scheme(config: OptimizerConfig, scheme, lam: float | None = None) -> OptimizerConfig:
    return replace(config, scheme=TrainingScheme(scheme), lam=config.lam if lam is None else lam)
