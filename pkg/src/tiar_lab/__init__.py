"""Tabular GRPO laboratory for abstention learning.

Ternary rewards, the coupled dynamic-reward variant and trajectory-informed
advantage reweighting (TIAR), trained against a synthetic question bank with
known per-question difficulty.
"""
from .advantages import (
    AdvantageVector,
    Group,
    attempt_value,
    coupled_advantages,
    empirical_correctness,
    group_means,
    normalize_advantages,
    optimal_abstention_reward,
    tiar_adjust,
)
from .environment import BankSpec, Question, QuestionBank, build_bank, sample_group
from .errors import ConfigError, PreconditionError, TiarLabError
from .harness import ExperimentConfig, check_properties, enumerate_groups, run_experiment, run_sweep
from .metrics import EvaluationRecord, MetricReport, compute_metrics
from .policy import OptimizerConfig, PolicyTable, TrainingScheme, evaluate_policy, surrogate_gradient, train, train_step
from .reward_judge import (
    COUPLED_DYNAMIC,
    TERNARY,
    JudgeNoise,
    RewardScheme,
    TrajectoryOutcome,
    Verdict,
    apply_judge_noise,
    score_outcome,
)

__version__ = "0.1.0"
