"""Experiment configuration, seeded runs, sweeps and exhaustive property checks."""
from __future__ import annotations

import csv
import dataclasses
import itertools
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import advantages as adv
from .environment import BankSpec, QuestionBank, build_bank
from .errors import ConfigError
from .metrics import ACCURACY_ALL_ANSWERABLE, ACCURACY_ATTEMPTED_ONLY, MetricReport, compute_metrics
from .policy import OptimizerConfig, PolicyTable, StepReport, TrainingScheme, evaluate_policy, train_step
from .reward_judge import JudgeNoise, Verdict

SCHEMA_VERSION = 1
SEED_ENV_VAR = "TIAR_LAB_SEED"

TRAINING_COLUMNS = [
    "step", "question_id", "p_true", "answerable", "p_hat",
    "abstain_prob", "mean_reward", "adv_abstain_mean", "adv_correct_mean",
]
COMPARISON_COLUMNS = [
    "run_id", "scheme", "lambda", "seed",
    "abstention_f1", "abstention_recall", "abstention_precision", "accuracy",
    "hard_abstain_prob", "easy_abstain_prob", "hard_abstain_rate", "easy_attempt_rate",
]
ENUMERATION_COLUMNS = [
    "G", "n_c", "n_w", "n_a", "p_hat", "mean_ternary", "mean_dynamic",
    "adv_c_ternary", "adv_c_coupled", "adv_a_ternary", "adv_a_tiar",
]


@dataclass
class ExperimentConfig:
    """Flat, JSON-serialisable description of one run or a sweep of runs.

    ``lam`` is written as ``"lambda"`` in JSON. Empty sweep axes mean "use the
    base value".
    """

    seed: int = 0
    bank_seed: int = 0
    bank_grid: list | None = field(default_factory=lambda: [round(0.1 * i, 1) for i in range(11)])
    bank_copies: int = 1
    bank_n_questions: int = 0
    bank_distribution: str = "uniform"
    bank_low: float = 0.0
    bank_high: float = 1.0
    bank_beta_a: float = 1.0
    bank_beta_b: float = 1.0
    unanswerable_fraction: float = 0.0
    learning_rate: float = 0.05
    clip_epsilon: float = 0.2
    kl_beta: float = 0.001
    lam: float = 1.0
    group_size: int = 8
    steps: int = 200
    scheme: str = "tiar"
    std_ddof: int = 0
    std_eps: float | None = None
    initial_logit: float = 0.0
    flip_correct: float = 0.0
    flip_wrong: float = 0.0
    miss_abstain: float = 0.0
    eval_samples: int = 100
    accuracy_mode: str = ACCURACY_ALL_ANSWERABLE
    hard_max_p: float = 0.2
    easy_min_p: float = 0.8
    sweep_lambdas: list = field(default_factory=list)
    sweep_schemes: list = field(default_factory=list)
    sweep_seeds: list = field(default_factory=list)
    workers: int = 1
    schema_version: int = SCHEMA_VERSION

    @property
    def run_id(self) -> str:
        return f"{self.scheme}-lam{self.lam:g}-seed{self.seed}"

    def bank_spec(self) -> BankSpec:
        return BankSpec(
            grid=None if self.bank_grid is None else tuple(self.bank_grid),
            copies=self.bank_copies,
            n_questions=self.bank_n_questions,
            distribution=self.bank_distribution,
            low=self.bank_low,
            high=self.bank_high,
            beta_a=self.bank_beta_a,
            beta_b=self.bank_beta_b,
            unanswerable_fraction=self.unanswerable_fraction,
        )

    def optimizer(self) -> OptimizerConfig:
        return OptimizerConfig(
            learning_rate=self.learning_rate, clip_epsilon=self.clip_epsilon, kl_beta=self.kl_beta,
            lam=self.lam, group_size=self.group_size, steps=self.steps, scheme=self.scheme,
            std_ddof=self.std_ddof, std_eps=self.std_eps,
        )

    def judge(self) -> JudgeNoise:
        return JudgeNoise(self.flip_correct, self.flip_wrong, self.miss_abstain)

    def validate(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError("schema_version", f"expected {SCHEMA_VERSION}, got {self.schema_version}")
        try:
            TrainingScheme(self.scheme)
        except ValueError:
            raise ConfigError("scheme", f"unknown scheme {self.scheme!r}") from None
        for s in self.sweep_schemes:
            if s not in {m.value for m in TrainingScheme}:
                raise ConfigError("sweep_schemes", f"unknown scheme {s!r}")
        if any(v < 0 for v in self.sweep_lambdas):
            raise ConfigError("sweep_lambdas", "lambda values must be >= 0")
        self.optimizer().validate()
        self.bank_spec().validate()
        for name in ("flip_correct", "flip_wrong", "miss_abstain"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(name, "must lie in [0, 1]")
        if self.eval_samples < 1:
            raise ConfigError("eval_samples", "must be >= 1")
        if self.accuracy_mode not in (ACCURACY_ALL_ANSWERABLE, ACCURACY_ATTEMPTED_ONLY):
            raise ConfigError("accuracy_mode", f"unknown mode {self.accuracy_mode!r}")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")

    def to_dict(self) -> dict:
        data = dataclasses.asdict(self)
        data["lambda"] = data.pop("lam")
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown configuration field")
        config = cls(**data)
        config.validate()
        return config


def load_config(path) -> ExperimentConfig:
    """Read a JSON config; ``TIAR_LAB_SEED`` overrides its master seed when set."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path} is not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a JSON object")
    override = os.environ.get(SEED_ENV_VAR)
    if override:
        try:
            data["seed"] = int(override)
        except ValueError:
            raise ConfigError(SEED_ENV_VAR, f"not an integer: {override!r}") from None
    return ExperimentConfig.from_dict(data)


@dataclass
class RunResult:
    config: ExperimentConfig
    run_dir: Path
    metrics: MetricReport
    final_abstain_prob: np.ndarray
    abstain_history: np.ndarray  # (steps, n_questions), post-update probabilities
    bank: QuestionBank
    hard_abstain_rate: float | None
    easy_attempt_rate: float | None
    duration: float

    @property
    def training_csv(self) -> Path:
        return self.run_dir / "training.csv"

    def bucket_mean(self, mask) -> float:
        mask = np.asarray(mask, dtype=bool)
        return float(self.final_abstain_prob[mask].mean()) if mask.any() else math.nan

    @property
    def hard_abstain_prob(self) -> float:
        return self.bucket_mean(self.bank.p_true <= self.config.hard_max_p)

    @property
    def easy_abstain_prob(self) -> float:
        return self.bucket_mean(self.bank.p_true >= self.config.easy_min_p)

    def comparison_row(self) -> dict:
        c = self.config
        m = self.metrics
        return {
            "run_id": c.run_id, "scheme": c.scheme, "lambda": c.lam, "seed": c.seed,
            "abstention_f1": m.abstention_f1, "abstention_recall": m.abstention_recall,
            "abstention_precision": m.abstention_precision, "accuracy": m.accuracy,
            "hard_abstain_prob": self.hard_abstain_prob, "easy_abstain_prob": self.easy_abstain_prob,
            "hard_abstain_rate": self.hard_abstain_rate, "easy_attempt_rate": self.easy_attempt_rate,
        }


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return "" if math.isnan(value) else repr(float(value))
    return value


def _training_rows(bank: QuestionBank, report: StepReport):
    for q in bank:
        i = q.id
        yield [
            report.step, i, q.p_true, q.answerable, report.p_hat[i], report.abstain_prob[i],
            report.mean_reward[i], report.adv_abstain_mean[i], report.adv_correct_mean[i],
        ]


def _rate(numerator_mask, denominator_mask) -> float | None:
    den = int(np.sum(denominator_mask))
    return int(np.sum(numerator_mask & denominator_mask)) / den if den else None


def run_experiment(config: ExperimentConfig, out_dir) -> RunResult:
    """Build the bank, train, evaluate and write ``<out_dir>/<run_id>/``."""
    config.validate()
    start = time.perf_counter()
    run_dir = Path(out_dir) / config.run_id
    try:
        run_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {run_dir}: {exc.strerror}") from exc

    bank = build_bank(config.bank_spec(), config.bank_seed)
    opt = config.optimizer()
    judge = config.judge()
    policy = PolicyTable.initial(len(bank), config.initial_logit)
    history = np.empty((config.steps, len(bank)))

    (run_dir / "config.json").write_text(config.to_json())
    bank.save(run_dir / "bank.json")
    with open(run_dir / "training.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRAINING_COLUMNS)
        for step in range(1, config.steps + 1):
            policy, report = train_step(bank, policy, opt, judge, config.seed, step)
            history[step - 1] = report.abstain_prob
            writer.writerows([_cell(v) for v in row] for row in _training_rows(bank, report))

    record = evaluate_policy(bank, policy, config.eval_samples, config.seed)
    metrics = compute_metrics(record, config.accuracy_mode)
    (run_dir / "metrics.json").write_text(metrics.to_json())

    p_rec = bank.p_true[record.question_id]
    hard_rate = _rate(record.abstained, p_rec <= config.hard_max_p)
    easy_rate = _rate(~record.abstained, p_rec >= config.easy_min_p)
    final = policy.abstain_prob
    final_policy = {
        "question_ids": [q.id for q in bank],
        "p_true": bank.p_true.tolist(),
        "logits": policy.logits.tolist(),
        "abstain_prob": final.tolist(),
    }
    (run_dir / "final_policy.json").write_text(json.dumps(final_policy, indent=2) + "\n")
    return RunResult(config, run_dir, metrics, final, history, bank, hard_rate, easy_rate,
                     time.perf_counter() - start)


def sweep_configs(config: ExperimentConfig) -> list[ExperimentConfig]:
    """Cartesian product of the sweep axes, ordered (lambda, scheme, seed)."""
    if not (config.sweep_lambdas or config.sweep_schemes or config.sweep_seeds):
        raise ConfigError("sweep_lambdas", "a sweep needs at least one non-empty axis")
    lambdas = config.sweep_lambdas or [config.lam]
    schemes = config.sweep_schemes or [config.scheme]
    seeds = config.sweep_seeds or [config.seed]
    runs = []
    for lam, scheme, seed in itertools.product(lambdas, schemes, seeds):
        runs.append(dataclasses.replace(
            config, lam=float(lam), scheme=scheme, seed=int(seed),
            sweep_lambdas=[], sweep_schemes=[], sweep_seeds=[],
        ))
    return runs


def _run_one(args):
    config, out_dir = args
    return run_experiment(config, out_dir)


def run_sweep(config: ExperimentConfig, out_dir, workers: int | None = None) -> tuple[list[RunResult], list[dict]]:
    """Run every sweep point and write ``<out_dir>/comparison.csv``."""
    config.validate()
    configs = sweep_configs(config)
    out_dir = Path(out_dir)
    workers = workers or config.workers
    jobs = [(c, out_dir) for c in configs]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(job) for job in jobs]
    rows = [r.comparison_row() for r in results]
    with open(out_dir / "comparison.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COMPARISON_COLUMNS)
        writer.writerows([_cell(row[c]) for c in COMPARISON_COLUMNS] for row in rows)
    return results, rows


# ---------------------------------------------------------------------------
# exhaustive checks over group compositions


def enumerate_groups(G: int, lam: float = 1.0) -> list[dict]:
    """One row per composition of ``G`` with both schemes' statistics; ``None`` where undefined."""
    rows = []
    for n_c, n_w, n_a in adv.compositions(G):
        group = adv.Group.from_counts(n_c, n_w, n_a)
        ternary = adv.normalize_advantages(group)
        coupled = adv.coupled_advantages(group)
        tiar = adv.tiar_adjust(ternary, group, lam)
        mean_t, mean_d = adv.group_means(n_c, n_w, n_a)
        # from_counts orders verdicts correct, wrong, abstain
        rows.append({
            "G": G, "n_c": n_c, "n_w": n_w, "n_a": n_a, "p_hat": group.p_hat,
            "mean_ternary": mean_t, "mean_dynamic": mean_d,
            "adv_c_ternary": ternary.values[0] if n_c else None,
            "adv_c_coupled": coupled.values[0] if n_c else None,
            "adv_a_ternary": ternary.values[-1] if n_a else None,
            "adv_a_tiar": tiar.values[-1] if n_a else None,
        })
    return rows


def write_enumeration(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ENUMERATION_COLUMNS)
        writer.writerows([_cell(row[c]) for c in ENUMERATION_COLUMNS] for row in rows)


@dataclass
class PropertyResult:
    name: str
    G: int
    checked: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.counterexamples


@dataclass
class PropertyReport:
    results: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def write(self, out_dir):
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "properties.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["property", "G", "checked", "failed", "status"])
            for r in self.results:
                writer.writerow([r.name, r.G, r.checked, len(r.counterexamples), "pass" if r.passed else "FAIL"])
        with open(out_dir / "counterexamples.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["property", "G", "n_c", "n_w", "n_a", "detail"])
            for r in self.results:
                for cx in r.counterexamples:
                    writer.writerow([r.name, r.G, cx.get("n_c", ""), cx.get("n_w", ""), cx.get("n_a", ""), cx["detail"]])


CHECK_LAMBDAS = (0.3, 0.5, 1.0, 2.0)
MEAN_TOL = 1e-12


def check_properties(G_values) -> PropertyReport:
    """Enumerate every composition for each ``G`` and test the advantage invariants."""
    results = []
    for G in G_values:
        if G < 3:
            raise ConfigError("group_sizes", f"property checks need G >= 3, got {G}")
        props = {name: PropertyResult(name, G) for name in (
            "composition_count", "normalized_mean_zero_std_one", "group_mean_formulas",
            "coupling_inequality", "dynamic_mean_below_ternary", "tiar_lambda_zero_identity",
            "tiar_preserves_attempt_advantages", "tiar_shift_is_opportunity_cost",
            "coupled_equals_ternary_at_half", "optimal_reward_endpoints",
        )}

        def check(name, ok, counts, detail):
            p = props[name]
            p.checked += 1
            if not ok:
                n_c, n_w, n_a = counts
                p.counterexamples.append({"n_c": n_c, "n_w": n_w, "n_a": n_a, "detail": detail})

        comps = list(adv.compositions(G))
        expected = math.comb(G + 2, 2)
        check("composition_count", len(comps) == expected, ("", "", ""),
              f"enumerated {len(comps)}, expected {expected}")

        for counts in comps:
            n_c, n_w, n_a = counts
            group = adv.Group.from_counts(n_c, n_w, n_a)
            ternary = adv.normalize_advantages(group)
            coupled = adv.coupled_advantages(group)
            p_hat = group.p_hat
            mean_t, mean_d = adv.group_means(n_c, n_w, n_a)

            if ternary.reward_std > 0:
                m, s = float(ternary.values.mean()), float(ternary.values.std())
                check("normalized_mean_zero_std_one", abs(m) <= MEAN_TOL and abs(s - 1) <= MEAN_TOL,
                      counts, f"mean={m!r} std={s!r}")
            check("group_mean_formulas",
                  abs(ternary.reward_mean - mean_t) <= MEAN_TOL and abs(coupled.reward_mean - mean_d) <= MEAN_TOL,
                  counts, f"ternary {ternary.reward_mean!r} vs {mean_t!r}; dynamic {coupled.reward_mean!r} vs {mean_d!r}")

            same = adv.tiar_adjust(ternary, group, 0.0)
            check("tiar_lambda_zero_identity", np.array_equal(same.values, ternary.values), counts,
                  f"{same.values.tolist()} != {ternary.values.tolist()}")

            attempted = group.verdicts != Verdict.ABSTAIN
            abstained = ~attempted
            for lam in CHECK_LAMBDAS:
                shifted = adv.tiar_adjust(ternary, group, lam)
                check("tiar_preserves_attempt_advantages",
                      np.array_equal(shifted.values[attempted], ternary.values[attempted]),
                      counts, f"lambda={lam}")
                delta = 0.0 if p_hat is None else lam * adv.optimal_abstention_reward(p_hat)
                err = np.abs(shifted.values[abstained] - ternary.values[abstained] - delta)
                check("tiar_shift_is_opportunity_cost", bool(np.all(err <= MEAN_TOL)), counts,
                      f"lambda={lam} max error {float(err.max(initial=0.0))!r}")

            if p_hat == 0.5:
                check("coupled_equals_ternary_at_half", np.array_equal(coupled.values, ternary.values),
                      counts, f"{coupled.values.tolist()} != {ternary.values.tolist()}")

            if min(counts) >= 1:
                if p_hat < 0.5:
                    a_t, a_d = ternary.values[0], coupled.values[0]
                    check("coupling_inequality", a_d < a_t, counts,
                          f"p_hat={p_hat!r} adv_c coupled {a_d!r} >= ternary {a_t!r}")
                elif p_hat > 0.5:
                    check("dynamic_mean_below_ternary", mean_d < mean_t, counts,
                          f"p_hat={p_hat!r} dynamic mean {mean_d!r} >= ternary {mean_t!r}")

        for p_hat, target in ((0.0, 1.0), (0.5, 0.0), (1.0, -1.0)):
            value = adv.optimal_abstention_reward(p_hat)
            check("optimal_reward_endpoints", value == target, ("", "", ""),
                  f"p_hat={p_hat}: {value!r} != {target!r}")
        results.extend(props.values())
    return PropertyReport(results)
