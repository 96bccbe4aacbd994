"""Exit criteria for the package, one test per criterion.

Run with ``pytest tests/test_acceptance.py``; the terminal summary prints a
PASS/FAIL line per criterion. Training-based criteria use ``learning_rate =
0.2`` so that 500 tabular steps reach the converged regime.
"""
import json
import math
import statistics
import subprocess
import sys
import time

import numpy as np
import pytest

from oracles import central_difference, confusion_oracle, pop_normalize, reference_objective
from tiar_lab import advantages as adv
from tiar_lab.environment import BankSpec, build_bank
from tiar_lab.harness import ExperimentConfig, check_properties, run_sweep
from tiar_lab.metrics import ACCURACY_ATTEMPTED_ONLY, EvaluationRecord, compute_metrics
from tiar_lab.policy import OptimizerConfig, group_advantages, sigmoid, surrogate_grad, train
from tiar_lab.reward_judge import Verdict

pytestmark = pytest.mark.slow

SEEDS = [0, 1, 2, 3, 4]
GRID = [round(0.1 * i, 1) for i in range(11)]
ACCEPT_LR = 0.2
WORKERS = 5


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


# 1 ---------------------------------------------------------------------------

@pytest.mark.criterion(1, "optimal abstention reward endpoints are exactly +1, 0, -1")
def test_c1_optimal_reward_endpoints(record_property):
    values = [adv.optimal_abstention_reward(p) for p in (0.0, 0.5, 1.0)]
    record_property("detail", f"values={values}")
    assert values == [1.0, 0.0, -1.0]


# 2 ---------------------------------------------------------------------------

@pytest.mark.criterion(2, "TIAR(lambda=0) equals the ternary baseline bit-for-bit")
def test_c2_lambda_zero_reduction(record_property):
    with Budget(10) as b:
        rng = np.random.default_rng(20260101)
        tiar0 = OptimizerConfig(scheme="tiar", lam=0.0)
        ternary = OptimizerConfig(scheme="ternary", lam=1.0)
        for _ in range(10_000):
            group = adv.Group.from_verdicts(rng.integers(0, 3, 8))
            base = adv.normalize_advantages(group)
            assert np.array_equal(adv.tiar_adjust(base, group, 0.0).values, base.values)
            assert np.array_equal(group_advantages(group, tiar0).values, group_advantages(group, ternary).values)

        bank = build_bank(BankSpec(grid=GRID, copies=10))
        a = train(bank, OptimizerConfig(scheme="tiar", lam=0.0, steps=200), seed=7)
        t = train(bank, OptimizerConfig(scheme="ternary", steps=200), seed=7)
        assert np.array_equal(a.logits, t.logits)
        assert a.logits.tobytes() == t.logits.tobytes()
    record_property("detail", f"10000 groups + 200-step runs identical, {b.elapsed:.1f}s")
    assert b.elapsed < b.seconds


# 3 ---------------------------------------------------------------------------

@pytest.mark.criterion(3, "coupling inequality and group-mean formulas, exhaustive over G in {4, 8, 16}")
def test_c3_coupling_inequality(record_property):
    with Budget(1) as b:
        n_checked = 0
        for G in (4, 8, 16):
            for n_c, n_w, n_a in adv.compositions(G):
                if min(n_c, n_w, n_a) < 1:
                    continue
                p = n_c / (n_c + n_w)
                tern = [1.0] * n_c + [-1.0] * n_w + [0.0] * n_a
                dyn = [1.0] * n_c + [-1.0] * n_w + [1 - 2 * p] * n_a
                mean_t, mean_d = adv.group_means(n_c, n_w, n_a)
                assert abs(mean_t - statistics.fmean(tern)) <= 1e-12
                assert abs(mean_d - statistics.fmean(dyn)) <= 1e-12
                group = adv.Group.from_counts(n_c, n_w, n_a)
                ternary = adv.normalize_advantages(group)
                coupled = adv.coupled_advantages(group)
                assert abs(ternary.reward_mean - mean_t) <= 1e-12
                assert abs(coupled.reward_mean - mean_d) <= 1e-12
                assert abs(coupled.values[0] - pop_normalize(dyn)[0]) <= 1e-12
                if p < 0.5:
                    assert coupled.values[0] < ternary.values[0], (G, n_c, n_w, n_a)
                    n_checked += 1
        assert check_properties([4, 8, 16]).passed
    record_property("detail", f"{n_checked} compositions with p_hat < 0.5, {b.elapsed:.2f}s")
    assert n_checked > 0
    assert b.elapsed < b.seconds


# 4 ---------------------------------------------------------------------------

@pytest.mark.criterion(4, "ternary fixed point: abstain > 0.9 for p <= 0.4, < 0.1 for p >= 0.6")
def test_c4_ternary_threshold(tmp_path, record_property):
    cfg = ExperimentConfig(
        bank_grid=GRID, bank_copies=10, scheme="ternary", steps=500,
        learning_rate=ACCEPT_LR, eval_samples=10, sweep_seeds=SEEDS,
    )
    with Budget(120) as b:
        results, _ = run_sweep(cfg, tmp_path, workers=WORKERS)
    p_true = results[0].bank.p_true
    worst = {}
    for p in GRID:
        if p == 0.5:
            continue
        mask = np.isclose(p_true, p)
        if p <= 0.4:
            ok = [bool(np.all(r.final_abstain_prob[mask] > 0.9)) for r in results]
            worst[p] = min(r.final_abstain_prob[mask].min() for r in results)
        else:
            ok = [bool(np.all(r.final_abstain_prob[mask] < 0.1)) for r in results]
            worst[p] = max(r.final_abstain_prob[mask].max() for r in results)
        assert sum(ok) >= 4, (p, ok)
    record_property("detail", f"min over seeds at p=0.4: {worst[0.4]:.3f}, max at p=0.6: {worst[0.6]:.3f}; {b.elapsed:.0f}s")
    assert b.elapsed < b.seconds


# 5 ---------------------------------------------------------------------------

def _steps_to(history, mask, level=0.9):
    reached = history[:, mask].mean(axis=1) >= level
    return int(np.argmax(reached)) + 1 if reached.any() else math.inf


@pytest.mark.criterion(5, "TIAR speeds up abstention on hard questions; abstention monotone in lambda")
def test_c5_tiar_acceleration(tmp_path, record_property):
    lambdas = [0.0, 0.3, 0.5, 1.0]
    budget_step = 50
    cfg = ExperimentConfig(
        bank_grid=[0.0, 0.1, 0.2], bank_copies=10, scheme="tiar", steps=200,
        learning_rate=ACCEPT_LR, eval_samples=10, sweep_lambdas=lambdas, sweep_seeds=SEEDS,
    )
    with Budget(300) as b:
        results, _ = run_sweep(cfg, tmp_path, workers=WORKERS)
    by_lam = {lam: [r for r in results if r.config.lam == lam] for lam in lambdas}
    p_true = results[0].bank.p_true
    medians = {}
    for p in (0.0, 0.1, 0.2):
        mask = np.isclose(p_true, p)
        m0 = statistics.median(_steps_to(r.abstain_history, mask) for r in by_lam[0.0])
        m1 = statistics.median(_steps_to(r.abstain_history, mask) for r in by_lam[1.0])
        medians[p] = (m0, m1)
        assert m1 < m0, (p, m0, m1)
    means = [float(np.mean([r.abstain_history[budget_step - 1].mean() for r in by_lam[lam]])) for lam in lambdas]
    assert all(a <= b for a, b in zip(means, means[1:])), means
    record_property("detail", f"median steps to 0.9 (lam0, lam1) {medians}; "
                              f"mean abstain@{budget_step} {[round(m, 4) for m in means]}; {b.elapsed:.0f}s")
    assert b.elapsed < b.seconds


# 6 ---------------------------------------------------------------------------

@pytest.mark.criterion(6, "coupled scheme: easy attempt rate <= ternary, hard abstention >= ternary")
def test_c6_coupled_directionality(tmp_path, record_property):
    cfg = ExperimentConfig(
        bank_grid=[0.1, 0.9], bank_copies=20, steps=500, learning_rate=ACCEPT_LR,
        eval_samples=1000, hard_max_p=0.1, easy_min_p=0.9,
        sweep_schemes=["ternary", "coupled"], sweep_seeds=SEEDS,
    )
    with Budget(300) as b:
        results, _ = run_sweep(cfg, tmp_path, workers=WORKERS)

    def median_of(scheme, attr):
        return statistics.median(getattr(r, attr) for r in results if r.config.scheme == scheme)

    easy = {s: median_of(s, "easy_attempt_rate") for s in ("ternary", "coupled")}
    hard = {s: median_of(s, "hard_abstain_rate") for s in ("ternary", "coupled")}
    record_property("detail", f"easy attempt rate {easy}; hard abstention {hard}; {b.elapsed:.0f}s")
    assert b.elapsed < b.seconds
    assert hard["coupled"] >= hard["ternary"]
    assert easy["coupled"] <= easy["ternary"]


# 7 ---------------------------------------------------------------------------

@pytest.mark.criterion(7, "analytic surrogate gradient matches central differences (rel err < 1e-4)")
def test_c7_gradient_oracle(record_property):
    rng = np.random.default_rng(7)
    worst, n = 0.0, 0
    with Budget(5) as b:
        while n < 1000:
            theta, theta_old, theta_ref = rng.uniform(-3, 3, 3)
            verdicts = rng.integers(0, 3, 8)
            advantages = rng.normal(0, 1.5, 8)
            eps, beta = rng.uniform(0.05, 0.4), rng.uniform(0, 1)
            p, p_old = sigmoid(theta), sigmoid(theta_old)
            w = np.where(verdicts == Verdict.ABSTAIN, p / p_old, (1 - p) / (1 - p_old))
            if np.min(np.abs(np.concatenate([w - 1 + eps, w - 1 - eps]))) < 1e-3:
                continue
            fd = central_difference(
                lambda t: reference_objective(t, theta_old, theta_ref, verdicts, advantages, eps, beta), theta, h=1e-6
            )
            g = surrogate_grad(theta, theta_old, theta_ref, verdicts, advantages, eps, beta)
            if g != fd:
                worst = max(worst, abs(g - fd) / max(abs(g), abs(fd)))
            n += 1
    record_property("detail", f"worst relative error {worst:.2e} over {n} points, {b.elapsed:.1f}s")
    assert worst < 1e-4
    assert b.elapsed < b.seconds


# 8 ---------------------------------------------------------------------------

@pytest.mark.criterion(8, "compute_metrics agrees exactly with a brute-force confusion matrix")
def test_c8_metrics_oracle(record_property):
    rng = np.random.default_rng(8)
    undefined = 0
    with Budget(5) as b:
        for _ in range(1000):
            n = int(rng.integers(1, 30))
            p_answerable, p_abstain = rng.choice([0.0, 0.5, 1.0]), rng.choice([0.0, 0.3, 1.0])
            answerable = rng.random(n) < p_answerable
            abstained = rng.random(n) < p_abstain
            correct = answerable & ~abstained & (rng.random(n) < 0.6)
            entries = list(zip(range(n), answerable.tolist(), abstained.tolist(), correct.tolist()))
            rec = EvaluationRecord.from_entries(entries)
            f1, recall, precision, acc, acc_att = confusion_oracle(entries)
            m = compute_metrics(rec)
            assert (m.abstention_f1, m.abstention_recall, m.abstention_precision, m.accuracy) == (f1, recall, precision, acc)
            assert compute_metrics(rec, ACCURACY_ATTEMPTED_ONLY).accuracy == acc_att
            undefined += None in (f1, recall, precision, acc)
    record_property("detail", f"1000 records, {undefined} with an undefined metric, {b.elapsed:.1f}s")
    assert undefined > 0
    assert b.elapsed < b.seconds


# 9 ---------------------------------------------------------------------------

@pytest.mark.criterion(9, "two `run` executions produce byte-identical training.csv and metrics.json")
def test_c9_determinism(tmp_path, record_property):
    cfg = ExperimentConfig(bank_grid=GRID, bank_copies=2, steps=100, eval_samples=200, seed=11)
    path = tmp_path / "config.json"
    path.write_text(cfg.to_json())
    with Budget(60) as b:
        for name in ("a", "b"):
            subprocess.run(
                [sys.executable, "-m", "tiar_lab", "run", "--config", str(path), "--out", str(tmp_path / name)],
                check=True, capture_output=True,
            )
    run_a, run_b = tmp_path / "a" / cfg.run_id, tmp_path / "b" / cfg.run_id
    for name in ("training.csv", "metrics.json"):
        assert (run_a / name).read_bytes() == (run_b / name).read_bytes()
    assert json.loads((run_a / "config.json").read_text()) == json.loads(path.read_text())
    record_property("detail", f"{b.elapsed:.1f}s")
    assert b.elapsed < b.seconds
