"""
Ablating the TIAR strength
==========================

lambda = 0 is the ternary baseline. Larger values add 1 - 2 p_hat to every
abstention advantage, pushing hard questions toward abstention sooner and
easy ones away from it. Runs go through the same harness as the CLI; outputs
land in a temporary directory.
"""
import tempfile

import numpy as np

from tiar_lab import ExperimentConfig, run_sweep

config = ExperimentConfig(
    bank_grid=[0.0, 0.1, 0.2, 0.5, 0.8, 0.9, 1.0],
    bank_copies=6,
    steps=60,
    learning_rate=0.2,
    eval_samples=400,
    sweep_lambdas=[0.0, 0.3, 0.5, 1.0],
    sweep_seeds=[0, 1, 2],
)

with tempfile.TemporaryDirectory() as out:
    results, rows = run_sweep(config, out)

print(f"{'lambda':>6} {'F1':>6} {'recall':>6} {'prec':>6} {'acc':>6} {'hard abst':>9} {'easy abst':>9}")
for lam in config.sweep_lambdas:
    mine = [r for r in rows if r["lambda"] == lam]
    avg = {k: np.mean([r[k] for r in mine]) for k in
           ("abstention_f1", "abstention_recall", "abstention_precision", "accuracy",
            "hard_abstain_prob", "easy_abstain_prob")}
    print(f"{lam:6.1f} {avg['abstention_f1']:6.3f} {avg['abstention_recall']:6.3f} "
          f"{avg['abstention_precision']:6.3f} {avg['accuracy']:6.3f} "
          f"{avg['hard_abstain_prob']:9.3f} {avg['easy_abstain_prob']:9.3f}")

# Trajectories of the mean abstain probability on p_true <= 0.2, first 30 steps
hard = results[0].bank.p_true <= 0.2
for lam in config.sweep_lambdas:
    hist = np.mean([r.abstain_history[:30, hard].mean(axis=1) for r in results if r.config.lam == lam], axis=0)
    print(f"lambda={lam:.1f}: " + " ".join(f"{x:.2f}" for x in hist[::5]))
