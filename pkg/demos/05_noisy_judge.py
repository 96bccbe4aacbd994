"""
Training through a noisy judge
==============================

The judge can mislabel verdicts before rewards are assigned, and p_hat is
computed from the mislabeled verdicts. A judge that misses abstentions
(reporting them as wrong answers) punishes the missed ones but also lowers
p_hat, which enlarges the TIAR shift for the abstentions it did recognise.
"""
import tempfile

from tiar_lab import ExperimentConfig, run_experiment

base = dict(bank_grid=[0.0, 0.2, 0.4, 0.6, 0.8, 1.0], bank_copies=5, steps=150,
            learning_rate=0.2, eval_samples=500)

settings = {
    "perfect judge": {},
    "flip 20% of correct": {"flip_correct": 0.2},
    "miss 20% of abstentions": {"miss_abstain": 0.2},
}
with tempfile.TemporaryDirectory() as out:
    for name, noise in settings.items():
        res = run_experiment(ExperimentConfig(**base, **noise), f"{out}/{name.replace(' ', '_')}")
        m = res.metrics
        print(f"{name:26s} F1 {m.abstention_f1:.3f}  recall {m.abstention_recall:.3f}  "
              f"precision {m.abstention_precision:.3f}  accuracy {m.accuracy:.3f}")
