"""
Coupled reward versus decoupled advantage shift
===============================================

Half the bank is easy (p_true = 0.9), half is hard (p_true = 0.1). We train
ternary, coupled and TIAR policies from the same seeds and compare what
happens to each half.

In this simulator the policy only chooses between abstaining and
attempting; it cannot become better at answering. The weaker signal for
correct answers under coupling therefore shows up only through the
abstain/attempt contrast, and on easy questions the coupled reward
(abstain -> 1 - 2 p_hat < 0) discourages abstention *more* than ternary.
"""
import numpy as np

from tiar_lab import BankSpec, OptimizerConfig, build_bank, train

bank = build_bank(BankSpec(grid=[0.1, 0.9], copies=20))
hard, easy = bank.p_true < 0.5, bank.p_true > 0.5

for steps in (20, 200):
    print(f"after {steps} steps (lr 0.05, mean over 5 seeds)")
    for scheme in ("ternary", "coupled", "tiar"):
        probs = np.array([
            train(bank, OptimizerConfig(scheme=scheme, lam=1.0, steps=steps), seed=s).abstain_prob
            for s in range(5)
        ])
        print(f"  {scheme:8s} hard abstain {probs[:, hard].mean():.3f}   easy attempt {1 - probs[:, easy].mean():.3f}")
