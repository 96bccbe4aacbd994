"""
Where ternary training puts the abstention threshold
====================================================

With rewards +1 / -1 / 0 attempting is worth 2p - 1, so a policy should
abstain exactly when its chance of being right is below one half. We train
the tabular policy on a grid of difficulties and read off the result.
"""
import numpy as np

from tiar_lab import BankSpec, OptimizerConfig, build_bank, train

bank = build_bank(BankSpec(grid=[round(0.1 * i, 1) for i in range(11)], copies=5))

policy = train(bank, OptimizerConfig(scheme="ternary", steps=300, learning_rate=0.2), seed=0)

abstain = policy.abstain_prob.reshape(11, 5).mean(axis=1)
for p, a in zip(np.unique(bank.p_true), abstain):
    bar = "#" * int(round(40 * a))
    print(f"p_true={p:.1f}  abstain={a:.3f}  {bar}")

# Questions at p_true = 0.5 are a coin flip for the policy and drift slowly,
# everything else has picked a side.
