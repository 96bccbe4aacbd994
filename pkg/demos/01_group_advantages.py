"""
Group-relative advantages for one question
==========================================

Eight sampled answers, each correct, wrong or an abstention. We look at the
advantages each trajectory receives under plain ternary rewards, under the
coupled dynamic reward, and after the decoupled TIAR shift.
"""
import numpy as np

from tiar_lab import Group, coupled_advantages, group_means, normalize_advantages, tiar_adjust

np.set_printoptions(precision=4, suppress=True)

# A hard question: 2 correct, 4 wrong, 2 abstentions -> p_hat = 1/3
group = Group.from_counts(2, 4, 2)
print("verdicts (0=correct 1=wrong 2=abstain):", group.verdicts)
print("p_hat:", group.p_hat)

ternary = normalize_advantages(group)
print("ternary advantages:      ", ternary.values)

# The coupled variant swaps the abstention reward for 1 - 2 p_hat *before*
# normalising, which moves the group mean and std for everybody.
coupled = coupled_advantages(group)
print("coupled advantages:      ", coupled.values)
print("group means (ternary, dynamic):", group_means(2, 4, 2))

# TIAR keeps the ternary statistics and only shifts the abstentions.
shifted = tiar_adjust(ternary, group, lam=1.0)
print("TIAR advantages (lam=1): ", shifted.values)

# The correct trajectories lose signal under coupling but not under TIAR.
print("correct-answer advantage: ternary %.4f, coupled %.4f, TIAR %.4f"
      % (ternary.values[0], coupled.values[0], shifted.values[0]))

# Sweep every composition of G = 8 and count where coupling hurts correct answers.
from tiar_lab.advantages import compositions

hurt = total = 0
for n_c, n_w, n_a in compositions(8):
    if min(n_c, n_w, n_a) == 0 or n_c / (n_c + n_w) >= 0.5:
        continue
    g = Group.from_counts(n_c, n_w, n_a)
    total += 1
    hurt += coupled_advantages(g).values[0] < normalize_advantages(g).values[0]
print(f"coupling lowers the correct-answer advantage in {hurt}/{total} hard compositions")
