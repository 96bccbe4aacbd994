"""Independent reference computations used as test oracles.

Nothing here imports tiar_lab; each function is written straight from the
defining formula with plain Python / numpy scalars.
"""
import math
import statistics

ABSTAIN = 2


def pop_normalize(rewards):
    mean = statistics.fmean(rewards)
    std = statistics.pstdev(rewards)
    if std == 0:
        return [0.0] * len(rewards)
    return [(r - mean) / std for r in rewards]


def reference_objective(theta, theta_old, theta_ref, verdicts, advantages, eps, beta):
    """Clipped surrogate minus beta * KL(pi_theta || pi_ref), term by term."""
    def prob(t, abstain):
        pa = 1.0 / (1.0 + math.exp(-t))
        return pa if abstain else 1.0 - pa

    total = 0.0
    for v, a in zip(verdicts, advantages):
        w = prob(theta, v == ABSTAIN) / prob(theta_old, v == ABSTAIN)
        total += min(w * a, min(max(w, 1 - eps), 1 + eps) * a)
    p, q = prob(theta, True), prob(theta_ref, True)
    kl = p * math.log(p / q) + (1 - p) * math.log((1 - p) / (1 - q))
    return total / len(verdicts) - beta * kl


def central_difference(f, x, h=1e-6):
    return (f(x + h) - f(x - h)) / (2 * h)


def confusion_oracle(entries):
    """Loop-based confusion counts -> (f1, recall, precision, accuracy, accuracy_attempted_only)."""
    tp = fp = fn = n_correct = n_answerable = n_answerable_attempted = 0
    for _, answerable, abstained, correct in entries:
        if abstained and not answerable:
            tp += 1
        elif abstained and answerable:
            fp += 1
        elif not abstained and not answerable:
            fn += 1
        if answerable:
            n_answerable += 1
            if not abstained:
                n_answerable_attempted += 1
        if correct:
            n_correct += 1
    recall = tp / (tp + fn) if tp + fn else None
    precision = tp / (tp + fp) if tp + fp else None
    if recall is None or precision is None:
        f1 = None
    elif precision + recall == 0:
        f1 = 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    acc = n_correct / n_answerable if n_answerable else None
    acc_att = n_correct / n_answerable_attempted if n_answerable_attempted else None
    return f1, recall, precision, acc, acc_att
