"""Complement distributions, per-layer entropies, and the training objective.

Each layer's activations O are complemented and normalized into a
probability vector p_i = (1 - O_i) / sum_j (1 - O_j). The objective to
maximize is the entropy of the output layer's distribution minus lam
times the summed entropies of the hidden layers' distributions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .network import ForwardTrace, Network, forward

# Floor applied to probabilities inside logarithms; implements the
# 0 * log 0 = 0 convention and prevents -inf when an activation
# saturates to 1.0 in float64.
PROB_FLOOR = 1e-12

# Below this complement mass the normalization is meaningless and the
# distribution falls back to uniform.
DEGENERATE_SUM = 1e-12


@dataclass(frozen=True)
class ComplementDistribution:
    """Normalized complement of an activation vector.

    raw_sum is the denominator sum_j (1 - O_j); degenerate is set when it
    fell below DEGENERATE_SUM and probs was replaced by the uniform
    distribution.
    """

    probs: np.ndarray
    raw_sum: float
    degenerate: bool = False


@dataclass(frozen=True)
class ObjectiveBreakdown:
    """Objective value split into its per-layer terms (all in nats).

    total = output_entropy - lam * sum(hidden_entropies), reproducible
    from the parts to 1e-12.
    """

    output_entropy: float
    hidden_entropies: tuple[float, ...]
    lam: float
    total: float


def complement_distribution(outputs) -> ComplementDistribution:
    """Map layer activations to the normalized complement distribution."""
    outputs = np.asarray(outputs, dtype=np.float64)
    if outputs.ndim != 1 or outputs.size == 0:
        raise InputError("outputs must be a nonempty vector")
    if np.any(outputs < 0.0) or np.any(outputs > 1.0):
        raise InputError("outputs must lie in [0, 1]")
    raw = 1.0 - outputs
    s = float(np.sum(raw))
    if s < DEGENERATE_SUM:
        return ComplementDistribution(
            probs=np.full(outputs.size, 1.0 / outputs.size),
            raw_sum=s,
            degenerate=True,
        )
    return ComplementDistribution(probs=raw / s, raw_sum=s)


def entropy(dist: ComplementDistribution) -> float:
    """Shannon entropy -sum p ln p of the distribution, in nats."""
    p = dist.probs
    return float(-np.sum(p * np.log(np.clip(p, PROB_FLOOR, 1.0))))


def layer_entropy(outputs) -> float:
    """Entropy of a layer's complement distribution, straight from activations."""
    return entropy(complement_distribution(outputs))


def objective(net: Network, trace: ForwardTrace, lam: float) -> ObjectiveBreakdown:
    """Per-sample objective breakdown for a forward trace of net."""
    if lam < 0:
        raise InputError(f"lam must be nonnegative, got {lam}")
    hidden = tuple(layer_entropy(o) for o in trace.hidden_outputs)
    out = layer_entropy(trace.output)
    total = out - lam * sum(hidden)
    return ObjectiveBreakdown(out, hidden, lam, total)


def batch_objective(net: Network, features, lam: float, scope: str = "per-sample") -> ObjectiveBreakdown:
    """Objective of a batch of samples under the chosen entropy scope.

    per-sample: arithmetic mean of the per-sample breakdowns, exactly as
    the per-layer formulas read.

    batch-mean: the output term becomes the entropy of the batch-averaged
    output distribution (mean of the per-sample complement distributions);
    hidden terms stay per-sample means. This trades each sample's uniform
    push for a balanced assignment marginal. Both scopes coincide for a
    single-sample batch.

    Accumulation runs in fixed index order, so the result is deterministic.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise InputError("features must be a nonempty 2-D matrix")
    if scope not in ("per-sample", "batch-mean"):
        raise InputError(f"unknown entropy scope {scope!r}")
    if lam < 0:
        raise InputError(f"lam must be nonnegative, got {lam}")

    n = features.shape[0]
    n_hidden = len(net.config.hidden_sizes)
    hidden_sum = np.zeros(n_hidden)
    out_entropy_sum = 0.0
    out_prob_sum = np.zeros(net.config.cluster_count)
    for i in range(n):
        trace = forward(net, features[i])
        for l, o in enumerate(trace.hidden_outputs):
            hidden_sum[l] += layer_entropy(o)
        if scope == "per-sample":
            out_entropy_sum += layer_entropy(trace.output)
        else:
            out_prob_sum += complement_distribution(trace.output).probs

    hidden = tuple(hidden_sum / n)
    if scope == "per-sample":
        out = out_entropy_sum / n
    else:
        mean_probs = out_prob_sum / n
        out = float(-np.sum(mean_probs * np.log(np.clip(mean_probs, PROB_FLOOR, 1.0))))
    total = out - lam * sum(hidden)
    return ObjectiveBreakdown(out, hidden, lam, total)
