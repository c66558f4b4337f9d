"""Gradient computation, the finite-difference oracle, and the ascent loop.

The analytic gradient is the exact reverse-mode derivative of the
objective in objective.py: each layer contributes a local entropy term
plus whatever is backpropagated from the layers above it. Correctness is
pinned by central finite differences, not by any closed-form reference.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import gmpy2
import numpy as np

from .errors import ConfigError, InputError, TrainingError
from .network import Network, NetworkConfig, extend_input, forward, init_network, atomic_write_text
from .objective import (
    DEGENERATE_SUM,
    PROB_FLOOR,
    ObjectiveBreakdown,
    batch_objective,
    complement_distribution,
    objective,
)

# One gradient matrix per layer, same shapes as Network.weights.
GradientSet = list[np.ndarray]

UPDATE_MODES = ("per-sample", "full-batch")
ENTROPY_SCOPES = ("per-sample", "batch-mean")


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one training run.

    tolerance is the epoch-to-epoch |delta J| below which the run counts
    as converged. entropy_scope batch-mean requires full-batch updates
    (the batch-averaged output distribution needs the whole batch).
    """

    learning_rate: float = 0.01
    lam: float = 1.0
    max_epochs: int = 500
    tolerance: float = 1e-6
    update_mode: str = "full-batch"
    entropy_scope: str = "per-sample"
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.learning_rate) and self.learning_rate > 0):
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate!r}")
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ConfigError(f"lambda must be nonnegative, got {self.lam!r}")
        if not isinstance(self.max_epochs, int) or self.max_epochs < 0:
            raise ConfigError(f"max_epochs must be a nonnegative integer, got {self.max_epochs!r}")
        if not (math.isfinite(self.tolerance) and self.tolerance > 0):
            raise ConfigError(f"tolerance must be positive, got {self.tolerance!r}")
        if self.update_mode not in UPDATE_MODES:
            raise ConfigError(f"update_mode must be one of {UPDATE_MODES}, got {self.update_mode!r}")
        if self.entropy_scope not in ENTROPY_SCOPES:
            raise ConfigError(f"entropy_scope must be one of {ENTROPY_SCOPES}, got {self.entropy_scope!r}")
        if self.entropy_scope == "batch-mean" and self.update_mode != "full-batch":
            raise ConfigError("entropy_scope=batch-mean requires update_mode=full-batch")
        if not isinstance(self.seed, int) or not (0 <= self.seed < 2**64):
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


@dataclass
class TrainReport:
    """Outcome of a training run.

    objective_history has one entry per completed epoch (the batch
    objective after that epoch's updates). wall_time_s is informational
    and never serialized, so result files stay byte-identical across runs.
    """

    epochs_run: int
    objective_history: list[float]
    converged: bool
    final_objective: float
    breakdown_history: list[ObjectiveBreakdown] = field(default_factory=list)
    wall_time_s: float = 0.0


def _entropy_grad_wrt_outputs(outputs: np.ndarray) -> np.ndarray:
    """d/dO of the layer's complement-distribution entropy.

    For p_i = (1 - O_i)/s: dH/dO_i = (H + ln p_i) / s. In the degenerate
    regime (s below threshold) the implemented entropy is constant, so
    the derivative is zero.
    """
    dist = complement_distribution(outputs)
    if dist.degenerate:
        return np.zeros_like(outputs)
    logp = np.log(np.clip(dist.probs, PROB_FLOOR, 1.0))
    h = float(-np.sum(dist.probs * logp))
    return (h + logp) / dist.raw_sum


def _backprop(net: Network, trace, d_output: np.ndarray, d_hidden: list) -> GradientSet:
    """Accumulate dJ/dW given direct dJ/dO terms for each layer.

    d_output is the direct derivative at the output layer; d_hidden[l]
    (or None) the direct derivative injected at hidden layer l. Standard
    reverse pass over the retained trace; bias columns receive the
    constant-1 input.
    """
    cfg = net.config
    grads: GradientSet = []
    n_layers = len(net.weights)

    upstream = None  # dJ/dO of the layer currently being processed
    deltas = [None] * n_layers
    for l in range(n_layers - 1, -1, -1):
        o = trace.layer_outputs[l]
        if l == n_layers - 1:
            dj_do = d_output
        else:
            dj_do = upstream.copy()
            if d_hidden[l] is not None:
                dj_do += d_hidden[l]
        delta = dj_do * o * (1.0 - o)
        deltas[l] = delta
        if l > 0:
            prev_width = trace.layer_outputs[l - 1].shape[0]
            upstream = net.weights[l][:, :prev_width].T @ delta

    for l in range(n_layers):
        layer_in = trace.input if l == 0 else trace.layer_outputs[l - 1]
        ext = extend_input(layer_in, cfg.include_bias)
        grads.append(np.outer(deltas[l], ext))
    return grads


def analytic_gradient(net: Network, x, lam: float) -> GradientSet:
    """Exact gradient of the per-sample objective with respect to every weight."""
    trace = forward(net, x)
    d_output = _entropy_grad_wrt_outputs(trace.output)
    d_hidden = [-lam * _entropy_grad_wrt_outputs(o) for o in trace.hidden_outputs]
    return _backprop(net, trace, d_output, d_hidden)


def batch_gradient(net: Network, features, lam: float, scope: str = "per-sample") -> GradientSet:
    """Gradient of the batch objective (see objective.batch_objective).

    per-sample scope: mean of the per-sample gradients. batch-mean scope:
    the output term differentiates the entropy of the batch-averaged
    output distribution, so every sample receives a shared coefficient
    vector evaluated at the mean. Accumulation order is fixed.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise InputError("features must be a nonempty 2-D matrix")
    if scope not in ENTROPY_SCOPES:
        raise InputError(f"unknown entropy scope {scope!r}")
    n = features.shape[0]
    total = [np.zeros_like(w) for w in net.weights]

    if scope == "per-sample":
        for i in range(n):
            g = analytic_gradient(net, features[i], lam)
            for acc, gw in zip(total, g):
                acc += gw
        for acc in total:
            acc /= n
        return total

    # batch-mean: two passes, first to get the averaged output distribution
    traces = [forward(net, features[i]) for i in range(n)]
    dists = [complement_distribution(t.output) for t in traces]
    mean_probs = np.mean([d.probs for d in dists], axis=0)
    log_mean = np.log(np.clip(mean_probs, PROB_FLOOR, 1.0))
    for trace, dist in zip(traces, dists):
        if dist.degenerate:
            d_output = np.zeros_like(dist.probs)
        else:
            d_output = (log_mean - float(dist.probs @ log_mean)) / (n * dist.raw_sum)
        d_hidden = [(-lam / n) * _entropy_grad_wrt_outputs(o) for o in trace.hidden_outputs]
        g = _backprop(net, trace, d_output, d_hidden)
        for acc, gw in zip(total, g):
            acc += gw
    return total


# --- finite-difference oracle -------------------------------------------

def central_difference(f, w: float, step: float) -> float:
    """Central-difference estimate (f(w+h) - f(w-h)) / (2h)."""
    return (f(w + step) - f(w - step)) / (2.0 * step)


def _objective_value(net: Network, x, lam: float) -> float:
    return objective(net, forward(net, x), lam).total


def _hp_objective(net: Network, x, lam: float, bits: int):
    """Objective evaluated in gmpy2 multi-precision arithmetic.

    Mirrors the float64 formulas (including the probability floor and the
    degenerate-sum fallback) so the finite-difference oracle is limited by
    truncation only, not by float64 rounding noise.
    """
    with gmpy2.local_context() as ctx:
        ctx.precision = bits
        one = gmpy2.mpfr(1)
        floor = gmpy2.mpfr(PROB_FLOOR)

        def layer_out(weights, prev):
            outs = []
            for row in weights:
                z = gmpy2.mpfr(0)
                for wv, pv in zip(row, prev):
                    z += gmpy2.mpfr(wv) * pv if isinstance(wv, float) else wv * pv
                outs.append(one / (one + gmpy2.exp(-z)))
            return outs

        def layer_entropy_hp(outs):
            raw = [one - o for o in outs]
            s = sum(raw, gmpy2.mpfr(0))
            if s < DEGENERATE_SUM:
                return gmpy2.log(gmpy2.mpfr(len(outs)))
            h = gmpy2.mpfr(0)
            for u in raw:
                p = u / s
                pc = p if p > floor else floor
                h -= p * gmpy2.log(pc)
            return h

        current = [gmpy2.mpfr(v) for v in x]
        entropies = []
        for w in net.weights:
            if net.config.include_bias:
                current = current + [one]
            current = layer_out(w, current)
            entropies.append(layer_entropy_hp(current))
        total = entropies[-1]
        lam_hp = gmpy2.mpfr(lam)
        for h in entropies[:-1]:
            total -= lam_hp * h
        return total


def finite_difference_gradient(
    net: Network, x, lam: float, step: float = 1e-6, precision_bits: int | None = None
) -> GradientSet:
    """Central-difference gradient of the per-sample objective.

    O(weights) forward evaluations per call; for tests and the gradcheck
    command only. With precision_bits set, the objective is evaluated in
    multi-precision arithmetic, leaving only the O(step^2) truncation
    error; the float64 path is subject to the usual rounding floor.
    """
    if step <= 0:
        raise InputError(f"step must be positive, got {step}")
    x = np.asarray(x, dtype=np.float64)
    grads: GradientSet = []
    work = net.copy()
    for l, w in enumerate(work.weights):
        g = np.zeros_like(w)
        for idx in np.ndindex(w.shape):
            orig = w[idx]
            if precision_bits is None:
                w[idx] = orig + step
                up = _objective_value(work, x, lam)
                w[idx] = orig - step
                down = _objective_value(work, x, lam)
                g[idx] = (up - down) / (2.0 * step)
            else:
                with gmpy2.local_context() as ctx:
                    ctx.precision = precision_bits
                    h = gmpy2.mpfr(step)
                    w[idx] = orig + step
                    up = _hp_objective(work, x, lam, precision_bits)
                    w[idx] = orig - step
                    down = _hp_objective(work, x, lam, precision_bits)
                    # the actual applied perturbations, exactly
                    span = gmpy2.mpfr(float(orig + step)) - gmpy2.mpfr(float(orig - step))
                    g[idx] = float((up - down) / span)
            w[idx] = orig
        grads.append(g)
    return grads


def gradient_error(analytic: GradientSet, reference: GradientSet, abs_floor: float = 1e-8) -> float:
    """Max componentwise |a - f| / max(|a|, |f|, abs_floor)."""
    worst = 0.0
    for a, f in zip(analytic, reference):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(f)), abs_floor)
        worst = max(worst, float(np.max(np.abs(a - f) / denom)))
    return worst


def random_gradcheck_case(rng: np.random.Generator):
    """Draw one (network, input, lam) triple in the small-net regime."""
    n_hidden = int(rng.integers(0, 3))
    hidden = tuple(int(rng.integers(2, 7)) for _ in range(n_hidden))
    cfg = NetworkConfig(
        input_dim=int(rng.integers(1, 7)),
        hidden_sizes=hidden,
        cluster_count=int(rng.integers(2, 7)),
        include_bias=bool(rng.integers(0, 2)),
        init_scale=float(rng.uniform(0.1, 1.2)),
        seed=int(rng.integers(0, 2**63)),
    )
    net = init_network(cfg)
    x = rng.uniform(-2.0, 2.0, size=cfg.input_dim)
    lam = float(rng.choice([0.0, 0.5, 1.0, 2.0]))
    return net, x, lam


def run_gradient_check(
    trials: int = 200,
    seed: int = 0,
    step: float = 1e-8,
    precision_bits: int | None = 120,
    perturb: float = 0.0,
) -> float:
    """Compare analytic and finite-difference gradients over random triples.

    Returns the worst relative error seen. perturb injects an offset into
    one analytic component per trial (a detector self-test hook).
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        net, x, lam = random_gradcheck_case(rng)
        a = analytic_gradient(net, x, lam)
        if perturb:
            a[0][0, 0] += perturb
        f = finite_difference_gradient(net, x, lam, step=step, precision_bits=precision_bits)
        worst = max(worst, gradient_error(a, f))
    return worst


# --- training loop --------------------------------------------------------

def _check_finite_gradient(grads: GradientSet, epoch: int):
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient at epoch {epoch}")


def _apply_update(net: Network, grads: GradientSet, rate: float):
    for w, g in zip(net.weights, grads):
        w += rate * g  # ascent: the objective is maximized


def train(net: Network, data, cfg: TrainConfig) -> TrainReport:
    """Gradient-ascent loop; mutates net in place and reports per-epoch J.

    per-sample mode shuffles with cfg.seed each epoch and updates after
    every sample; full-batch mode averages gradients and updates once per
    epoch. Stops when the epoch objective changes by less than
    cfg.tolerance, or at max_epochs.
    """
    features = np.asarray(data.features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise InputError("training data must contain at least one sample")
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    n = features.shape[0]

    previous = batch_objective(net, features, cfg.lam, cfg.entropy_scope).total
    if not math.isfinite(previous):
        raise TrainingError("non-finite objective before epoch 1")
    history: list[float] = []
    breakdowns: list[ObjectiveBreakdown] = []
    converged = False

    for epoch in range(1, cfg.max_epochs + 1):
        if cfg.update_mode == "per-sample":
            for i in rng.permutation(n):
                grads = analytic_gradient(net, features[i], cfg.lam)
                _check_finite_gradient(grads, epoch)
                _apply_update(net, grads, cfg.learning_rate)
        else:
            grads = batch_gradient(net, features, cfg.lam, cfg.entropy_scope)
            _check_finite_gradient(grads, epoch)
            _apply_update(net, grads, cfg.learning_rate)

        bd = batch_objective(net, features, cfg.lam, cfg.entropy_scope)
        if not math.isfinite(bd.total):
            raise TrainingError(f"non-finite objective at epoch {epoch}")
        history.append(bd.total)
        breakdowns.append(bd)
        if abs(bd.total - previous) < cfg.tolerance:
            converged = True
            break
        previous = bd.total

    final = history[-1] if history else previous
    return TrainReport(
        epochs_run=len(history),
        objective_history=history,
        converged=converged,
        final_objective=final,
        breakdown_history=breakdowns,
        wall_time_s=time.perf_counter() - t0,
    )


def write_train_report(path, report: TrainReport):
    """One CSV row per epoch: index, objective, and its per-term breakdown."""
    lines = ["epoch,objective,output_entropy,hidden_entropy_sum"]
    for i, bd in enumerate(report.breakdown_history, start=1):
        lines.append(
            f"{i},{bd.total!r},{bd.output_entropy!r},{sum(bd.hidden_entropies)!r}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")
