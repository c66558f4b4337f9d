"""Network representation, weight initialization, and the forward pass.

A network is a stack of logistic-activation layers: zero or more hidden
layers followed by an output layer whose width equals the number of
clusters. Every activation lies in (0, 1), so the complemented outputs
(1 - O) can be normalized into a probability distribution downstream.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, InputError

MODEL_FORMAT_TAG = "entclust-model"
MODEL_FORMAT_VERSION = 1

_MAX_SEED = 2**64


def sigmoid(z):
    """Numerically stable logistic function, elementwise."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True)
class NetworkConfig:
    """Architecture and initialization settings.

    hidden_sizes may be empty: the output layer then clusters raw
    features directly. Every hidden layer must have width >= 2 because a
    1-wide layer makes the normalized complement distribution degenerate.
    """

    input_dim: int
    hidden_sizes: tuple[int, ...] = ()
    cluster_count: int = 2
    activation: str = "logistic"
    include_bias: bool = True
    init_scale: float = 0.5
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        self.validate()

    def validate(self):
        if not isinstance(self.input_dim, int) or self.input_dim < 1:
            raise ConfigError(f"input_dim must be a positive integer, got {self.input_dim!r}")
        if not isinstance(self.cluster_count, int) or self.cluster_count < 2:
            raise ConfigError(f"cluster_count must be an integer >= 2, got {self.cluster_count!r}")
        for h in self.hidden_sizes:
            if h < 2:
                raise ConfigError(f"hidden_sizes entries must be >= 2, got {h}")
        if self.activation != "logistic":
            raise ConfigError(f"activation must be 'logistic', got {self.activation!r}")
        if not math.isfinite(self.init_scale) or self.init_scale < 0:
            raise ConfigError(f"init_scale must be finite and >= 0, got {self.init_scale!r}")
        if not isinstance(self.seed, int) or not (0 <= self.seed < _MAX_SEED):
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")

    @property
    def layer_widths(self) -> tuple[int, ...]:
        """Widths of all weighted layers, hidden first, output last."""
        return self.hidden_sizes + (self.cluster_count,)

    @property
    def fan_ins(self) -> tuple[int, ...]:
        """Input width of each layer, including the bias column if configured."""
        prev = (self.input_dim,) + self.hidden_sizes
        extra = 1 if self.include_bias else 0
        return tuple(p + extra for p in prev)


@dataclass
class Network:
    """Trainable state: a config plus one weight matrix per layer.

    weights[l] has shape (layer width, fan-in); the last matrix is the
    output layer. The bias weight, when present, is the final column.
    """

    config: NetworkConfig
    weights: list[np.ndarray]

    def check_shapes(self):
        widths = self.config.layer_widths
        fans = self.config.fan_ins
        if len(self.weights) != len(widths):
            raise InputError(
                f"expected {len(widths)} weight matrices, got {len(self.weights)}"
            )
        for l, w in enumerate(self.weights):
            if w.shape != (widths[l], fans[l]):
                raise InputError(
                    f"layer {l} weights have shape {w.shape}, expected {(widths[l], fans[l])}"
                )
            if not np.all(np.isfinite(w)):
                raise InputError(f"layer {l} weights contain non-finite entries")

    def copy(self) -> "Network":
        return Network(self.config, [w.copy() for w in self.weights])


@dataclass
class ForwardTrace:
    """Intermediate vectors of one forward evaluation.

    layer_inputs holds the pre-activations, layer_outputs the logistic
    activations; index -1 is the output layer. Kept around so the
    gradient pass does not have to recompute anything.
    """

    input: np.ndarray
    layer_inputs: list[np.ndarray] = field(default_factory=list)
    layer_outputs: list[np.ndarray] = field(default_factory=list)

    @property
    def output(self) -> np.ndarray:
        """Activations of the output (clustering) layer."""
        return self.layer_outputs[-1]

    @property
    def hidden_outputs(self) -> list[np.ndarray]:
        return self.layer_outputs[:-1]


def init_network(config: NetworkConfig) -> Network:
    """Create a network with weights drawn uniformly from [-init_scale, +init_scale].

    The generator is seeded from config.seed, so identical configs give
    bit-identical networks.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    weights = [
        rng.uniform(-config.init_scale, config.init_scale, size=(width, fan))
        for width, fan in zip(config.layer_widths, config.fan_ins)
    ]
    return Network(config, weights)


def extend_input(vec: np.ndarray, include_bias: bool) -> np.ndarray:
    """Append the constant bias entry when the network uses one."""
    if include_bias:
        return np.concatenate([vec, (1.0,)])
    return vec


def forward(net: Network, x) -> ForwardTrace:
    """Evaluate the network on one sample, retaining per-layer vectors.

    Pure function of (net, x): repeated calls give bitwise-equal traces.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != net.config.input_dim:
        raise InputError(
            f"input has shape {x.shape}, expected ({net.config.input_dim},)"
        )
    if not np.all(np.isfinite(x)):
        raise InputError("input contains non-finite entries")

    trace = ForwardTrace(input=x.copy())
    current = x
    for w in net.weights:
        z = w @ extend_input(current, net.config.include_bias)
        o = sigmoid(z)
        trace.layer_inputs.append(z)
        trace.layer_outputs.append(o)
        current = o
    return trace


def _format_float(v: float) -> str:
    return repr(float(v))


def save_network(net: Network, path):
    """Write the model file: config fields, then row-major weight matrices.

    The format is versioned plain text; floats use shortest round-trip
    representation so save/load is exact.
    """
    net.check_shapes()
    cfg = net.config
    lines = [f"{MODEL_FORMAT_TAG} {MODEL_FORMAT_VERSION}"]
    lines.append(f"input_dim={cfg.input_dim}")
    lines.append("hidden_sizes=" + ",".join(str(h) for h in cfg.hidden_sizes))
    lines.append(f"cluster_count={cfg.cluster_count}")
    lines.append(f"activation={cfg.activation}")
    lines.append(f"include_bias={int(cfg.include_bias)}")
    lines.append(f"init_scale={_format_float(cfg.init_scale)}")
    lines.append(f"seed={cfg.seed}")
    for l, w in enumerate(net.weights):
        lines.append(f"weights {l} {w.shape[0]} {w.shape[1]}")
        for row in w:
            lines.append(" ".join(_format_float(v) for v in row))
    lines.append("end")
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_network(path) -> Network:
    """Read a model file written by save_network."""
    try:
        with open(path, "r", encoding="ascii") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read model file {path}: {exc}") from exc

    def fail(msg):
        raise DataError(f"model file {path}: {msg}")

    if not lines:
        fail("empty file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != MODEL_FORMAT_TAG:
        fail("missing or unrecognized version tag")
    if int(head[1]) != MODEL_FORMAT_VERSION:
        fail(f"unsupported format version {head[1]}")

    fields = {}
    idx = 1
    while idx < len(lines) and "=" in lines[idx]:
        key, _, value = lines[idx].partition("=")
        fields[key.strip()] = value.strip()
        idx += 1
    try:
        hidden = fields["hidden_sizes"]
        config = NetworkConfig(
            input_dim=int(fields["input_dim"]),
            hidden_sizes=tuple(int(h) for h in hidden.split(",")) if hidden else (),
            cluster_count=int(fields["cluster_count"]),
            activation=fields["activation"],
            include_bias=bool(int(fields["include_bias"])),
            init_scale=float(fields["init_scale"]),
            seed=int(fields["seed"]),
        )
    except (KeyError, ValueError, ConfigError) as exc:
        fail(f"bad config block ({exc})")

    weights = []
    for l, (width, fan) in enumerate(zip(config.layer_widths, config.fan_ins)):
        if idx >= len(lines) or not lines[idx].startswith("weights "):
            fail(f"missing weights header for layer {l}")
        parts = lines[idx].split()
        if [int(parts[1]), int(parts[2]), int(parts[3])] != [l, width, fan]:
            fail(f"layer {l} header {lines[idx]!r} does not match config shape {(width, fan)}")
        idx += 1
        rows = []
        for _ in range(width):
            if idx >= len(lines):
                fail(f"truncated weights for layer {l}")
            try:
                row = [float(v) for v in lines[idx].split()]
            except ValueError as exc:
                fail(f"unparseable weight row at line {idx + 1} ({exc})")
            if len(row) != fan:
                fail(f"layer {l} row has {len(row)} entries, expected {fan}")
            rows.append(row)
            idx += 1
        weights.append(np.array(rows, dtype=np.float64))
    if idx >= len(lines) or lines[idx] != "end":
        fail("missing end marker")

    net = Network(config, weights)
    net.check_shapes()
    return net


def atomic_write_text(path, text: str):
    """Write text to path via a temp file + rename, so failures leave no partial output."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
