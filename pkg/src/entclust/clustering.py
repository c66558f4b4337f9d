"""Inference: assign each sample to the minimum-output neuron's cluster.

The minimum output is equivalently the maximum normalized complement
probability, which doubles as the assignment's confidence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, InputError
from .network import Network, atomic_write_text, forward
from .objective import complement_distribution


@dataclass
class ClusterResult:
    """Per-sample assignments, in input order.

    confidences holds the chosen cluster's complement probability; it is
    None for methods that have no probabilistic reading (e.g. k-means).
    """

    assignments: np.ndarray
    confidences: np.ndarray | None = None


def assign(net: Network, x) -> tuple[int, float]:
    """Cluster index (argmin of the outputs, ties to the lowest index) and confidence."""
    trace = forward(net, x)
    outputs = trace.output
    index = int(np.argmin(outputs))
    dist = complement_distribution(outputs)
    return index, float(dist.probs[index])


def assign_batch(net: Network, data) -> ClusterResult:
    """assign() applied to every row of data.features, order preserved."""
    features = np.asarray(data.features, dtype=np.float64)
    if features.ndim != 2:
        raise InputError("features must be a 2-D matrix")
    n = features.shape[0]
    assignments = np.empty(n, dtype=np.int64)
    confidences = np.empty(n, dtype=np.float64)
    for i in range(n):
        try:
            assignments[i], confidences[i] = assign(net, features[i])
        except InputError as exc:
            raise InputError(f"sample {i}: {exc}") from exc
    return ClusterResult(assignments, confidences)


def write_assignments(path, result: ClusterResult):
    """Two-column CSV (sample index, cluster), plus confidence when present."""
    with_conf = result.confidences is not None
    header = "sample,cluster,confidence" if with_conf else "sample,cluster"
    lines = [header]
    for i, c in enumerate(result.assignments):
        if with_conf:
            lines.append(f"{i},{int(c)},{result.confidences[i]!r}")
        else:
            lines.append(f"{i},{int(c)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_assignments(path) -> ClusterResult:
    """Read a file written by write_assignments."""
    try:
        with open(path, "r", encoding="ascii") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read assignments file {path}: {exc}") from exc
    if not lines or lines[0] not in ("sample,cluster", "sample,cluster,confidence"):
        raise DataError(f"assignments file {path}: unrecognized header")
    with_conf = lines[0].endswith("confidence")
    assignments = []
    confidences = [] if with_conf else None
    for ln, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        try:
            if with_conf:
                _, cluster, conf = parts
                confidences.append(float(conf))
            else:
                _, cluster = parts
            assignments.append(int(cluster))
        except ValueError as exc:
            raise DataError(f"assignments file {path}: bad row at line {ln}") from exc
    return ClusterResult(
        np.asarray(assignments, dtype=np.int64),
        np.asarray(confidences) if with_conf else None,
    )
