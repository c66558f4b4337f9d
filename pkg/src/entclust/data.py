"""Tabular dataset loading, min-max normalization, and synthetic fixtures.

The six UCI benchmark sets are described by a checked-in manifest
(uci_manifest.json); the files themselves are never downloaded here.
"""

from __future__ import annotations

import csv
import json
import os
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DataError, InputError
from .network import atomic_write_text

DATA_DIR_ENV = "ENTCLUST_DATA_DIR"


@dataclass
class Dataset:
    """An immutable feature matrix with optional dense integer labels.

    provenance records where the data came from and what preprocessing
    was applied (e.g. normalization parameters, for reuse at inference).
    """

    features: np.ndarray
    labels: np.ndarray | None = None
    feature_names: list[str] | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2 or self.features.shape[0] < 1 or self.features.shape[1] < 1:
            raise InputError(f"features must be a nonempty 2-D matrix, got shape {self.features.shape}")
        if not np.all(np.isfinite(self.features)):
            raise InputError("features contain non-finite entries")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.features.shape[0],):
                raise InputError("labels length must equal the sample count")
            if np.any(self.labels < 0):
                raise InputError("labels must be nonnegative dense integers")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def num_classes(self) -> int:
        if self.labels is None:
            raise InputError("dataset has no labels")
        return int(self.labels.max()) + 1


@dataclass(frozen=True)
class DatasetDescriptor:
    """Expected shape and parse settings for a named benchmark file."""

    name: str
    filename: str
    url: str
    rows: int
    features: int
    classes: int
    delimiter: str = ","
    has_header: bool = False
    label_col: int | None = -1
    drop_first_col: bool = False
    rows_alternate: int | None = None
    note: str = ""


def _load_manifest() -> dict[str, DatasetDescriptor]:
    text = resources.files("entclust").joinpath("uci_manifest.json").read_text()
    raw = json.loads(text)
    out = {}
    for name, entry in raw.items():
        if name.startswith("_"):
            continue
        out[name] = DatasetDescriptor(name=name, **entry)
    return out


UCI_DATASETS = _load_manifest()


def data_dir() -> Path:
    """Directory searched for benchmark files: $ENTCLUST_DATA_DIR or ./data."""
    return Path(os.environ.get(DATA_DIR_ENV, "data"))


def load_csv(
    path,
    descriptor: DatasetDescriptor | None = None,
    *,
    delimiter: str = ",",
    has_header: bool = False,
    label_col: int | None = -1,
    drop_first_col: bool = False,
) -> Dataset:
    """Load a delimited text file into a Dataset.

    The label column (if any) is excluded from the features and its
    values mapped to dense integers in first-appearance order. With a
    descriptor, parse settings come from it and row/feature counts are
    validated; a class-count divergence is recorded and warned about,
    not rejected (public files are known to drift from published counts).
    """
    if descriptor is not None:
        delimiter = descriptor.delimiter
        has_header = descriptor.has_header
        label_col = descriptor.label_col
        drop_first_col = descriptor.drop_first_col

    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh, delimiter=delimiter))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    rows = [(ln, row) for ln, row in enumerate(rows, start=1) if row and any(c.strip() for c in row)]
    names = None
    if has_header:
        if not rows:
            raise DataError(f"{path}: empty file, header expected")
        names = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: no data rows")

    width = len(rows[0][1])
    start_col = 1 if drop_first_col else 0
    if label_col is None:
        label_idx = None
    else:
        label_idx = label_col if label_col >= 0 else width + label_col
        if not (start_col <= label_idx < width):
            raise DataError(f"{path}: label column {label_col} out of range for width {width}")

    features = []
    raw_labels = []
    for ln, row in rows:
        if len(row) != width:
            raise DataError(f"{path}: line {ln}: expected {width} fields, found {len(row)}")
        try:
            features.append(
                [float(c) for j, c in enumerate(row) if j >= start_col and j != label_idx]
            )
        except ValueError as exc:
            raise DataError(f"{path}: line {ln}: {exc}") from exc
        if label_idx is not None:
            raw_labels.append(row[label_idx].strip())

    labels = None
    class_names = None
    if label_idx is not None:
        mapping: dict[str, int] = {}
        labels = np.empty(len(raw_labels), dtype=np.int64)
        for i, value in enumerate(raw_labels):
            labels[i] = mapping.setdefault(value, len(mapping))
        class_names = list(mapping)

    if names is not None:
        names = [c for j, c in enumerate(names) if j >= start_col and j != label_idx]

    data = Dataset(
        features=np.asarray(features, dtype=np.float64),
        labels=labels,
        feature_names=names,
        provenance={"source": os.fspath(path)},
    )
    if class_names is not None:
        data.provenance["class_names"] = class_names

    if descriptor is not None:
        accepted_rows = {descriptor.rows}
        if descriptor.rows_alternate is not None:
            accepted_rows.add(descriptor.rows_alternate)
        if data.n not in accepted_rows:
            raise DataError(
                f"{path}: expected {descriptor.rows} rows per descriptor "
                f"{descriptor.name!r}, found {data.n}"
            )
        if data.dim != descriptor.features:
            raise DataError(
                f"{path}: expected {descriptor.features} feature columns per descriptor "
                f"{descriptor.name!r}, found {data.dim}"
            )
        found_classes = data.num_classes if labels is not None else 0
        data.provenance["descriptor"] = descriptor.name
        data.provenance["class_count_expected"] = descriptor.classes
        data.provenance["class_count_found"] = found_classes
        if found_classes != descriptor.classes:
            warnings.warn(
                f"{descriptor.name}: file has {found_classes} distinct labels, "
                f"published count is {descriptor.classes}; keeping the on-disk count",
                stacklevel=2,
            )
    return data


def load_uci(name: str, directory=None) -> Dataset:
    """Load one of the six manifest datasets from the data directory."""
    if name not in UCI_DATASETS:
        raise DataError(f"unknown dataset {name!r}; manifest has {sorted(UCI_DATASETS)}")
    desc = UCI_DATASETS[name]
    directory = Path(directory) if directory is not None else data_dir()
    path = directory / desc.filename
    if not path.exists():
        raise DataError(
            f"{name}: file {path} not found; download it from {desc.url} "
            f"(scripts/fetch_uci.py automates this) or set ${DATA_DIR_ENV}"
        )
    return load_csv(path, desc)


def save_csv(data: Dataset, path, delimiter: str = ","):
    """Write features (shortest round-trip float format) with labels last.

    Reloading reproduces features to full precision; labels round-trip
    exactly whenever they are dense and in first-appearance order, which
    holds for everything produced by load_csv and make_blobs.
    """
    lines = []
    for i in range(data.n):
        cells = [repr(v) for v in data.features[i]]
        if data.labels is not None:
            cells.append(str(int(data.labels[i])))
        lines.append(delimiter.join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")


def normalize_minmax(data: Dataset) -> Dataset:
    """Affinely map each feature column onto [0, 1]; constant columns go to 0.5.

    The per-column (min, max) pairs land in provenance['normalization']
    so the same map can be replayed on inference-time inputs. Idempotent
    on already-normalized data.
    """
    lo = data.features.min(axis=0)
    hi = data.features.max(axis=0)
    span = hi - lo
    constant = span == 0.0
    safe_span = np.where(constant, 1.0, span)
    normalized = (data.features - lo) / safe_span
    normalized[:, constant] = 0.5
    provenance = dict(data.provenance)
    provenance["normalization"] = {"col_min": lo.tolist(), "col_max": hi.tolist()}
    return Dataset(
        features=normalized,
        labels=None if data.labels is None else data.labels.copy(),
        feature_names=data.feature_names,
        provenance=provenance,
    )


def apply_normalization(features, normalization: dict) -> np.ndarray:
    """Replay a recorded min-max map on new feature rows."""
    lo = np.asarray(normalization["col_min"], dtype=np.float64)
    hi = np.asarray(normalization["col_max"], dtype=np.float64)
    span = hi - lo
    constant = span == 0.0
    out = (np.asarray(features, dtype=np.float64) - lo) / np.where(constant, 1.0, span)
    out[..., constant] = 0.5
    return out


def make_blobs(centers, per_center: int, spread: float, seed: int) -> Dataset:
    """Isotropic Gaussian blobs around the given centers, labeled by center index."""
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[0] == 0:
        raise InputError("centers must be a nonempty list of points")
    if per_center < 1:
        raise InputError(f"per_center must be >= 1, got {per_center}")
    if not (np.isfinite(spread) and spread > 0):
        raise InputError(f"spread must be positive, got {spread}")
    rng = np.random.default_rng(seed)
    parts = []
    labels = []
    for k, center in enumerate(centers):
        parts.append(center + spread * rng.standard_normal((per_center, centers.shape[1])))
        labels.extend([k] * per_center)
    return Dataset(
        features=np.vstack(parts),
        labels=np.asarray(labels, dtype=np.int64),
        provenance={"source": f"make_blobs(seed={seed}, spread={spread})"},
    )
