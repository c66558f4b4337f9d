"""Run configuration: a flat key = value file with one section per module.

Everything that affects results lives here (seeds included), so a config
file is a complete, archivable description of a run; command-line flags
only carry file paths and verbosity.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from .data import UCI_DATASETS, Dataset, load_csv, load_uci, normalize_minmax
from .errors import ConfigError, DataError
from .network import NetworkConfig
from .training import TrainConfig

DEFAULT_CONFIG = """\
# entclust run configuration. Every value that affects results lives in
# this file; flags on the command line only choose file paths.

[network]
# comma-separated hidden layer widths; empty means no hidden layer
hidden_sizes = 8
# number of clusters = output layer width
cluster_count = 2
include_bias = true
init_scale = 0.5
activation = logistic
seed = 0

[training]
learning_rate = 0.01
lambda = 1.0
max_epochs = 500
# epoch-to-epoch |delta J| convergence threshold
tolerance = 1e-6
# per-sample or full-batch
update_mode = full-batch
# per-sample or batch-mean (batch-mean needs full-batch updates)
entropy_scope = per-sample
seed = 0

[data]
# either a named benchmark set from the manifest ...
dataset =
# ... or an explicit file with parse options
path =
delimiter = ,
has_header = false
# column index of the label; empty for unlabeled data
label_col = -1
drop_first_col = false
# min-max scale every feature column onto [0, 1]
normalize = true

[output]
model = model.txt
report = report.csv
assignments = assignments.csv
table = contingency.csv
sweep = sweep.csv
"""

_BOOL = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def _as_bool(section, key, value):
    try:
        return _BOOL[value.strip().lower()]
    except KeyError:
        raise ConfigError(f"[{section}] {key}: expected a boolean, got {value!r}") from None


def _as_int(section, key, value):
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected an integer, got {value!r}") from None


def _as_float(section, key, value):
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected a number, got {value!r}") from None


@dataclass(frozen=True)
class DataSpec:
    dataset: str | None = None
    path: str | None = None
    delimiter: str = ","
    has_header: bool = False
    label_col: int | None = -1
    drop_first_col: bool = False
    normalize: bool = True


@dataclass(frozen=True)
class RunConfig:
    """Union of the per-module settings, parsed from one INI file."""

    hidden_sizes: tuple[int, ...] = (8,)
    cluster_count: int = 2
    include_bias: bool = True
    init_scale: float = 0.5
    activation: str = "logistic"
    net_seed: int = 0
    training: TrainConfig = field(default_factory=TrainConfig)
    data: DataSpec = field(default_factory=DataSpec)
    outputs: dict = field(default_factory=dict)

    def network_config(self, input_dim: int) -> NetworkConfig:
        return NetworkConfig(
            input_dim=input_dim,
            hidden_sizes=self.hidden_sizes,
            cluster_count=self.cluster_count,
            activation=self.activation,
            include_bias=self.include_bias,
            init_scale=self.init_scale,
            seed=self.net_seed,
        )

    def output_path(self, key: str, override=None) -> str:
        if override:
            return str(override)
        defaults = {
            "model": "model.txt",
            "report": "report.csv",
            "assignments": "assignments.csv",
            "table": "contingency.csv",
            "sweep": "sweep.csv",
        }
        return self.outputs.get(key, defaults[key])


_KNOWN_KEYS = {
    "network": {"hidden_sizes", "cluster_count", "include_bias", "init_scale", "activation", "seed"},
    "training": {"learning_rate", "lambda", "max_epochs", "tolerance", "update_mode", "entropy_scope", "seed"},
    "data": {"dataset", "path", "delimiter", "has_header", "label_col", "drop_first_col", "normalize"},
    "output": {"model", "report", "assignments", "table", "sweep"},
}


def parse_run_config(text: str, source: str = "<config>") -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc

    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"{source}: unknown section [{section}]")
        unknown = set(parser[section]) - _KNOWN_KEYS[section]
        if unknown:
            raise ConfigError(f"{source}: unknown key(s) in [{section}]: {sorted(unknown)}")

    def get(section, key, default):
        if parser.has_option(section, key):
            return parser.get(section, key).strip()
        return default

    hidden_raw = get("network", "hidden_sizes", "8")
    try:
        hidden = tuple(int(h) for h in hidden_raw.split(",") if h.strip()) if hidden_raw else ()
    except ValueError:
        raise ConfigError(f"[network] hidden_sizes: expected comma-separated integers, got {hidden_raw!r}") from None

    label_raw = get("data", "label_col", "-1")
    label_col = None if label_raw == "" else _as_int("data", "label_col", label_raw)

    dataset = get("data", "dataset", "") or None
    if dataset is not None and dataset not in UCI_DATASETS:
        raise ConfigError(f"[data] dataset: unknown name {dataset!r}; manifest has {sorted(UCI_DATASETS)}")

    training = TrainConfig(
        learning_rate=_as_float("training", "learning_rate", get("training", "learning_rate", "0.01")),
        lam=_as_float("training", "lambda", get("training", "lambda", "1.0")),
        max_epochs=_as_int("training", "max_epochs", get("training", "max_epochs", "500")),
        tolerance=_as_float("training", "tolerance", get("training", "tolerance", "1e-6")),
        update_mode=get("training", "update_mode", "full-batch"),
        entropy_scope=get("training", "entropy_scope", "per-sample"),
        seed=_as_int("training", "seed", get("training", "seed", "0")),
    )

    outputs = dict(parser["output"]) if parser.has_section("output") else {}

    return RunConfig(
        hidden_sizes=hidden,
        cluster_count=_as_int("network", "cluster_count", get("network", "cluster_count", "2")),
        include_bias=_as_bool("network", "include_bias", get("network", "include_bias", "true")),
        init_scale=_as_float("network", "init_scale", get("network", "init_scale", "0.5")),
        activation=get("network", "activation", "logistic"),
        net_seed=_as_int("network", "seed", get("network", "seed", "0")),
        training=training,
        data=DataSpec(
            dataset=dataset,
            path=get("data", "path", "") or None,
            delimiter=get("data", "delimiter", ","),
            has_header=_as_bool("data", "has_header", get("data", "has_header", "false")),
            label_col=label_col,
            drop_first_col=_as_bool("data", "drop_first_col", get("data", "drop_first_col", "false")),
            normalize=_as_bool("data", "normalize", get("data", "normalize", "true")),
        ),
        outputs=outputs,
    )


def read_run_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_run_config(text, source=str(path))


def load_dataset(cfg: RunConfig) -> Dataset:
    """Load and (optionally) normalize the dataset a run config points at."""
    spec = cfg.data
    if spec.dataset:
        data = load_uci(spec.dataset)
    elif spec.path:
        data = load_csv(
            spec.path,
            delimiter=spec.delimiter,
            has_header=spec.has_header,
            label_col=spec.label_col,
            drop_first_col=spec.drop_first_col,
        )
    else:
        raise DataError("config names no dataset: set [data] dataset or [data] path")
    if spec.normalize:
        data = normalize_minmax(data)
    return data
