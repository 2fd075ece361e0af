"""Experiment configuration: a flat key/value document mirrored by a dataclass.

Example (TOML)::

    workers = 15
    dimension = 20
    rounds = 2000
    initial_phase = 100
    learning_rate = 0.001
    batch_mode = 4
    objective = "logistic"
    decoder = "fv"
    seed = 7
"""

from __future__ import annotations

import dataclasses
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DECODERS = ("mv", "wmv", "fv", "signgd", "sgd")
OBJECTIVES = ("quadratic", "logistic", "mlp")
CHANNELS = ("real", "synthetic")

SMALL_BATCH = 4
AVERAGE_BATCH = 64
_SMALL_FRACTION = {1: 0.0, 2: 0.6, 3: 0.8}


class ConfigError(ValueError):
    pass


def batch_mode_preset(mode: int, workers: int) -> list[int]:
    """Batch sizes for a heterogeneity preset, large-batch workers first.

    Mode 1 is homogeneous; modes 2 and 3 give round(0.6 M) / round(0.8 M)
    workers a batch of 4; mode 4 gives every worker but the first a batch of 4.
    The large batches share the rest of the 64 * M total, any integer
    remainder going one sample at a time to the first large workers.
    """
    if mode not in (1, 2, 3, 4):
        raise ConfigError(f"batch mode must be 1-4, got {mode}")
    if workers < 1:
        raise ConfigError("need at least one worker")
    if mode == 4:
        n_small = workers - 1
    else:
        n_small = int(math.floor(_SMALL_FRACTION[mode] * workers + 0.5))
    n_small = min(n_small, workers - 1)
    n_large = workers - n_small
    remaining = AVERAGE_BATCH * workers - SMALL_BATCH * n_small
    base, extra = divmod(remaining, n_large)
    large = [base + 1 if i < extra else base for i in range(n_large)]
    return large + [SMALL_BATCH] * n_small


@dataclass
class ExperimentConfig:
    workers: int = 15
    dimension: int = 20
    rounds: int = 200
    initial_phase: int = 100
    learning_rate: float | str = 1e-3
    batch_mode: int | None = 1
    batches: list[int] | None = None
    objective: str = "logistic"
    decoder: str = "fv"
    seed: int = 0
    clamp_eps: float = 1e-3
    channel: str = "real"
    crossover: float | list[float] | None = None
    crossover_max: float | None = None
    pooled_estimates: bool = False
    oracle_draws: int = 32
    samples: int | None = None
    data_seed: int | None = None
    sigma: float = 1.0
    separation: float = 3.0
    class_balance: float = 0.5
    l2: float = 1e-3
    hidden: int = 8
    classes: int = 4
    csv_path: str | None = None
    track_mv: bool = True
    extra: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.validate()

    def validate(self):
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        for name in ("workers", "dimension", "rounds"):
            v = getattr(self, name)
            need(isinstance(v, int) and v >= 1, f"{name} must be a positive integer, got {v!r}")
        need(isinstance(self.initial_phase, int) and 0 <= self.initial_phase <= self.rounds,
             f"initial_phase must lie in [0, rounds], got {self.initial_phase}")
        if isinstance(self.learning_rate, str):
            need(self.learning_rate == "theorem1", "learning_rate must be positive or 'theorem1'")
        else:
            need(self.learning_rate > 0 and math.isfinite(self.learning_rate), "learning_rate must be positive")
        need(self.decoder in DECODERS, f"decoder must be one of {DECODERS}, got {self.decoder!r}")
        need(self.objective in OBJECTIVES, f"objective must be one of {OBJECTIVES}, got {self.objective!r}")
        need(self.channel in CHANNELS, f"channel must be one of {CHANNELS}, got {self.channel!r}")
        need(0.0 < self.clamp_eps < 0.5, "clamp_eps must lie in (0, 0.5)")
        need(isinstance(self.seed, int) and 0 <= self.seed < 2**64, "seed must be a 64-bit unsigned integer")
        if self.batches is not None:
            need(len(self.batches) == self.workers, f"batches lists {len(self.batches)} sizes for {self.workers} workers")
            need(all(isinstance(b, int) and b >= 1 for b in self.batches), "batch sizes must be positive integers")
        else:
            need(self.batch_mode is not None, "give either batches or batch_mode")
            batch_mode_preset(self.batch_mode, self.workers)
        if self.channel == "synthetic":
            need(self.decoder != "sgd", "full-precision SGD needs real gradients (channel = 'real')")
            need(self.crossover is not None or self.crossover_max is not None,
                 "synthetic channel needs crossover or crossover_max")
            if self.crossover is not None:
                cs = self.crossover if isinstance(self.crossover, list) else [self.crossover]
                need(len(cs) in (1, self.workers), "crossover needs one value or one per worker")
                need(all(0.0 <= c <= 1.0 for c in cs), "crossover probabilities must lie in [0, 1]")
            if self.crossover_max is not None:
                need(0.0 < self.crossover_max <= 0.5, "crossover_max must lie in (0, 0.5]")
        need(self.oracle_draws >= 1, "oracle_draws must be positive")
        need(self.sigma >= 0, "sigma must be nonnegative")
        need(0.0 < self.class_balance < 1.0, "class_balance must lie in (0, 1)")
        need(1 <= self.hidden <= 32, "hidden must lie in [1, 32]")
        need(self.classes >= 2, "classes must be at least 2")
        if self.samples is not None:
            need(self.samples >= self.workers, "need at least one sample per worker")

    @property
    def batch_sizes(self) -> list[int]:
        if self.batches is not None:
            return list(self.batches)
        return batch_mode_preset(self.batch_mode, self.workers)

    @property
    def dataset_samples(self) -> int:
        if self.samples is not None:
            return self.samples
        # every shard must hold the largest batch
        return max(self.batch_sizes) * self.workers

    @property
    def dataset_seed(self) -> int:
        return self.seed if self.data_seed is None else self.data_seed

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("extra")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_mapping(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)} - {"extra"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    """Read a TOML or JSON config file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        if path.suffix == ".json":
            data = json.loads(text)
        else:
            data = tomllib.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return ExperimentConfig.from_mapping(data)
