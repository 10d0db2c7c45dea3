"""Flat `key = value` run configuration.

The format is plain UTF-8 text: one assignment per line, ``#`` starts a
comment, blank lines are ignored. Unknown keys are rejected by name so typos
cannot silently change a run. Every field has a default, and the effective
(post-default) configuration is what gets echoed into run records and hashed
for reproducibility checks.
"""

import hashlib
from dataclasses import dataclass, fields

from .data import Dataset, load_idx, synth_blobs, synth_digits
from .distill import (
    DEFAULT_ALPHA,
    DEFAULT_BALANCE,
    DEFAULT_BATCH,
    DEFAULT_TAU,
    REGIMES,
    DistillPlan,
    default_learning_rate,
)
from .errors import ConfigError

DATASET_KINDS = ("idx", "blobs", "digits")
ROLE_VALUES = ("teacher", "student")


@dataclass
class RunConfig:
    # plan
    regime: str = "separate"
    tau: float = DEFAULT_TAU
    balance_lambda: float = DEFAULT_BALANCE
    alpha: float = DEFAULT_ALPHA
    learning_rate: float = 0.0  # 0 means "regime default"
    epochs: int = 200
    batch_size: int = DEFAULT_BATCH
    seed: int = 0
    # model
    architecture: str = "lenet5"
    role: str = "teacher"
    teacher_architecture: str = ""
    # data
    dataset: str = "idx"
    train_images: str = ""
    train_labels: str = ""
    test_images: str = ""
    test_labels: str = ""
    blobs_classes: int = 2
    blobs_dim: int = 2
    blobs_per_class: int = 100
    blobs_spread: float = 0.1
    digits_train: int = 2000
    digits_test: int = 500
    digits_noise: float = 0.18
    digits_hard_fraction: float = 0.0
    digits_hard_noise: float = 0.75
    digits_label_noise: float = 0.0
    limit: int = 0  # 0 means "no limit"
    # io
    out_dir: str = "runs"
    teacher_checkpoint: str = ""
    source_checkpoint: str = ""
    checkpoints: str = ""  # comma-separated student checkpoint paths
    adversarial_set: str = ""
    # attack
    epsilon: float = 0.15
    max_iters: int = 10
    attack_samples: int = 1000

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ConfigError(f"unknown regime {self.regime!r}; expected one of {REGIMES}")
        if self.dataset not in DATASET_KINDS:
            raise ConfigError(f"unknown dataset kind {self.dataset!r}; expected one of {DATASET_KINDS}")
        if self.role not in ROLE_VALUES:
            raise ConfigError(f"role must be one of {ROLE_VALUES}, got {self.role!r}")
        if self.learning_rate == 0.0:
            self.learning_rate = default_learning_rate(self.regime)

    def to_plan(self) -> DistillPlan:
        return DistillPlan(
            regime=self.regime,
            tau=self.tau,
            balance_lambda=self.balance_lambda,
            alpha=self.alpha,
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            batch_size=self.batch_size,
            seed=self.seed,
        )

    def effective_items(self) -> dict[str, str]:
        """Canonical string rendering of every field, defaults included."""
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = repr(v) if isinstance(v, float) else str(v)
        return out

    def content_hash(self) -> str:
        canon = "\n".join(f"{k} = {v}" for k, v in sorted(self.effective_items().items()))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    def checkpoint_list(self) -> list[str]:
        return [p.strip() for p in self.checkpoints.split(",") if p.strip()]


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse `key = value` lines into a raw string map; duplicates are rejected."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def _field_type(t):
    if isinstance(t, str):
        return {"int": int, "float": float, "str": str}[t]
    return t


def config_from_items(raw: dict[str, str], source: str = "<config>") -> RunConfig:
    field_types = {f.name: _field_type(f.type) for f in fields(RunConfig)}
    kwargs = {}
    for key, value in raw.items():
        if key not in field_types:
            raise ConfigError(f"{source}: unknown config key {key!r}")
        caster = field_types[key]
        try:
            kwargs[key] = caster(value)
        except ValueError:
            raise ConfigError(
                f"{source}: key {key!r} expects {field_types[key].__name__}, got {value!r}"
            ) from None
    return RunConfig(**kwargs)


def load_config(path, overrides: dict[str, str] | None = None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    raw = parse_config_text(text, source=str(path))
    if overrides:
        raw.update(overrides)
    return config_from_items(raw, source=str(path))


def load_datasets(cfg: RunConfig) -> tuple[Dataset, Dataset]:
    """Build the (train, test) pair a config describes."""
    limit = cfg.limit if cfg.limit > 0 else None
    if cfg.dataset == "idx":
        for key in ("train_images", "train_labels", "test_images", "test_labels"):
            if not getattr(cfg, key):
                raise ConfigError(f"dataset = idx requires the {key!r} path")
        train = load_idx(cfg.train_images, cfg.train_labels, limit=limit, split="train")
        test = load_idx(cfg.test_images, cfg.test_labels, limit=limit, split="test")
        return train, test
    if cfg.dataset == "blobs":
        train = synth_blobs(cfg.blobs_classes, cfg.blobs_dim, cfg.blobs_per_class,
                            cfg.blobs_spread, cfg.seed, split="train")
        test = synth_blobs(cfg.blobs_classes, cfg.blobs_dim, cfg.blobs_per_class,
                           cfg.blobs_spread, cfg.seed + 1, split="test")
    else:  # digits
        train = synth_digits(cfg.digits_train, cfg.seed, noise=cfg.digits_noise,
                             hard_fraction=cfg.digits_hard_fraction, hard_noise=cfg.digits_hard_noise,
                             label_noise=cfg.digits_label_noise, split="train")
        test = synth_digits(cfg.digits_test, cfg.seed + 1, noise=cfg.digits_noise,
                            hard_fraction=cfg.digits_hard_fraction, hard_noise=cfg.digits_hard_noise,
                            label_noise=0.0, split="test")
    if limit:
        train, test = train.take(limit), test.take(limit)
    return train, test
