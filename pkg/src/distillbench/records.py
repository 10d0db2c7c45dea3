"""Run records: the serializable evidence trail for every command.

A RunRecord echoes the effective configuration and its hash, the seed, the
per-epoch training curve, and the final metrics. JSON round-trips are
lossless (floats survive via repr-based encoding), so any reported value can
be re-derived or audited later.
"""

import json
from dataclasses import asdict, dataclass, field


@dataclass
class EpochStats:
    train_loss: float | None
    test_accuracy: float | None
    included_samples: int
    presented_samples: int
    lambda_mean: float | None = None


@dataclass
class RunRecord:
    command: str
    regime: str | None
    seed: int
    config: dict = field(default_factory=dict)
    config_hash: str = ""
    epochs: list[EpochStats] = field(default_factory=list)
    final: dict = field(default_factory=dict)
    wall_clock_seconds: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        raw = json.loads(text)
        raw["epochs"] = [EpochStats(**e) for e in raw.get("epochs", [])]
        return cls(**raw)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json())
            f.write("\n")

    @classmethod
    def load(cls, path) -> "RunRecord":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(f.read())

    def comparable(self) -> dict:
        """Record contents with wall-clock timing stripped, for reproducibility checks."""
        d = asdict(self)
        d.pop("wall_clock_seconds", None)
        return d
