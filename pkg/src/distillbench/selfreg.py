"""Self-regulated sample selection.

A sample participates in a training epoch only if the student misclassifies
it, or classifies it correctly with a prediction margin below an
epoch-dependent threshold that rises from 0 toward 1. Usage counters feed the
sample-efficiency report.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError


@dataclass
class RegulationState:
    alpha: float
    epoch: int = 0
    used_sample_count: int = 0
    total_presented_count: int = 0
    per_epoch_included: list[int] = field(default_factory=list)

    def __post_init__(self):
        if self.alpha <= 0:
            raise InvalidArgumentError("alpha must be > 0")


def margin_delta(probs: np.ndarray) -> float:
    """Gap between the largest and second-largest predicted probabilities."""
    p = np.asarray(probs, dtype=np.float64)
    if p.shape[-1] < 2:
        raise InvalidArgumentError("margin needs at least 2 classes")
    top2 = np.partition(p, -2)[..., -2:]
    return float(top2[..., 1] - top2[..., 0])


def margin_delta_batch(probs: np.ndarray) -> np.ndarray:
    top2 = np.partition(np.asarray(probs, dtype=np.float64), -2, axis=-1)[..., -2:]
    return top2[..., 1] - top2[..., 0]


def threshold(epoch: int, alpha: float) -> float:
    """Inclusion threshold 1 - exp(-alpha * epoch); 0 at epoch 0, rising toward 1."""
    if alpha <= 0:
        raise InvalidArgumentError("alpha must be > 0")
    if epoch < 0:
        raise InvalidArgumentError("epoch must be >= 0")
    return 1.0 - math.exp(-alpha * epoch)


def include_sample(predicted_class: int, true_class: int, delta: float, eta: float) -> bool:
    """True iff the sample should train: misclassified, or margin below threshold."""
    return predicted_class != true_class or delta < eta


def include_mask(predicted: np.ndarray, true_labels: np.ndarray, deltas: np.ndarray,
                 eta: float) -> np.ndarray:
    return (predicted != true_labels) | (deltas < eta)


def record_usage(state: RegulationState, included: bool) -> RegulationState:
    state.total_presented_count += 1
    if included:
        state.used_sample_count += 1
    return state


def record_batch(state: RegulationState, included: np.ndarray) -> RegulationState:
    state.total_presented_count += int(included.size)
    state.used_sample_count += int(np.count_nonzero(included))
    return state
