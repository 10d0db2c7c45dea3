"""Softmax and cross-entropy primitives shared by every training regime."""

import numpy as np

from ..errors import InvalidArgumentError, ShapeError

# Floor applied to probabilities before taking logs; keeps -log(p) finite.
LOG_FLOOR = 1e-12


def softmax_t(logits: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    """Temperature-scaled softmax along the last axis.

    Higher temperatures flatten the distribution toward uniform. The maximum
    logit is subtracted before exponentiation so the result is stable for
    arbitrarily large inputs; rows always sum to one.
    """
    if temperature <= 0:
        raise InvalidArgumentError(f"temperature must be > 0, got {temperature}")
    z = np.asarray(logits, dtype=np.float64)
    if z.shape[-1] < 2:
        raise InvalidArgumentError("softmax needs at least 2 classes")
    z = z / temperature
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(target: np.ndarray, predicted: np.ndarray) -> np.ndarray | float:
    """Cross entropy -sum(target * log(predicted)) over the last axis.

    ``predicted`` is clamped below at LOG_FLOOR before the log. Returns a
    scalar for 1-D inputs, a per-row array for batched inputs.
    """
    t = np.asarray(target, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if t.shape != p.shape:
        raise ShapeError(f"target shape {t.shape} != predicted shape {p.shape}")
    ce = -(t * np.log(np.maximum(p, LOG_FLOOR))).sum(axis=-1)
    if ce.ndim == 0:
        return float(ce)
    return ce


def entropy(probs: np.ndarray) -> float:
    """Shannon entropy of a distribution, with the same log floor as cross_entropy."""
    p = np.asarray(probs, dtype=np.float64)
    return float(-(p * np.log(np.maximum(p, LOG_FLOOR))).sum())


def check_simplex(probs: np.ndarray, name: str = "distribution", atol: float = 1e-9) -> np.ndarray:
    """Validate that the last axis of ``probs`` lies on the probability simplex."""
    p = np.asarray(probs, dtype=np.float64)
    if p.shape[-1] < 1:
        raise InvalidArgumentError(f"{name} is empty")
    if np.any(p < -atol) or np.any(p > 1 + atol):
        raise InvalidArgumentError(f"{name} has entries outside [0, 1]")
    sums = p.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > atol):
        raise InvalidArgumentError(f"{name} does not sum to 1 (got {sums})")
    return p
