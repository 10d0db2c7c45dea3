"""SGD and Adam updates over plain parameter/gradient array lists."""

import numpy as np

from ..errors import InvalidArgumentError, NumericError, ShapeError


def _validate(params: list[np.ndarray], grads: list[np.ndarray]) -> None:
    if len(params) != len(grads):
        raise ShapeError(f"{len(params)} params vs {len(grads)} grads")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ShapeError(f"param shape {p.shape} vs grad shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise NumericError("non-finite gradient; aborting epoch")


class Sgd:
    algorithm = "sgd"

    def __init__(self, learning_rate: float):
        if learning_rate <= 0:
            raise InvalidArgumentError("learning_rate must be > 0")
        self.learning_rate = float(learning_rate)
        self.step_count = 0

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        _validate(params, grads)
        for p, g in zip(params, grads):
            p -= self.learning_rate * g
        self.step_count += 1


class Adam:
    """Adam with the usual bias-corrected moment estimates.

    Moment buffers are allocated lazily on the first step and mirror the
    parameter shapes. The step counter advances only when an update actually
    happens, so skipped batches do not perturb the bias correction.
    """

    algorithm = "adam"

    def __init__(self, learning_rate: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if learning_rate <= 0:
            raise InvalidArgumentError("learning_rate must be > 0")
        self.learning_rate = float(learning_rate)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.step_count = 0
        self.m: list[np.ndarray] | None = None
        self.v: list[np.ndarray] | None = None

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        _validate(params, grads)
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        if len(self.m) != len(params):
            raise ShapeError("optimizer state does not match parameter list")

        self.step_count += 1
        t = self.step_count
        c1 = 1.0 - self.beta1**t
        c2 = 1.0 - self.beta2**t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.learning_rate * (m / c1) / (np.sqrt(v / c2) + self.eps)


def optimizer_step(state, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
    """Apply one update in place; ``state`` is an Sgd or Adam instance."""
    state.step(params, grads)


def make_optimizer(algorithm: str, learning_rate: float):
    if algorithm == "sgd":
        return Sgd(learning_rate)
    if algorithm == "adam":
        return Adam(learning_rate)
    raise InvalidArgumentError(f"unknown optimizer {algorithm!r}")
