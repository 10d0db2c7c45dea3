"""Fast-gradient-sign attacks and robustness evaluation.

Samples are perturbed by epsilon times the sign of the input gradient of the
temperature-1 cross-entropy loss, clipped to the valid pixel range after
every step. Crafting iterates until the source model misclassifies the
sample or an iteration budget runs out; a sample the source model already
misclassifies succeeds immediately with zero perturbation.
"""

from dataclasses import dataclass

import numpy as np

from .data import one_hot_batch
from .errors import InvalidArgumentError, NumericError
from .nn.functional import softmax_t
from .nn.network import Network

BUDGET_SLACK = 1e-12


@dataclass
class AdversarialSet:
    originals: np.ndarray
    perturbed: np.ndarray
    labels: np.ndarray
    source_model_id: str
    epsilon: float
    iterations_used: np.ndarray
    success: np.ndarray

    def __post_init__(self):
        self.originals = np.asarray(self.originals, dtype=np.float64)
        self.perturbed = np.asarray(self.perturbed, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.iterations_used = np.asarray(self.iterations_used, dtype=np.int64)
        self.success = np.asarray(self.success, dtype=bool)
        n = len(self.labels)
        if not (len(self.originals) == len(self.perturbed) == len(self.iterations_used) == len(self.success) == n):
            raise InvalidArgumentError("adversarial set fields have mismatched lengths")
        axes = tuple(range(1, self.originals.ndim))
        gap = np.abs(self.perturbed - self.originals).max(axis=axes, initial=0.0)
        budget = self.epsilon * self.iterations_used + BUDGET_SLACK
        if np.any(gap > budget):
            raise InvalidArgumentError("perturbation exceeds epsilon * iterations budget")
        if self.perturbed.size and (self.perturbed.min() < 0.0 or self.perturbed.max() > 1.0):
            raise InvalidArgumentError("perturbed pixels outside [0, 1]")

    def __len__(self) -> int:
        return len(self.labels)

    def success_rate(self) -> float:
        return float(self.success.mean())


def _input_gradients(model: Network, x: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-sample gradient of temperature-1 cross-entropy w.r.t. each input."""
    logits = model.forward(x)
    probs = softmax_t(logits, 1.0)
    onehots = one_hot_batch(labels, model.output_dim)
    # Per-sample loss gradients (no batch reduction): rows stay independent.
    _, grad_x = model.backward(probs - onehots)
    if not np.all(np.isfinite(grad_x)):
        raise NumericError("non-finite input gradient during attack")
    return grad_x


def _fgsm_batch(model: Network, x: np.ndarray, labels: np.ndarray, epsilon: float) -> np.ndarray:
    grad_x = _input_gradients(model, x, labels)
    return np.clip(x + epsilon * np.sign(grad_x), 0.0, 1.0)


def fgsm_step(model: Network, x: np.ndarray, true_onehot: np.ndarray, epsilon: float) -> np.ndarray:
    """One signed-gradient step on a single sample; sign(0) leaves a pixel alone."""
    if epsilon <= 0:
        raise InvalidArgumentError("epsilon must be > 0")
    label = int(np.argmax(np.asarray(true_onehot)))
    return _fgsm_batch(model, np.asarray(x, dtype=np.float64)[None], np.array([label]), epsilon)[0]


def craft(model: Network, x: np.ndarray, label: int, epsilon: float,
          max_iters: int) -> tuple[np.ndarray, int, bool]:
    """Iterate fgsm_step until the model misclassifies or the budget is spent.

    Returns (perturbed sample, steps applied, success). The misclassification
    check runs before the first step and after every step, so an input the
    model already gets wrong returns unchanged with zero iterations.
    """
    if max_iters < 1:
        raise InvalidArgumentError("max_iters must be >= 1")
    adv = craft_set(model, np.asarray(x, dtype=np.float64)[None], np.array([label]), epsilon, max_iters)
    return adv.perturbed[0], int(adv.iterations_used[0]), bool(adv.success[0])


def craft_set(
    model: Network,
    inputs: np.ndarray,
    labels: np.ndarray,
    epsilon: float,
    max_iters: int,
    source_model_id: str = "",
) -> AdversarialSet:
    """Craft perturbations for a whole sample set against one frozen source model.

    Vectorized equivalent of calling craft() per sample: each step only
    advances the samples the model still classifies correctly.
    """
    if epsilon <= 0:
        raise InvalidArgumentError("epsilon must be > 0")
    if max_iters < 1:
        raise InvalidArgumentError("max_iters must be >= 1")
    x0 = np.asarray(inputs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if len(x0) == 0:
        raise InvalidArgumentError("cannot craft from an empty sample set")

    perturbed = x0.copy()
    iterations = np.zeros(len(x0), dtype=np.int64)
    fooled = model.predict(perturbed).argmax(axis=1) != labels
    for _ in range(max_iters):
        active = ~fooled
        if not active.any():
            break
        stepped = _fgsm_batch(model, perturbed[active], labels[active], epsilon)
        perturbed[active] = stepped
        iterations[active] += 1
        fooled_now = model.predict(stepped).argmax(axis=1) != labels[active]
        fooled[np.flatnonzero(active)[fooled_now]] = True

    return AdversarialSet(
        originals=x0,
        perturbed=perturbed,
        labels=labels,
        source_model_id=source_model_id,
        epsilon=float(epsilon),
        iterations_used=iterations,
        success=fooled,
    )


def evaluate_robustness(model: Network, adv: AdversarialSet) -> float:
    """Temperature-1 accuracy of a model on the perturbed samples."""
    if len(adv) == 0:
        raise InvalidArgumentError("adversarial set is empty")
    preds = [
        model.predict(adv.perturbed[i : i + 512]).argmax(axis=1)
        for i in range(0, len(adv), 512)
    ]
    return float((np.concatenate(preds) == adv.labels).mean())
