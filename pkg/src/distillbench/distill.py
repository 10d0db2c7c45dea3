"""Training regimes and their loss functions.

Six regimes are supported:

- ``separate``: plain supervised training on one-hot labels.
- ``teacher_only``: the student matches the teacher's temperature-softened
  output distribution; ground truth is not used.
- ``kd_normal``: teacher matching plus a fixed-weight ground-truth term.
- ``cckd_l``: per-sample interpolation of the two terms, weighted by the
  confidence the teacher assigns to the true class.
- ``cckd_t``: a single cross-entropy against a per-sample target that mixes
  the teacher's output with the one-hot label by that same confidence.
- ``cckd_t_reg``: cckd_t plus the self-regulation gate that can skip samples.

Cross-entropy is used for both the teacher-matching term (at temperature tau)
and the ground-truth term (at temperature 1). Temperature-1 probabilities are
re-softmaxed from the same logits, which is exact because logits do not
depend on temperature.
"""

import time
from dataclasses import dataclass

import numpy as np

from .data import Dataset, batches, one_hot_batch
from .errors import ConfigError, InvalidArgumentError
from .nn.functional import check_simplex, cross_entropy, softmax_t
from .nn.network import Network
from .nn.optim import Adam
from .records import EpochStats, RunRecord
from .selfreg import (
    RegulationState,
    include_mask,
    margin_delta_batch,
    record_batch,
    threshold,
)

REGIMES = ("separate", "teacher_only", "kd_normal", "cckd_l", "cckd_t", "cckd_t_reg")
TEACHER_REGIMES = ("teacher_only", "kd_normal", "cckd_l", "cckd_t", "cckd_t_reg")
CONFIDENCE_REGIMES = ("cckd_l", "cckd_t", "cckd_t_reg")

DEFAULT_TAU = 20.0
DEFAULT_BALANCE = 0.3
DEFAULT_ALPHA = 0.01
DEFAULT_BATCH = 512
# Separate training uses a 10x smaller rate than distillation.
DEFAULT_LR_SEPARATE = 0.001
DEFAULT_LR_DISTILL = 0.01


def default_learning_rate(regime: str) -> float:
    return DEFAULT_LR_SEPARATE if regime == "separate" else DEFAULT_LR_DISTILL


@dataclass(frozen=True)
class DistillPlan:
    """Regime selector plus every hyperparameter a run needs.

    Fields irrelevant to the chosen regime are stored anyway so manifests
    echo the complete configuration.
    """

    regime: str
    tau: float = DEFAULT_TAU
    balance_lambda: float = DEFAULT_BALANCE
    alpha: float = DEFAULT_ALPHA
    learning_rate: float | None = None
    epochs: int = 1
    batch_size: int = DEFAULT_BATCH
    seed: int = 0

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise InvalidArgumentError(f"unknown regime {self.regime!r}; expected one of {REGIMES}")
        if self.tau <= 0:
            raise InvalidArgumentError("tau must be > 0")
        if not 0.0 <= self.balance_lambda <= 1.0:
            raise InvalidArgumentError("balance_lambda must lie in [0, 1]")
        if self.alpha <= 0:
            raise InvalidArgumentError("alpha must be > 0")
        if self.epochs < 0 or self.batch_size < 1:
            raise InvalidArgumentError("epochs must be >= 0 and batch_size >= 1")
        if self.learning_rate is None:
            object.__setattr__(self, "learning_rate", default_learning_rate(self.regime))
        if self.learning_rate <= 0:
            raise InvalidArgumentError("learning_rate must be > 0")


# -- loss functions -----------------------------------------------------------


def _check_one_hot(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or not np.all((y == 0.0) | (y == 1.0)) or np.count_nonzero(y) != 1:
        raise InvalidArgumentError("expected an exactly one-hot label vector")
    return y


def teacher_confidence(true_onehot: np.ndarray, teacher_probs: np.ndarray) -> float:
    """Probability the teacher assigns to the true class (inner product with one-hot)."""
    y = _check_one_hot(true_onehot)
    p = check_simplex(teacher_probs, "teacher_probs")
    if y.shape != p.shape:
        raise InvalidArgumentError(f"label shape {y.shape} vs teacher shape {p.shape}")
    return float(y @ p)


def kd_normal_loss(
    teacher_probs: np.ndarray,
    student_probs: np.ndarray,
    student_probs_t1: np.ndarray,
    true_onehot: np.ndarray,
    balance_lambda: float,
) -> float:
    """Teacher-matching cross-entropy plus a fixed-weight ground-truth term.

    ``teacher_probs`` and ``student_probs`` are temperature-tau distributions,
    ``student_probs_t1`` the temperature-1 prediction.
    """
    check_simplex(teacher_probs, "teacher_probs")
    check_simplex(student_probs, "student_probs")
    check_simplex(student_probs_t1, "student_probs_t1")
    _check_one_hot(true_onehot)
    return float(
        cross_entropy(teacher_probs, student_probs)
        + balance_lambda * cross_entropy(true_onehot, student_probs_t1)
    )


def cckd_l_loss(
    teacher_probs: np.ndarray,
    student_probs: np.ndarray,
    student_probs_t1: np.ndarray,
    true_onehot: np.ndarray,
) -> float:
    """Confidence-weighted blend: lam * teacher term + (1 - lam) * ground-truth term.

    The weight lam is the teacher's confidence in the true class, recomputed
    from the same temperature-tau teacher distribution that enters the
    teacher-matching term; it is constant across epochs for a frozen teacher.
    """
    lam = teacher_confidence(true_onehot, teacher_probs)
    check_simplex(student_probs, "student_probs")
    check_simplex(student_probs_t1, "student_probs_t1")
    return float(
        lam * cross_entropy(teacher_probs, student_probs)
        + (1.0 - lam) * cross_entropy(true_onehot, student_probs_t1)
    )


def cc_target(true_onehot: np.ndarray, teacher_probs: np.ndarray) -> np.ndarray:
    """Confidence-conditioned target: mix teacher output and label, renormalized.

    The mix lam * teacher + (1 - lam) * label already sums to one for exact
    distributions; the L1 normalization is a numerical guard that keeps the
    target on the simplex.
    """
    lam = teacher_confidence(true_onehot, teacher_probs)
    y = np.asarray(true_onehot, dtype=np.float64)
    mix = lam * np.asarray(teacher_probs, dtype=np.float64) + (1.0 - lam) * y
    norm = mix.sum()
    assert norm > 0.0
    return mix / norm


def cckd_t_loss(target: np.ndarray, student_probs: np.ndarray) -> float:
    """Cross-entropy of the student's temperature-tau prediction against a cc target."""
    t = check_simplex(target, "target")
    p = check_simplex(student_probs, "student_probs")
    return float(cross_entropy(t, p))


def cc_target_batch(labels: np.ndarray, teacher_probs: np.ndarray, num_classes: int) -> np.ndarray:
    """Vectorized cc_target over rows of temperature-tau teacher outputs."""
    onehots = one_hot_batch(labels, num_classes)
    lam = teacher_probs[np.arange(len(labels)), labels]
    mix = lam[:, None] * teacher_probs + (1.0 - lam)[:, None] * onehots
    return mix / mix.sum(axis=1, keepdims=True)


# -- the training loop --------------------------------------------------------


def _batched_logits(net: Network, inputs: np.ndarray, batch_size: int = 512) -> np.ndarray:
    out = [net.predict(inputs[i : i + batch_size]) for i in range(0, len(inputs), batch_size)]
    return np.concatenate(out, axis=0)


def _loss_and_grad(plan: DistillPlan, logits: np.ndarray, labels: np.ndarray,
                   teacher_probs: np.ndarray | None, num_classes: int):
    """Per-sample losses and per-sample logit gradients for the plan's regime."""
    onehots = one_hot_batch(labels, num_classes)
    regime = plan.regime
    if regime == "separate":
        p1 = softmax_t(logits, 1.0)
        return cross_entropy(onehots, p1), p1 - onehots
    if regime == "teacher_only":
        pt = softmax_t(logits, plan.tau)
        return cross_entropy(teacher_probs, pt), (pt - teacher_probs) / plan.tau
    if regime == "kd_normal":
        pt = softmax_t(logits, plan.tau)
        p1 = softmax_t(logits, 1.0)
        losses = cross_entropy(teacher_probs, pt) + plan.balance_lambda * cross_entropy(onehots, p1)
        grad = (pt - teacher_probs) / plan.tau + plan.balance_lambda * (p1 - onehots)
        return losses, grad
    if regime == "cckd_l":
        pt = softmax_t(logits, plan.tau)
        p1 = softmax_t(logits, 1.0)
        lam = teacher_probs[np.arange(len(labels)), labels]
        losses = lam * cross_entropy(teacher_probs, pt) + (1.0 - lam) * cross_entropy(onehots, p1)
        grad = lam[:, None] * (pt - teacher_probs) / plan.tau + (1.0 - lam)[:, None] * (p1 - onehots)
        return losses, grad
    # cckd_t and cckd_t_reg share the confidence-conditioned target loss.
    pt = softmax_t(logits, plan.tau)
    target = cc_target_batch(labels, teacher_probs, num_classes)
    return cross_entropy(target, pt), (pt - target) / plan.tau


def run_distillation(
    plan: DistillPlan,
    teacher: Network | None,
    student: Network,
    train: Dataset,
    test: Dataset | None = None,
    command: str = "distill",
) -> RunRecord:
    """Train ``student`` under the plan's regime; the teacher is never modified.

    Per-epoch test accuracy is evaluated at temperature 1 when a test set is
    given. For ``cckd_t_reg`` the gate is evaluated on the full batch first
    and the update is computed from the surviving samples only, so a skipped
    sample contributes nothing to parameters or optimizer state.
    """
    start = time.perf_counter()
    needs_teacher = plan.regime in TEACHER_REGIMES
    if needs_teacher and teacher is None:
        raise ConfigError(f"regime {plan.regime!r} requires a teacher network")
    if student.input_shape != train.inputs.shape[1:]:
        raise ConfigError(
            f"student input shape {student.input_shape} does not match data {train.inputs.shape[1:]}"
        )
    if student.output_dim != train.num_classes:
        raise ConfigError(
            f"student emits {student.output_dim} classes, dataset has {train.num_classes}"
        )
    if needs_teacher and teacher.input_shape != train.inputs.shape[1:]:
        raise ConfigError("teacher input shape does not match data")

    num_classes = train.num_classes
    n_train = len(train)
    opt = Adam(plan.learning_rate)

    teacher_tau_probs = None
    lambda_vec = None
    if needs_teacher:
        # Frozen teacher: its outputs (and hence per-sample confidences) are
        # computed once and reused every epoch.
        teacher_tau_probs = softmax_t(_batched_logits(teacher, train.inputs), plan.tau)
        lambda_vec = teacher_tau_probs[np.arange(n_train), train.labels]

    reg_state = RegulationState(plan.alpha) if plan.regime == "cckd_t_reg" else None

    epoch_stats: list[EpochStats] = []
    for epoch in range(plan.epochs):
        loss_sum = 0.0
        loss_count = 0
        included_epoch = 0
        presented_epoch = 0
        if reg_state is not None:
            reg_state.epoch = epoch
        for idx in batches(train, plan.batch_size, plan.seed, epoch):
            x = train.inputs[idx]
            labels = train.labels[idx]
            tprobs = teacher_tau_probs[idx] if needs_teacher else None

            if reg_state is not None:
                gate_probs = softmax_t(student.predict(x), plan.tau)
                mask = include_mask(
                    gate_probs.argmax(axis=1),
                    labels,
                    margin_delta_batch(gate_probs),
                    threshold(epoch, plan.alpha),
                )
                record_batch(reg_state, mask)
                presented_epoch += len(idx)
                included_epoch += int(mask.sum())
                if not mask.any():
                    continue
                x, labels, tprobs = x[mask], labels[mask], tprobs[mask]
            else:
                presented_epoch += len(idx)
                included_epoch += len(idx)

            logits = student.forward(x)
            losses, grad_z = _loss_and_grad(plan, logits, labels, tprobs, num_classes)
            b = len(labels)
            grads, _ = student.backward(grad_z / b)
            opt.step(student.parameters(), grads)
            loss_sum += float(losses.sum())
            loss_count += b

        if reg_state is not None:
            reg_state.per_epoch_included.append(included_epoch)

        test_acc = None
        if test is not None:
            test_acc = float(
                (_batched_logits(student, test.inputs).argmax(axis=1) == test.labels).mean()
            )
        epoch_stats.append(
            EpochStats(
                train_loss=loss_sum / loss_count if loss_count else None,
                test_accuracy=test_acc,
                included_samples=included_epoch,
                presented_samples=presented_epoch,
                lambda_mean=float(lambda_vec.mean()) if plan.regime in CONFIDENCE_REGIMES else None,
            )
        )

    train_acc = float((_batched_logits(student, train.inputs).argmax(axis=1) == train.labels).mean())
    final: dict = {"train_accuracy": train_acc}
    if epoch_stats and epoch_stats[-1].test_accuracy is not None:
        final["test_accuracy"] = epoch_stats[-1].test_accuracy
    if plan.regime in CONFIDENCE_REGIMES:
        final["lambda_min"] = float(lambda_vec.min())
        final["lambda_mean"] = float(lambda_vec.mean())
        final["lambda_max"] = float(lambda_vec.max())
    if reg_state is not None:
        used, total = reg_state.used_sample_count, reg_state.total_presented_count
        final["samples_used"] = used
        final["samples_presented"] = total
        final["efficiency_fraction"] = used / total if total else None
        final["efficiency"] = f"{used}/{total} ({100.0 * used / total:.4f}%)" if total else "n/a"
        final["alpha"] = plan.alpha

    return RunRecord(
        command=command,
        regime=plan.regime,
        seed=plan.seed,
        epochs=epoch_stats,
        final=final,
        wall_clock_seconds=time.perf_counter() - start,
    )
