"""Accuracy, mistake-repetition rates, and sample-efficiency reporting.

The success rate measures how many of the teacher's training-set mistakes the
student gets right; the failure rate measures how many teacher-correct
samples the student gets wrong. Both are computed from a prediction ledger
built by evaluating teacher and student at temperature 1.
"""

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import DataConsistencyError, InvalidArgumentError
from .nn.network import Network
from .selfreg import RegulationState


@dataclass
class PredictionLedger:
    sample_ids: np.ndarray
    true_labels: np.ndarray
    teacher_pred: np.ndarray
    student_pred: np.ndarray

    def __post_init__(self):
        self.sample_ids = np.asarray(self.sample_ids)
        self.true_labels = np.asarray(self.true_labels, dtype=np.int64)
        self.teacher_pred = np.asarray(self.teacher_pred, dtype=np.int64)
        self.student_pred = np.asarray(self.student_pred, dtype=np.int64)
        n = len(self.sample_ids)
        if not (len(self.true_labels) == len(self.teacher_pred) == len(self.student_pred) == n):
            raise DataConsistencyError("ledger columns have mismatched lengths")
        if len(np.unique(self.sample_ids)) != n:
            raise DataConsistencyError("ledger sample ids are not unique")

    def __len__(self) -> int:
        return len(self.sample_ids)


def predictions(model: Network, dataset: Dataset, batch_size: int = 512) -> np.ndarray:
    """Temperature-1 argmax class predictions over a whole dataset."""
    preds = [
        model.predict(dataset.inputs[i : i + batch_size]).argmax(axis=1)
        for i in range(0, len(dataset), batch_size)
    ]
    return np.concatenate(preds)


def build_ledger(teacher: Network, student: Network, dataset: Dataset) -> PredictionLedger:
    """Evaluate both models at temperature 1 over a dataset (normally the training set)."""
    return PredictionLedger(
        sample_ids=np.arange(len(dataset)),
        true_labels=dataset.labels,
        teacher_pred=predictions(teacher, dataset),
        student_pred=predictions(student, dataset),
    )


def success_rate(ledger: PredictionLedger) -> float | None:
    """Fraction of teacher mistakes the student corrects; None when the teacher
    made no mistakes (the rate is undefined, never reported as 0/0)."""
    teacher_wrong = ledger.teacher_pred != ledger.true_labels
    if not teacher_wrong.any():
        return None
    student_right = ledger.student_pred == ledger.true_labels
    return float((teacher_wrong & student_right).sum() / teacher_wrong.sum())


def failure_rate(ledger: PredictionLedger) -> float:
    """Fraction of teacher-correct samples the student gets wrong."""
    teacher_right = ledger.teacher_pred == ledger.true_labels
    if not teacher_right.any():
        raise InvalidArgumentError("failure rate undefined: teacher classified nothing correctly")
    student_wrong = ledger.student_pred != ledger.true_labels
    return float((teacher_right & student_wrong).sum() / teacher_right.sum())


def accuracy(model: Network, dataset: Dataset) -> float:
    """Temperature-1 argmax accuracy over a dataset."""
    if len(dataset) == 0:
        raise InvalidArgumentError("accuracy undefined on an empty dataset")
    return float((predictions(model, dataset) == dataset.labels).mean())


def sample_efficiency(state: RegulationState) -> tuple[int, int, float]:
    """(used, total, fraction) of sample presentations that trained the student."""
    if state.total_presented_count <= 0:
        raise InvalidArgumentError("no samples presented; efficiency undefined")
    used, total = state.used_sample_count, state.total_presented_count
    return used, total, used / total


def format_efficiency(used: int, total: int) -> str:
    """Raw counts plus percentage, e.g. '103476/12000000 (0.8623%)'."""
    return f"{used}/{total} ({100.0 * used / total:.4f}%)"
