"""
Classification metrics on predicted labels, computed from the confusion matrix accumulated by ignite.

A class that appears neither in the predictions nor in the truth has F1 = 0 and still counts in the macro average.
"""

import logging
from typing import Dict, Iterable, Union

import numpy as np
import torch
from ignite.metrics import ConfusionMatrix

from featprop.common.exceptions import DimensionMismatchError, EmptySelectionError
from featprop.loaders.graph import LabelVector

logger = logging.getLogger(__name__)


def confusion_matrix(pred: Union[Iterable[int], np.ndarray], truth: LabelVector) -> np.ndarray:
    """
    C x C counts, rows = true class, columns = predicted class
    """
    pred = np.array(pred, dtype=np.int64).reshape(-1)
    if len(pred) != len(truth):
        raise DimensionMismatchError(operation='metrics', expected=(len(truth),), actual=(len(pred),))
    if len(pred) == 0:
        raise EmptySelectionError('metrics')
    if pred.min() < 0 or pred.max() >= truth.n_classes:
        raise ValueError(f"predicted labels must lie in [0, {truth.n_classes})")

    metric = ConfusionMatrix(num_classes=truth.n_classes)
    scores = torch.nn.functional.one_hot(torch.from_numpy(pred), truth.n_classes).to(torch.float64)
    metric.update((scores, torch.from_numpy(np.array(truth.labels, dtype=np.int64))))
    return metric.compute().cpu().numpy().astype(np.int64)


def f1_per_class(counts: np.ndarray) -> np.ndarray:
    """
    2 TP / (2 TP + FP + FN) = 2 P R / (P + R), or 0 when the class is never predicted nor present
    """
    true_positives = np.diag(counts).astype(np.float64)
    denominator = counts.sum(axis=0) + counts.sum(axis=1)
    f1 = np.zeros(len(counts), dtype=np.float64)
    np.divide(2.0 * true_positives, denominator, out=f1, where=denominator > 0)
    return f1


def macro_f1(pred: Union[Iterable[int], np.ndarray], truth: LabelVector) -> float:
    return float(f1_per_class(confusion_matrix(pred, truth)).mean())


def micro_f1(pred: Union[Iterable[int], np.ndarray], truth: LabelVector) -> float:
    counts = confusion_matrix(pred, truth)
    true_positives = np.trace(counts)
    errors = counts.sum() - true_positives
    # FP and FN both equal the number of errors in single-label classification
    return float(2 * true_positives / (2 * true_positives + 2 * errors))


def accuracy(pred: Union[Iterable[int], np.ndarray], truth: LabelVector) -> float:
    counts = confusion_matrix(pred, truth)
    return float(np.trace(counts) / counts.sum())


def evaluate(pred: Union[Iterable[int], np.ndarray], truth: LabelVector) -> Dict[str, float]:
    """
    All three metrics from a single confusion matrix
    """
    counts = confusion_matrix(pred, truth)
    true_positives, total = np.trace(counts), counts.sum()
    errors = total - true_positives
    return {
        'macro_f1': float(f1_per_class(counts).mean()),
        'micro_f1': float(2 * true_positives / (2 * true_positives + 2 * errors)),
        'accuracy': float(true_positives / total)}
