"""Cross-validated evaluation with the five classification metrics.

Per-fold confusion matrices are summed into an overall matrix; binary
metrics come straight from the summed 2x2 counts (class 1 positive), while
multiclass precision/recall/specificity macro-average the per-class
one-vs-rest values and accuracy is the matrix trace over the total.  The F1
score is the harmonic mean of the reported precision and recall.
"""

from dataclasses import dataclass, field
import json

import numpy as np

from .. import dataset as ds
from ..errors import ContractError
from ..seeding import derive_seed
from . import classic, rnn

METRIC_NAMES = ("accuracy", "precision", "recall", "specificity", "f1")

ALL_KINDS = rnn.RNN_KINDS + ("tree", "adaboost", "svm")


@dataclass(frozen=True)
class ClassifierSpec:
    """Classifier family plus its tunable parameters.

    For the recurrent kinds the tunable vector is (n_hidden, n_epochs);
    the classical baselines use their own fields and ignore those two.
    """

    kind: str
    n_hidden: int = 128
    n_epochs: int = 10
    learning_rate: float = 1e-3
    batch_size: int = 32
    seed: int = 0
    max_depth: int = 12
    min_leaf: int = 1
    n_rounds: int = 50
    svm_lambda: float = 1e-4
    svm_epochs: int = 300

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ContractError(f"unknown classifier kind {self.kind!r}")
        if self.kind in rnn.RNN_KINDS and (self.n_hidden < 1 or self.n_epochs < 1):
            raise ContractError("n_hidden and n_epochs must be >= 1")


@dataclass
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    specificity: float
    f1: float
    per_fold: dict = field(default_factory=dict)
    confusion: np.ndarray = None
    classes: np.ndarray = None

    def as_dict(self) -> dict:
        out = {name: getattr(self, name) for name in METRIC_NAMES}
        out["per_fold"] = {k: list(v) for k, v in self.per_fold.items()}
        if self.confusion is not None:
            out["confusion"] = [int(v) for v in self.confusion.reshape(-1)]
            out["classes"] = [int(c) for c in self.classes]
        return out

    def to_json(self, **extra) -> str:
        payload = dict(extra)
        payload.update(self.as_dict())
        return json.dumps(payload, indent=2, sort_keys=True)


def confusion_matrix(y_true, y_pred, classes) -> np.ndarray:
    """Integer confusion counts, rows true class, columns predicted."""
    classes = np.asarray(classes)
    lookup = {int(c): i for i, c in enumerate(classes)}
    cm = np.zeros((classes.size, classes.size), dtype=np.int64)
    for t, p in zip(np.asarray(y_true).ravel(), np.asarray(y_pred).ravel()):
        cm[lookup[int(t)], lookup[int(p)]] += 1
    return cm


def _safe_div(num, den):
    return num / den if den > 0 else 0.0


def metrics_from_confusion(cm: np.ndarray) -> dict:
    """The five metrics from one confusion matrix.

    Two classes: counts taken with the second class (index 1) positive.
    More classes: accuracy is trace/total, the others macro-average the
    one-vs-rest values.
    """
    cm = np.asarray(cm)
    total = cm.sum()
    if cm.shape[0] == 2:
        tn, fp, fn, tp = cm[0, 0], cm[0, 1], cm[1, 0], cm[1, 1]
        accuracy = _safe_div(tp + tn, total)
        precision = _safe_div(tp, tp + fp)
        recall = _safe_div(tp, tp + fn)
        specificity = _safe_div(tn, tn + fp)
    else:
        accuracy = _safe_div(np.trace(cm), total)
        precisions, recalls, specifics = [], [], []
        for c in range(cm.shape[0]):
            tp = cm[c, c]
            fp = cm[:, c].sum() - tp
            fn = cm[c, :].sum() - tp
            tn = total - tp - fp - fn
            precisions.append(_safe_div(tp, tp + fp))
            recalls.append(_safe_div(tp, tp + fn))
            specifics.append(_safe_div(tn, tn + fp))
        precision = float(np.mean(precisions))
        recall = float(np.mean(recalls))
        specificity = float(np.mean(specifics))
    f1 = (2.0 * precision * recall / (precision + recall)
          if precision + recall > 0 else 0.0)
    return {"accuracy": float(accuracy), "precision": float(precision),
            "recall": float(recall), "specificity": float(specificity),
            "f1": float(f1)}


def train_classifier(spec: ClassifierSpec, features, labels, seed=None):
    """Dispatch to the family trainer; ``seed`` overrides the spec seed."""
    seed = spec.seed if seed is None else seed
    if spec.kind in rnn.RNN_KINDS:
        return rnn.train_rnn(features, labels, spec.kind, spec.n_hidden,
                             spec.n_epochs, spec.learning_rate,
                             spec.batch_size, seed)
    if spec.kind == "tree":
        return classic.train_tree(features, labels, spec.max_depth,
                                  spec.min_leaf)
    if spec.kind == "adaboost":
        return classic.train_adaboost(features, labels, spec.n_rounds)
    return classic.train_svm(features, labels, spec.svm_lambda,
                             spec.svm_epochs)


def predict_classifier(spec: ClassifierSpec, model, features) -> np.ndarray:
    if spec.kind in rnn.RNN_KINDS:
        return rnn.rnn_predict(model, features)
    if spec.kind == "tree":
        return classic.tree_predict(model, features)
    if spec.kind == "adaboost":
        return classic.adaboost_predict(model, features)
    return classic.svm_predict(model, features)


def evaluate(spec: ClassifierSpec, samples, task: str, k: int = 5,
             seed: int = 0) -> MetricsReport:
    """Stratified k-fold cross validation on the generated dataset.

    The report is independent of fold evaluation order: fold splits and the
    per-fold training seeds are all derived from ``seed``.
    """
    features = ds.feature_matrix(samples)
    labels = ds.project_labels(ds.labels6_of(samples), task)
    classes = np.unique(labels)
    if classes.size < 2:
        raise ContractError("task labels collapse to a single class")
    folds = ds.kfold_split(len(samples), k, seed, labels=labels)
    per_fold = {name: [] for name in METRIC_NAMES}
    cm_total = np.zeros((classes.size, classes.size), dtype=np.int64)
    for fold_id, val_idx in enumerate(folds):
        train_mask = np.ones(len(samples), dtype=bool)
        train_mask[val_idx] = False
        model = train_classifier(spec, features[train_mask],
                                 labels[train_mask],
                                 seed=derive_seed(seed, spec.seed, fold_id))
        pred = predict_classifier(spec, model, features[val_idx])
        cm = confusion_matrix(labels[val_idx], pred, classes)
        cm_total += cm
        fold_metrics = metrics_from_confusion(cm)
        for name in METRIC_NAMES:
            per_fold[name].append(fold_metrics[name])
    overall = metrics_from_confusion(cm_total)
    return MetricsReport(per_fold=per_fold, confusion=cm_total,
                         classes=classes, **overall)
