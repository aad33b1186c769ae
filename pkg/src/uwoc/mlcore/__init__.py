"""From-scratch classifiers and cross-validated evaluation.

Recurrent classifiers (LSTM, bidirectional LSTM, GRU) are trained by
backpropagation through time with an adaptive-moment optimizer; classical
baselines (Gini decision tree, SAMME AdaBoost over stumps, linear SVM) and
the five-metric evaluation harness live alongside.
"""

from .rnn import (RNN_KINDS, RnnModel, grad_check, init_rnn, rnn_forward,
                  rnn_predict, sequences_from_features, train_rnn)
from .classic import train_adaboost, train_svm, train_tree
from .metrics import (ClassifierSpec, MetricsReport, confusion_matrix,
                      evaluate, metrics_from_confusion, train_classifier,
                      predict_classifier)

__all__ = [
    "RNN_KINDS", "RnnModel", "grad_check", "init_rnn", "rnn_forward",
    "rnn_predict", "sequences_from_features", "train_rnn",
    "train_adaboost", "train_svm", "train_tree",
    "ClassifierSpec", "MetricsReport", "confusion_matrix", "evaluate",
    "metrics_from_confusion", "train_classifier", "predict_classifier",
]
