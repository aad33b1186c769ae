"""Classical baseline classifiers: Gini decision tree, AdaBoost, linear SVM.

All three are plain numpy implementations with deterministic seeded
training: the tree grows greedy binary splits on Gini impurity, AdaBoost is
SAMME over depth-1 stumps, and the SVM minimizes the one-vs-rest hinge loss
by full-batch subgradient descent on standardized features.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError


# ---------------------------------------------------------------------------
# Decision tree


@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode" = None
    right: "TreeNode" = None
    prediction: int = 0


@dataclass
class TreeModel:
    root: TreeNode
    classes: np.ndarray


def _gini_best_split(x, y_idx, n_classes, min_leaf):
    """Best (feature, threshold, impurity drop) over all midpoint splits."""
    n = y_idx.size
    onehot = np.eye(n_classes)[y_idx]
    total = onehot.sum(axis=0)
    parent_gini = 1.0 - np.sum((total / n) ** 2)
    best = (None, 0.0, 0.0)
    for j in range(x.shape[1]):
        order = np.argsort(x[:, j], kind="stable")
        xs = x[order, j]
        counts = np.cumsum(onehot[order], axis=0)
        left_n = np.arange(1, n + 1)
        valid = np.flatnonzero(xs[:-1] < xs[1:])
        if valid.size == 0:
            continue
        valid = valid[(left_n[valid] >= min_leaf)
                      & (n - left_n[valid] >= min_leaf)]
        if valid.size == 0:
            continue
        lc = counts[valid]
        ln = left_n[valid][:, None]
        rc = total - lc
        rn = n - left_n[valid][:, None]
        gini_l = 1.0 - np.sum((lc / ln) ** 2, axis=1)
        gini_r = 1.0 - np.sum((rc / rn) ** 2, axis=1)
        weighted = (ln[:, 0] * gini_l + rn[:, 0] * gini_r) / n
        k = int(np.argmin(weighted))
        drop = parent_gini - weighted[k]
        if drop > best[2] + 1e-12:
            cut = valid[k]
            best = (j, 0.5 * (xs[cut] + xs[cut + 1]), drop)
    return best


def _grow(x, y_idx, n_classes, depth, max_depth, min_leaf):
    counts = np.bincount(y_idx, minlength=n_classes)
    majority = int(np.argmax(counts))
    if depth >= max_depth or counts.max() == y_idx.size or y_idx.size < 2 * min_leaf:
        return TreeNode(prediction=majority)
    feature, threshold, drop = _gini_best_split(x, y_idx, n_classes, min_leaf)
    if feature is None or drop <= 0.0:
        return TreeNode(prediction=majority)
    mask = x[:, feature] <= threshold
    return TreeNode(
        feature=feature, threshold=threshold, prediction=majority,
        left=_grow(x[mask], y_idx[mask], n_classes, depth + 1, max_depth,
                   min_leaf),
        right=_grow(x[~mask], y_idx[~mask], n_classes, depth + 1, max_depth,
                    min_leaf))


def train_tree(features, labels, max_depth: int = 12,
               min_leaf: int = 1) -> TreeModel:
    """Greedy Gini decision tree with depth and leaf-size limits."""
    x = np.asarray(features, dtype=float)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if classes.size < 2:
        raise ContractError("training needs at least two classes")
    y_idx = np.searchsorted(classes, labels)
    root = _grow(x, y_idx, classes.size, 0, max_depth, min_leaf)
    return TreeModel(root=root, classes=classes)


def tree_predict(model: TreeModel, features) -> np.ndarray:
    x = np.asarray(features, dtype=float)
    out = np.empty(x.shape[0], dtype=int)
    for i, row in enumerate(x):
        node = model.root
        while node.left is not None:
            node = node.left if row[node.feature] <= node.threshold else node.right
        out[i] = node.prediction
    return model.classes[out]


# ---------------------------------------------------------------------------
# AdaBoost (SAMME) over depth-1 stumps


@dataclass
class Stump:
    feature: int
    threshold: float
    left_class: int
    right_class: int


@dataclass
class AdaBoostModel:
    stumps: list
    alphas: list
    classes: np.ndarray


def _best_stump(x, y_idx, w, n_classes):
    """Minimum weighted-error decision stump (one threshold, a class per side)."""
    best_err = np.inf
    best = None
    n = x.shape[0]
    for j in range(x.shape[1]):
        order = np.argsort(x[:, j], kind="stable")
        xs = x[order, j]
        wc = np.zeros((n, n_classes))
        wc[np.arange(n), y_idx[order]] = w[order]
        cum = np.cumsum(wc, axis=0)
        total = cum[-1]
        valid = np.flatnonzero(xs[:-1] < xs[1:])
        if valid.size == 0:
            continue
        left = cum[valid]
        right = total - left
        left_best = left.max(axis=1)
        right_best = right.max(axis=1)
        err = 1.0 - (left_best + right_best)      # weights sum to one
        k = int(np.argmin(err))
        if err[k] < best_err - 1e-15:
            best_err = err[k]
            cut = valid[k]
            best = Stump(
                feature=j,
                threshold=0.5 * (xs[cut] + xs[cut + 1]),
                left_class=int(np.argmax(left[k])),
                right_class=int(np.argmax(right[k])))
    if best is None:
        counts = np.bincount(y_idx, weights=w, minlength=n_classes)
        c = int(np.argmax(counts))
        best = Stump(feature=0, threshold=np.inf, left_class=c, right_class=c)
        best_err = 1.0 - counts[c]
    return best, max(best_err, 0.0)


def _stump_predict_idx(stump, x):
    side = x[:, stump.feature] <= stump.threshold
    return np.where(side, stump.left_class, stump.right_class)


def train_adaboost(features, labels, n_rounds: int = 50) -> AdaBoostModel:
    """SAMME boosting of decision stumps for ``n_rounds`` learning cycles."""
    x = np.asarray(features, dtype=float)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if classes.size < 2:
        raise ContractError("training needs at least two classes")
    if n_rounds < 1:
        raise ContractError("n_rounds must be >= 1")
    y_idx = np.searchsorted(classes, labels)
    n, n_classes = x.shape[0], classes.size
    w = np.full(n, 1.0 / n)
    stumps, alphas = [], []
    for _ in range(n_rounds):
        stump, err = _best_stump(x, y_idx, w, n_classes)
        if err >= 1.0 - 1.0 / n_classes:
            break
        err = max(err, 1e-12)
        alpha = np.log((1.0 - err) / err) + np.log(n_classes - 1.0)
        stumps.append(stump)
        alphas.append(alpha)
        miss = _stump_predict_idx(stump, x) != y_idx
        w = w * np.exp(alpha * miss)
        w /= w.sum()
        if err <= 1e-12:
            break
    return AdaBoostModel(stumps=stumps, alphas=alphas, classes=classes)


def adaboost_predict(model: AdaBoostModel, features) -> np.ndarray:
    x = np.asarray(features, dtype=float)
    votes = np.zeros((x.shape[0], model.classes.size))
    for stump, alpha in zip(model.stumps, model.alphas):
        pred = _stump_predict_idx(stump, x)
        votes[np.arange(x.shape[0]), pred] += alpha
    return model.classes[np.argmax(votes, axis=1)]


# ---------------------------------------------------------------------------
# Linear SVM (one-vs-rest hinge, subgradient descent)


@dataclass
class SvmModel:
    weights: np.ndarray      # (n_classes, n_features)
    biases: np.ndarray
    classes: np.ndarray
    feat_mean: np.ndarray
    feat_std: np.ndarray


def train_svm(features, labels, reg_lambda: float = 1e-4,
              n_epochs: int = 300, learning_rate: float = 0.5) -> SvmModel:
    """One-vs-rest linear SVM: hinge + L2, full-batch subgradient descent.

    The step size decays as lr / sqrt(t); features are standardized with
    training statistics stored on the model.
    """
    x = np.asarray(features, dtype=float)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if classes.size < 2:
        raise ContractError("training needs at least two classes")
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    xs = (x - mean) / std
    y_idx = np.searchsorted(classes, labels)
    n, d = xs.shape
    weights = np.zeros((classes.size, d))
    biases = np.zeros(classes.size)
    for c in range(classes.size):
        y = np.where(y_idx == c, 1.0, -1.0)
        w = np.zeros(d)
        b = 0.0
        for t in range(1, n_epochs + 1):
            margin = y * (xs @ w + b)
            active = margin < 1.0
            grad_w = reg_lambda * w - (y[active, None] * xs[active]).sum(0) / n
            grad_b = -y[active].sum() / n
            lr = learning_rate / np.sqrt(t)
            w -= lr * grad_w
            b -= lr * grad_b
        weights[c] = w
        biases[c] = b
    return SvmModel(weights=weights, biases=biases, classes=classes,
                    feat_mean=mean, feat_std=std)


def svm_predict(model: SvmModel, features) -> np.ndarray:
    x = (np.asarray(features, dtype=float) - model.feat_mean) / model.feat_std
    scores = x @ model.weights.T + model.biases
    return model.classes[np.argmax(scores, axis=1)]
