"""
Classical comparison classifiers built on numpy.

k-nearest neighbors, Gaussian naive Bayes, a CART decision tree with Gini
impurity, a bootstrap random forest of such trees, and the shallow
one-hidden-layer network. All ties resolve to the lowest index: nearer
training row first, then lowest class, feature and threshold.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from config import NB_VAR_SMOOTHING
from errors import ShapeError
from neural import TrainConfig, dense_spec, fit, init_network, one_hot, predict_classes
from numeric_core import Matrix, RngState, derive_seed


def _n_classes(labels: np.ndarray, n_classes: Optional[int]) -> int:
    if n_classes is not None:
        return int(n_classes)
    return int(labels.max()) + 1 if labels.size else 0


def _check_xy(x: Matrix, y: np.ndarray):
    if x.ndim != 2:
        raise ShapeError(f"expected a 2-D feature matrix, got shape {x.shape}")
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"{x.shape[0]} feature rows but {y.shape[0]} labels")


# ---------------------------------------------------------------------------
# k-nearest neighbors
# ---------------------------------------------------------------------------

@dataclass
class KnnModel:
    """Stored training rows; Euclidean metric."""

    features: Matrix
    labels: np.ndarray
    k: int = 5
    n_classes: int = 0
    metric: str = 'euclidean'


def knn_fit(x: Matrix, y: Sequence[int], k: int = 5, n_classes: Optional[int] = None) -> KnnModel:
    y = np.asarray(y, dtype=np.int64)
    _check_xy(x, y)
    if x.shape[0] == 0:
        raise ValueError("kNN needs at least one training row")
    if not 1 <= k <= x.shape[0]:
        raise ValueError(f"k must lie in 1..{x.shape[0]} (training rows), got {k}")
    return KnnModel(features=x, labels=y, k=k, n_classes=_n_classes(y, n_classes))


def knn_predict(model: KnnModel, test: Matrix) -> np.ndarray:
    """
    Majority vote among the k nearest training rows.

    Distance ties go to the lower training-row index, vote ties to the
    lowest class.

    Args:
        model: Fitted kNN model
        test: Query rows

    Returns:
        Predicted labels
    """
    if test.ndim != 2 or test.shape[1] != model.features.shape[1]:
        raise ShapeError(f"queries need {model.features.shape[1]} columns, got shape {test.shape}")
    predictions = np.empty(test.shape[0], dtype=np.int64)
    for i, query in enumerate(test):
        distances = np.sum((model.features - query) ** 2, axis=1)
        nearest = np.argsort(distances, kind='stable')[:model.k]
        votes = np.bincount(model.labels[nearest], minlength=model.n_classes)
        predictions[i] = int(np.argmax(votes))
    return predictions


def knn_fit_predict(x: Matrix, y: Sequence[int], test: Matrix, k: int = 5) -> np.ndarray:
    return knn_predict(knn_fit(x, y, k), test)


# ---------------------------------------------------------------------------
# Gaussian naive Bayes
# ---------------------------------------------------------------------------

@dataclass
class GaussianNbModel:
    """Per-class priors, feature means and floored variances."""

    classes: np.ndarray
    priors: np.ndarray
    means: Matrix
    variances: Matrix
    var_floor: float


def gnb_fit(
    x: Matrix,
    y: Sequence[int],
    classes: Optional[Sequence[int]] = None,
    var_smoothing: float = NB_VAR_SMOOTHING,
) -> GaussianNbModel:
    """
    Fit class priors and per-feature Gaussians.

    A floor of var_smoothing times the largest feature variance is added to
    every variance.

    Args:
        x: Training rows
        y: Training labels
        classes: Classes the model must cover (default: the classes present)
        var_smoothing: Relative variance floor

    Returns:
        GaussianNbModel
    """
    y = np.asarray(y, dtype=np.int64)
    _check_xy(x, y)
    if x.shape[0] == 0:
        raise ValueError("naive Bayes needs at least one training row")
    classes = np.unique(y) if classes is None else np.asarray(sorted(classes), dtype=np.int64)

    max_var = float(np.var(x, axis=0).max())
    var_floor = var_smoothing * max_var if max_var > 0 else var_smoothing

    priors, means, variances = [], [], []
    for c in classes:
        rows = x[y == c]
        if rows.shape[0] == 0:
            raise ValueError(f"class {c} has no training samples")
        priors.append(rows.shape[0] / x.shape[0])
        means.append(rows.mean(axis=0))
        variances.append(rows.var(axis=0) + var_floor)

    return GaussianNbModel(
        classes=classes,
        priors=np.array(priors),
        means=np.vstack(means),
        variances=np.vstack(variances),
        var_floor=var_floor,
    )


def _gnb_joint_log_likelihood(model: GaussianNbModel, test: Matrix) -> Matrix:
    if test.ndim != 2 or test.shape[1] != model.means.shape[1]:
        raise ShapeError(f"queries need {model.means.shape[1]} columns, got shape {test.shape}")
    jll = np.empty((test.shape[0], model.classes.size))
    for j in range(model.classes.size):
        log_norm = -0.5 * np.sum(np.log(2.0 * np.pi * model.variances[j]))
        squared = np.sum((test - model.means[j]) ** 2 / model.variances[j], axis=1)
        jll[:, j] = np.log(model.priors[j]) + log_norm - 0.5 * squared
    return jll


def gnb_predict(model: GaussianNbModel, test: Matrix) -> np.ndarray:
    """Maximum a-posteriori class; ties to the lowest class."""
    if test.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return model.classes[np.argmax(_gnb_joint_log_likelihood(model, test), axis=1)]


def gnb_predict_proba(model: GaussianNbModel, test: Matrix) -> Matrix:
    """Posterior class probabilities, columns ordered as model.classes."""
    jll = _gnb_joint_log_likelihood(model, test)
    jll -= jll.max(axis=1, keepdims=True)
    posterior = np.exp(jll)
    return posterior / posterior.sum(axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# CART decision tree
# ---------------------------------------------------------------------------

@dataclass
class TreeNode:
    """Internal split (feature, threshold) or leaf; counts is the class histogram of its training rows."""

    counts: np.ndarray
    depth: int = 0
    feature: Optional[int] = None
    threshold: Optional[float] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    @property
    def n_samples(self) -> int:
        return int(self.counts.sum())

    @property
    def prediction(self) -> int:
        return int(np.argmax(self.counts))


@dataclass
class TreeModel:
    root: TreeNode
    n_classes: int
    n_features: int
    max_depth: Optional[int] = None
    min_leaf: int = 1


def gini(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(1.0 - np.sum(p * p))


@dataclass(frozen=True)
class SplitCandidate:
    """
    A candidate split scored exactly.

    Weighted child Gini times n equals n - score, with
    score = sum(cL^2)/nL + sum(cR^2)/nR = num / den kept as integers, so
    comparisons between candidates never depend on rounding.
    """

    feature: int
    threshold: float
    num: int
    den: int

    def better_than(self, other: Optional["SplitCandidate"]) -> bool:
        if other is None:
            return True
        return self.num * other.den > other.num * self.den


def best_split_for_feature(
    values: np.ndarray,
    labels: np.ndarray,
    n_classes: int,
    feature: int,
    min_leaf: int = 1,
) -> Optional[SplitCandidate]:
    """
    Best threshold of one feature.

    Thresholds are midpoints between consecutive distinct sorted values; the
    lowest threshold wins ties.

    Args:
        values: Feature column of the node's rows
        labels: Labels of the node's rows
        n_classes: Number of classes
        feature: Feature index (recorded in the result)
        min_leaf: Minimum rows on each side

    Returns:
        Best SplitCandidate, or None when the feature is constant
    """
    order = np.argsort(values, kind='stable')
    sorted_values = values[order]
    n = sorted_values.size
    boundaries = np.nonzero(sorted_values[1:] != sorted_values[:-1])[0] + 1
    if boundaries.size == 0:
        return None

    cumulative = np.cumsum(np.eye(n_classes, dtype=np.int64)[labels[order]], axis=0)
    total = cumulative[-1]
    left = cumulative[boundaries - 1]
    right = total - left
    n_left = boundaries.astype(np.int64)
    n_right = n - n_left
    sq_left = np.sum(left * left, axis=1)
    sq_right = np.sum(right * right, axis=1)

    best = None
    for j in range(boundaries.size):
        nl, nr = int(n_left[j]), int(n_right[j])
        if nl < min_leaf or nr < min_leaf:
            continue
        b = boundaries[j]
        candidate = SplitCandidate(
            feature=feature,
            threshold=float((sorted_values[b - 1] + sorted_values[b]) / 2.0),
            num=int(sq_left[j]) * nr + int(sq_right[j]) * nl,
            den=nl * nr,
        )
        if candidate.better_than(best):
            best = candidate
    return best


def find_best_split(
    x: Matrix,
    y: np.ndarray,
    n_classes: int,
    features: Sequence[int],
    min_leaf: int = 1,
) -> Optional[SplitCandidate]:
    """Best split over the given features, scanned in ascending index order."""
    best = None
    for feature in sorted(features):
        candidate = best_split_for_feature(x[:, feature], y, n_classes, int(feature), min_leaf)
        if candidate is not None and candidate.better_than(best):
            best = candidate
    return best


def _grow(
    x: Matrix,
    y: np.ndarray,
    n_classes: int,
    depth: int,
    max_depth: Optional[int],
    min_leaf: int,
    max_features: Optional[int],
    rng: Optional[RngState],
) -> TreeNode:
    counts = np.bincount(y, minlength=n_classes).astype(np.int64)
    node = TreeNode(counts=counts, depth=depth)
    n = y.size
    if np.count_nonzero(counts) <= 1:
        return node
    if max_depth is not None and depth >= max_depth:
        return node
    if n < 2 * min_leaf:
        return node

    n_features = x.shape[1]
    if max_features is None or max_features >= n_features:
        features = range(n_features)
    else:
        features = rng.choice(n_features, max_features)

    split = find_best_split(x, y, n_classes, features, min_leaf)
    if split is None:
        return node

    go_left = x[:, split.feature] <= split.threshold
    node.feature = split.feature
    node.threshold = split.threshold
    node.left = _grow(x[go_left], y[go_left], n_classes, depth + 1, max_depth, min_leaf, max_features, rng)
    node.right = _grow(x[~go_left], y[~go_left], n_classes, depth + 1, max_depth, min_leaf, max_features, rng)
    return node


def tree_fit(
    x: Matrix,
    y: Sequence[int],
    max_depth: Optional[int] = None,
    min_leaf: int = 1,
    n_classes: Optional[int] = None,
    max_features: Optional[int] = None,
    rng: Optional[RngState] = None,
) -> TreeModel:
    """
    Greedy CART with Gini impurity.

    A node becomes a leaf when it is pure, reaches max_depth, or cannot be
    split into two children of at least min_leaf rows each.

    Args:
        x: Training rows
        y: Training labels (0-based)
        max_depth: Depth limit (None = unlimited)
        min_leaf: Minimum rows per leaf
        n_classes: Number of classes (default: max label + 1)
        max_features: Features drawn per split (None = all)
        rng: Random stream for feature draws

    Returns:
        TreeModel
    """
    y = np.asarray(y, dtype=np.int64)
    _check_xy(x, y)
    if y.size == 0:
        raise ValueError("a decision tree needs at least one training row")
    if min_leaf < 1:
        raise ValueError(f"min_leaf must be positive, got {min_leaf}")
    if max_features is not None and max_features < x.shape[1] and rng is None:
        raise ValueError("feature subsampling needs an rng")
    k = _n_classes(y, n_classes)
    root = _grow(x, y, k, 0, max_depth, min_leaf, max_features, rng)
    return TreeModel(root=root, n_classes=k, n_features=x.shape[1], max_depth=max_depth, min_leaf=min_leaf)


def _predict_node(node: TreeNode, x: Matrix, rows: np.ndarray, out: np.ndarray):
    if node.is_leaf:
        out[rows] = node.prediction
        return
    go_left = x[rows, node.feature] <= node.threshold
    _predict_node(node.left, x, rows[go_left], out)
    _predict_node(node.right, x, rows[~go_left], out)


def tree_predict(model: TreeModel, test: Matrix) -> np.ndarray:
    if test.ndim != 2 or test.shape[1] != model.n_features:
        raise ShapeError(f"queries need {model.n_features} columns, got shape {test.shape}")
    out = np.empty(test.shape[0], dtype=np.int64)
    _predict_node(model.root, test, np.arange(test.shape[0]), out)
    return out


def tree_depth(model: TreeModel) -> int:
    def depth(node: TreeNode) -> int:
        return node.depth if node.is_leaf else max(depth(node.left), depth(node.right))
    return depth(model.root)


def tree_leaf_count(model: TreeModel) -> int:
    def leaves(node: TreeNode) -> int:
        return 1 if node.is_leaf else leaves(node.left) + leaves(node.right)
    return leaves(model.root)


# ---------------------------------------------------------------------------
# Random forest
# ---------------------------------------------------------------------------

@dataclass
class ForestModel:
    trees: List[TreeModel]
    n_estimators: int
    max_depth: Optional[int]
    tree_seeds: List[int]
    max_features: Optional[int]
    n_classes: int
    bootstrap_rows: List[np.ndarray] = field(default_factory=list)


def forest_fit(
    x: Matrix,
    y: Sequence[int],
    n_estimators: int = 100,
    max_depth: Optional[int] = 3,
    rng: Optional[RngState] = None,
    max_features: Optional[int] = -1,
    bootstrap: bool = True,
    min_leaf: int = 1,
    n_classes: Optional[int] = None,
) -> ForestModel:
    """
    Bootstrap-aggregated CART trees with per-split feature subsampling.

    Each tree gets its own stream derived from rng's seed and the tree index,
    draws n rows with replacement, and considers max_features features per
    split (-1 = floor(sqrt(n_features)), None = all).

    Args:
        x: Training rows
        y: Training labels
        n_estimators: Number of trees
        max_depth: Depth limit per tree
        rng: Random stream (seed source for every tree)
        max_features: Features per split
        bootstrap: Resample rows; False trains every tree on all rows in order
        min_leaf: Minimum rows per leaf
        n_classes: Number of classes (default: max label + 1)

    Returns:
        ForestModel
    """
    y = np.asarray(y, dtype=np.int64)
    _check_xy(x, y)
    if n_estimators < 1:
        raise ValueError(f"n_estimators must be positive, got {n_estimators}")
    rng = rng or RngState.from_seed(0)
    n, n_features = x.shape
    if max_features == -1:
        max_features = max(1, int(np.sqrt(n_features)))
    k = _n_classes(y, n_classes)

    trees, seeds, rows_used = [], [], []
    for t in range(n_estimators):
        seed = derive_seed(rng.seed, "tree", t)
        tree_rng = RngState.from_seed(seed)
        rows = tree_rng.integers(n, n) if bootstrap else np.arange(n)
        trees.append(tree_fit(x[rows], y[rows], max_depth=max_depth, min_leaf=min_leaf,
                              n_classes=k, max_features=max_features, rng=tree_rng.child("features")))
        seeds.append(seed)
        rows_used.append(rows)

    return ForestModel(trees=trees, n_estimators=n_estimators, max_depth=max_depth, tree_seeds=seeds,
                       max_features=max_features, n_classes=k, bootstrap_rows=rows_used)


def _vote(predictions: Matrix, n_classes: int) -> np.ndarray:
    """Column-wise majority over tree predictions (trees x rows); ties to the lowest class."""
    votes = np.zeros((predictions.shape[1], n_classes), dtype=np.int64)
    for row in predictions:
        votes[np.arange(row.size), row] += 1
    return np.argmax(votes, axis=1)


def forest_predict(model: ForestModel, test: Matrix) -> np.ndarray:
    if test.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    predictions = np.vstack([tree_predict(tree, test) for tree in model.trees])
    return _vote(predictions, model.n_classes)


def forest_oob_accuracy(model: ForestModel, x: Matrix, y: Sequence[int]) -> float:
    """
    Out-of-bag accuracy on the training rows.

    Each row is voted on only by trees whose bootstrap sample left it out;
    rows that every tree saw are skipped.

    Args:
        model: Forest fitted on x, y
        x: The training rows
        y: The training labels

    Returns:
        Accuracy in [0, 1] (nan when no row is out of bag)
    """
    y = np.asarray(y, dtype=np.int64)
    votes = np.zeros((x.shape[0], model.n_classes), dtype=np.int64)
    for tree, rows in zip(model.trees, model.bootstrap_rows):
        out_of_bag = np.setdiff1d(np.arange(x.shape[0]), rows)
        if out_of_bag.size:
            votes[out_of_bag, tree_predict(tree, x[out_of_bag])] += 1
    voted = votes.sum(axis=1) > 0
    if not voted.any():
        return float('nan')
    return float(np.mean(np.argmax(votes[voted], axis=1) == y[voted]))


# ---------------------------------------------------------------------------
# Shallow ANN
# ---------------------------------------------------------------------------

SHALLOW_HIDDEN = (2,)


def shallow_ann_spec(input_dim: int = 129, n_classes: int = 6, hidden: Sequence[int] = SHALLOW_HIDDEN):
    return dense_spec(input_dim, hidden, n_classes)


def shallow_ann(
    x: Matrix,
    y: Sequence[int],
    test: Matrix,
    cfg: Optional[TrainConfig] = None,
    n_classes: int = 6,
    seed: int = 0,
) -> np.ndarray:
    """
    One hidden layer of 2 ReLU units and a softmax head, trained then applied.

    Args:
        x: Training rows
        y: Training labels
        test: Rows to classify
        cfg: Training settings (default TrainConfig with the given seed)
        n_classes: Number of classes
        seed: Seed for initialization and training

    Returns:
        Predicted labels for test
    """
    cfg = cfg or TrainConfig(seed=derive_seed(seed, "train"))
    rng = RngState.from_seed(derive_seed(seed, "init"))
    net = init_network(shallow_ann_spec(x.shape[1], n_classes), rng)
    net, _ = fit(net, x, one_hot(y, n_classes), cfg)
    return predict_classes(net, test)
