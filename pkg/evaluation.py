"""
k-fold cross-validation and the mean CV score.

make_folds builds a (by default stratified) partition of the rows;
cross_validate fits a fresh model per fold on the rows outside it, scores
accuracy on the held-out fold and assembles a CVReport. Folds may run on a
thread pool; results are keyed by fold index so the report does not depend
on completion order.
"""

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from config import CV_FOLDS
from dermatology_data import FeatureMatrix
from errors import FoldError, LeakageError
from numeric_core import RngState, derive_seed

ModelFactory = Callable[[int], Any]


@dataclass
class FoldPlan:
    """Row indices of each fold, every fold sorted ascending."""

    k: int
    folds: List[np.ndarray]
    seed: int
    stratified: bool = True

    @property
    def n_rows(self) -> int:
        return int(sum(fold.size for fold in self.folds))

    @property
    def fold_sizes(self) -> List[int]:
        return [int(fold.size) for fold in self.folds]

    def train_indices(self, i: int) -> np.ndarray:
        """Every row outside fold i, ascending."""
        rest = [fold for j, fold in enumerate(self.folds) if j != i]
        return np.sort(np.concatenate(rest)).astype(np.int64)

    def validate(self, n_rows: int):
        """Raise ValueError unless the folds partition range(n_rows)."""
        seen = np.concatenate(self.folds) if self.folds else np.zeros(0, dtype=np.int64)
        if seen.size != n_rows or not np.array_equal(np.sort(seen), np.arange(n_rows)):
            raise ValueError(f"fold plan does not partition {n_rows} rows")


def make_folds(
    labels: Sequence[int],
    k: int = CV_FOLDS,
    seed: int = 0,
    stratified: bool = True,
) -> FoldPlan:
    """
    Assign rows to k folds.

    Stratified plans shuffle the rows of each class and deal them
    round-robin, continuing from the fold where the previous class stopped,
    so both per-class and total fold sizes differ by at most one. Otherwise
    all rows are shuffled together and dealt round-robin.

    Args:
        labels: Class label per row
        k: Number of folds
        seed: Seed of the shuffles
        stratified: Deal each class separately

    Returns:
        FoldPlan
    """
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.size
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    if k > n:
        raise ValueError(f"cannot split {n} rows into {k} folds")

    rng = RngState.from_seed(seed)
    buckets: List[List[int]] = [[] for _ in range(k)]
    if stratified:
        position = 0
        for c in np.unique(labels):
            members = np.nonzero(labels == c)[0]
            for row in members[rng.child("class", int(c)).permutation(members.size)]:
                buckets[position % k].append(int(row))
                position += 1
    else:
        for position, row in enumerate(rng.child("all").permutation(n)):
            buckets[position % k].append(int(row))

    folds = [np.array(sorted(bucket), dtype=np.int64) for bucket in buckets]
    return FoldPlan(k=k, folds=folds, seed=seed, stratified=stratified)


def confusion_matrix(truth: Sequence[int], predicted: Sequence[int], n_classes: int) -> np.ndarray:
    """Counts with rows = true class, columns = predicted class."""
    matrix = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(matrix, (np.asarray(truth, dtype=np.int64), np.asarray(predicted, dtype=np.int64)), 1)
    return matrix


def config_fingerprint(description: Dict[str, Any]) -> str:
    """Short stable hash of a JSON-serializable model description."""
    payload = json.dumps(description, sort_keys=True, default=str)
    return hashlib.sha256(payload.encode('utf-8')).hexdigest()[:12]


@dataclass
class CVReport:
    """Per-fold accuracies of one model configuration under one seed."""

    fold_accuracies: List[float]
    fingerprint: str
    seed: int
    wall_time: float = 0.0
    fold_sizes: List[int] = field(default_factory=list)
    confusion: Optional[np.ndarray] = None
    description: str = ""

    @property
    def mean_cv_score(self) -> float:
        """100 x arithmetic mean of the fold accuracies."""
        return 100.0 * float(np.mean(self.fold_accuracies))

    def to_csv_rows(self) -> List[Dict[str, Any]]:
        """One row per fold."""
        sizes = self.fold_sizes or [None] * len(self.fold_accuracies)
        return [
            {'fingerprint': self.fingerprint, 'seed': self.seed, 'fold': i,
             'fold_size': size, 'accuracy': accuracy}
            for i, (size, accuracy) in enumerate(zip(sizes, self.fold_accuracies), 1)
        ]

    def summary_row(self) -> Dict[str, Any]:
        """Fingerprint, seed, every fold accuracy and the mean in one row."""
        row = {
            'description': self.description,
            'fingerprint': self.fingerprint,
            'seed': self.seed,
        }
        for i, accuracy in enumerate(self.fold_accuracies, 1):
            row[f'fold_{i}'] = accuracy
        row['mean_cv_score'] = self.mean_cv_score
        return row

    def summary_line(self) -> str:
        return (f"{self.description or self.fingerprint}: {self.mean_cv_score:.2f}% "
                f"over {len(self.fold_accuracies)} folds (seed {self.seed}, {self.wall_time:.1f}s)")


def _run_fold(factory: ModelFactory, data: FeatureMatrix, plan: FoldPlan, i: int, model_seed: int):
    test_idx = plan.folds[i]
    train_idx = plan.train_indices(i)
    if np.intersect1d(train_idx, test_idx).size:
        raise LeakageError(f"fold {i}: held-out rows present in the training partition")
    try:
        model = factory(model_seed)
        model.fit(data.features[train_idx], data.labels[train_idx])
        predicted = np.asarray(model.predict(data.features[test_idx]), dtype=np.int64)
    except LeakageError:
        raise
    except Exception as e:
        raise FoldError(i, e) from e
    truth = data.labels[test_idx]
    return float(np.mean(predicted == truth)), truth, predicted


def cross_validate(
    factory: ModelFactory,
    data: FeatureMatrix,
    plan: FoldPlan,
    seed: int = 0,
    description: str = "",
    fingerprint: str = "",
    n_classes: Optional[int] = None,
    max_workers: int = 1,
    verbose: bool = False,
) -> CVReport:
    """
    Run k-fold cross-validation.

    The factory is called once per fold with a seed derived from seed and
    the fold index, and must return a fresh object with fit(x, y) and
    predict(x). Only rows outside the held-out fold reach fit.

    Args:
        factory: Seed -> unfitted model
        data: Encoded dataset
        plan: Fold plan over data's rows
        seed: Source of the per-fold model seeds
        description: Human-readable configuration label
        fingerprint: Configuration fingerprint recorded in the report
        n_classes: Minimum confusion matrix size; grows to cover every label seen
        max_workers: Folds evaluated concurrently
        verbose: Show a progress bar over folds

    Returns:
        CVReport
    """
    plan.validate(data.rows)
    k = plan.k
    accuracies: Dict[int, float] = {}
    outcomes: Dict[int, tuple] = {}
    start = time.perf_counter()
    seeds = [derive_seed(seed, "fold", i) for i in range(k)]

    def record(i, result):
        accuracy, truth, predicted = result
        accuracies[i] = accuracy
        outcomes[i] = (truth, predicted)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            futures = {executor.submit(_run_fold, factory, data, plan, i, seeds[i]): i for i in range(k)}
            for future in tqdm(as_completed(futures), total=k, desc="Folds", disable=not verbose, leave=False):
                record(futures[future], future.result())
    else:
        for i in tqdm(range(k), desc="Folds", disable=not verbose, leave=False):
            record(i, _run_fold(factory, data, plan, i, seeds[i]))

    # a model may predict a class absent from the data
    largest = max([int(data.labels.max())] + [int(p.max()) for _, p in outcomes.values() if p.size])
    n_classes = max(n_classes or 0, largest + 1)
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    for i in range(k):
        confusion += confusion_matrix(*outcomes[i], n_classes)

    report = CVReport(
        fold_accuracies=[accuracies[i] for i in range(k)],
        fingerprint=fingerprint,
        seed=seed,
        wall_time=time.perf_counter() - start,
        fold_sizes=plan.fold_sizes,
        confusion=confusion,
        description=description,
    )
    if verbose:
        print(f"[INFO] {report.summary_line()}")
    return report
