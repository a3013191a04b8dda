"""
Two-stage Derm2Vec classifier.

Stage one fits the autoencoder on the training features alone. Stage two
encodes those rows into patient vectors and fits a dropout-regularized
softmax network on the codes. Prediction encodes then classifies, in eval
mode throughout.

Usage:
    from derm2vec import Derm2VecConfig, fit_derm2vec, predict

    model = fit_derm2vec(x_train, y_train, Derm2VecConfig(seed=7))
    labels = predict(model, x_test)
"""

from dataclasses import asdict, dataclass, field
from typing import Optional, Tuple

import numpy as np

from autoencoder import AutoencoderSpec, build_autoencoder, encode_matrix, encoding_dim, train_autoencoder
from config import N_CLASSES
from errors import DivergenceError, ShapeError, SpecError
from neural import Network, TrainConfig, dense_spec, fit, init_network, one_hot, predict_classes
from numeric_core import Matrix, RngState, derive_seed


@dataclass(frozen=True)
class Derm2VecConfig:
    """Autoencoder and classifier settings plus the master seed."""

    ae_spec: AutoencoderSpec = field(default_factory=AutoencoderSpec)
    ae_train: TrainConfig = field(default_factory=TrainConfig)
    clf_hidden: Tuple[int, ...] = (100,)
    clf_dropout: Optional[float] = 0.5
    clf_train: TrainConfig = field(default_factory=TrainConfig)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'clf_hidden', tuple(int(w) for w in self.clf_hidden))
        if not self.clf_hidden:
            raise SpecError("the classifier needs at least one hidden layer")
        if self.clf_dropout is not None and not 0.0 <= self.clf_dropout < 1.0:
            raise SpecError(f"clf_dropout must lie in [0, 1), got {self.clf_dropout}")

    def describe(self) -> dict:
        """Plain-dict echo of the configuration (seeds of the train configs excluded)."""
        ae_train = asdict(self.ae_train)
        clf_train = asdict(self.clf_train)
        ae_train.pop('seed')
        clf_train.pop('seed')
        return {
            'ae_spec': asdict(self.ae_spec),
            'ae_train': ae_train,
            'clf_hidden': list(self.clf_hidden),
            'clf_dropout': self.clf_dropout,
            'clf_train': clf_train,
            'seed': self.seed,
        }


@dataclass
class FittedDerm2Vec:
    autoencoder: Network
    classifier: Network
    config: Derm2VecConfig

    def __post_init__(self):
        d = encoding_dim(self.autoencoder)
        if self.classifier.spec.input_dim != d:
            raise SpecError(
                f"classifier takes {self.classifier.spec.input_dim} inputs, autoencoder encodes to {d}"
            )

    @property
    def dims(self) -> Tuple[int, int, int]:
        return (self.autoencoder.spec.input_dim, encoding_dim(self.autoencoder), self.classifier.spec.output_dim)


def classifier_spec(cfg: Derm2VecConfig, n_classes: int = N_CLASSES):
    return dense_spec(
        cfg.ae_spec.encoding_dim,
        cfg.clf_hidden,
        n_classes,
        dropout_rate=cfg.clf_dropout or 0.0,
    )


def fit_classifier_on_codes(
    codes: Matrix,
    y: np.ndarray,
    cfg: Derm2VecConfig,
    n_classes: int = N_CLASSES,
    verbose: bool = False,
) -> Network:
    """
    Fit the softmax classifier on patient vectors.

    Args:
        codes: Bottleneck codes (n x encoding_dim)
        y: Labels in 0..n_classes-1
        cfg: Pipeline configuration
        n_classes: Output width
        verbose: Show a progress bar

    Returns:
        Trained classifier
    """
    if codes.ndim != 2 or codes.shape[1] != cfg.ae_spec.encoding_dim:
        raise ShapeError(
            f"the classifier only takes {cfg.ae_spec.encoding_dim}-dim codes, got shape {codes.shape}"
        )
    clf_seed = derive_seed(cfg.seed, "clf")
    net = init_network(classifier_spec(cfg, n_classes), RngState.from_seed(clf_seed).child("init"))
    train_cfg = cfg.clf_train.with_seed(derive_seed(clf_seed, "train"))
    trained, _ = fit(net, codes, one_hot(y, n_classes), train_cfg, verbose=verbose, desc="Classifier")
    return trained


def fit_derm2vec(
    x_train: Matrix,
    y_train: np.ndarray,
    cfg: Derm2VecConfig,
    verbose: bool = False,
) -> FittedDerm2Vec:
    """
    Fit the autoencoder, then the classifier on its codes.

    Seeds for the two stages are derived from cfg.seed with the tags "ae"
    and "clf". A divergence in either stage is re-raised tagged with it.

    Args:
        x_train: Training rows (n x input_dim)
        y_train: Training labels in 0..5
        cfg: Pipeline configuration
        verbose: Show progress bars

    Returns:
        FittedDerm2Vec
    """
    y_train = np.asarray(y_train, dtype=np.int64)
    if x_train.ndim != 2 or x_train.shape[1] != cfg.ae_spec.input_dim:
        raise ShapeError(f"expected {cfg.ae_spec.input_dim} input columns, got shape {x_train.shape}")
    if x_train.shape[0] != y_train.shape[0]:
        raise ShapeError(f"{x_train.shape[0]} rows but {y_train.shape[0]} labels")

    ae_seed = derive_seed(cfg.seed, "ae")
    ae = build_autoencoder(cfg.ae_spec, RngState.from_seed(ae_seed).child("init"))
    try:
        ae, _ = train_autoencoder(ae, x_train, cfg.ae_train.with_seed(derive_seed(ae_seed, "train")), verbose)
    except DivergenceError as e:
        raise e.with_stage("autoencoder") from e

    codes = encode_matrix(ae, x_train)
    try:
        clf = fit_classifier_on_codes(codes, y_train, cfg, verbose=verbose)
    except DivergenceError as e:
        raise e.with_stage("classifier") from e

    return FittedDerm2Vec(autoencoder=ae, classifier=clf, config=cfg)


def predict(model: FittedDerm2Vec, x: Matrix) -> np.ndarray:
    """Encode then classify; arg-max label per row."""
    input_dim = model.autoencoder.spec.input_dim
    if x.ndim != 2 or x.shape[1] != input_dim:
        raise ShapeError(f"expected {input_dim} input columns, got shape {x.shape}")
    if x.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return predict_classes(model.classifier, encode_matrix(model.autoencoder, x))
