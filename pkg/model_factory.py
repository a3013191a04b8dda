"""
Model Factory

Creates classifier instances with a uniform fit/predict interface from a
method kind and a parameter dict, as found in the experiment config.
"""

from dataclasses import fields
from functools import partial
from typing import Any, Callable, Dict, Optional

import numpy as np

from autoencoder import AutoencoderSpec
from baselines import (
    SHALLOW_HIDDEN,
    forest_fit,
    forest_predict,
    gnb_fit,
    gnb_predict,
    knn_fit,
    knn_predict,
    shallow_ann_spec,
    tree_fit,
    tree_predict,
)
from config import ENCODER_WIDTHS, ENCODING_DIM, N_CLASSES, NB_VAR_SMOOTHING
from derm2vec import Derm2VecConfig, fit_derm2vec, predict
from neural import TrainConfig, dense_spec, fit, init_network, one_hot, predict_classes
from numeric_core import RngState, derive_seed

_TRAIN_FIELDS = {f.name for f in fields(TrainConfig)} - {'seed'}


def train_config(settings: Optional[Dict[str, Any]] = None, seed: int = 0) -> TrainConfig:
    """
    Build a TrainConfig from a settings dict.

    Args:
        settings: Any of epochs, batch_size, learning_rate, optimizer, beta1,
                  beta2, epsilon, shuffle
        seed: Training seed

    Returns:
        TrainConfig
    """
    settings = dict(settings or {})
    unknown = set(settings) - _TRAIN_FIELDS
    if unknown:
        raise ValueError(f"Unknown training settings: {sorted(unknown)}. Supported: {sorted(_TRAIN_FIELDS)}")
    return TrainConfig(seed=seed, **settings)


class Classifier:
    """Base of all factory products: fit(x, y) then predict(x)."""

    kind = ''

    def __init__(self, seed: int = 0, n_classes: int = N_CLASSES):
        self.seed = int(seed)
        self.n_classes = n_classes

    def fit(self, x: np.ndarray, y: np.ndarray) -> "Classifier":
        raise NotImplementedError

    def predict(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> Dict[str, Any]:
        return {}

    def describe(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'params': self.params()}


class DnnClassifier(Classifier):
    """Softmax network on the raw one-hot features."""

    kind = 'dnn'

    def __init__(self, hidden=(100,), dropout=None, training=None, **kwargs):
        super().__init__(**kwargs)
        self.hidden = tuple(int(w) for w in hidden)
        self.dropout = dropout
        self.training = dict(training or {})
        self.network = None

    def fit(self, x, y):
        spec = dense_spec(x.shape[1], self.hidden, self.n_classes, dropout_rate=self.dropout or 0.0)
        net = init_network(spec, RngState.from_seed(derive_seed(self.seed, "init")))
        cfg = train_config(self.training, derive_seed(self.seed, "train"))
        self.network, _ = fit(net, x, one_hot(y, self.n_classes), cfg)
        return self

    def predict(self, x):
        return predict_classes(self.network, x)

    def params(self):
        return {'hidden': list(self.hidden), 'dropout': self.dropout, 'training': self.training}


class Derm2VecClassifier(Classifier):
    """Autoencoder patient vectors followed by a softmax network."""

    kind = 'derm2vec'

    def __init__(self, encoding_dim=ENCODING_DIM, encoder_widths=ENCODER_WIDTHS, bottleneck_activation='relu',
                 hidden=(100,), dropout=0.5, ae_training=None, training=None, **kwargs):
        super().__init__(**kwargs)
        self.encoding_dim = int(encoding_dim)
        self.encoder_widths = tuple(int(w) for w in encoder_widths)
        self.bottleneck_activation = bottleneck_activation
        self.hidden = tuple(int(w) for w in hidden)
        self.dropout = dropout
        self.ae_training = dict(ae_training or {})
        self.training = dict(training or {})
        self.model = None

    def config(self, input_dim: int) -> Derm2VecConfig:
        return Derm2VecConfig(
            ae_spec=AutoencoderSpec(
                input_dim=input_dim,
                encoder_widths=self.encoder_widths,
                encoding_dim=self.encoding_dim,
                bottleneck_activation=self.bottleneck_activation,
            ),
            ae_train=train_config(self.ae_training),
            clf_hidden=self.hidden,
            clf_dropout=self.dropout,
            clf_train=train_config(self.training),
            seed=self.seed,
        )

    def fit(self, x, y):
        self.model = fit_derm2vec(x, y, self.config(x.shape[1]))
        return self

    def predict(self, x):
        return predict(self.model, x)

    def params(self):
        return {
            'encoding_dim': self.encoding_dim,
            'encoder_widths': list(self.encoder_widths),
            'bottleneck_activation': self.bottleneck_activation,
            'hidden': list(self.hidden),
            'dropout': self.dropout,
            'ae_training': self.ae_training,
            'training': self.training,
        }


class KnnClassifier(Classifier):
    kind = 'knn'

    def __init__(self, k=5, **kwargs):
        super().__init__(**kwargs)
        self.k = int(k)
        self.model = None

    def fit(self, x, y):
        self.model = knn_fit(x, y, self.k, n_classes=self.n_classes)
        return self

    def predict(self, x):
        return knn_predict(self.model, x)

    def params(self):
        return {'k': self.k}


class NaiveBayesClassifier(Classifier):
    kind = 'nb'

    def __init__(self, var_smoothing=NB_VAR_SMOOTHING, **kwargs):
        super().__init__(**kwargs)
        self.var_smoothing = float(var_smoothing)
        self.model = None

    def fit(self, x, y):
        self.model = gnb_fit(x, y, var_smoothing=self.var_smoothing)
        return self

    def predict(self, x):
        return gnb_predict(self.model, x)

    def params(self):
        return {'var_smoothing': self.var_smoothing}


class DecisionTreeClassifier(Classifier):
    kind = 'dt'

    def __init__(self, max_depth=None, min_leaf=1, **kwargs):
        super().__init__(**kwargs)
        self.max_depth = max_depth
        self.min_leaf = int(min_leaf)
        self.model = None

    def fit(self, x, y):
        self.model = tree_fit(x, y, max_depth=self.max_depth, min_leaf=self.min_leaf, n_classes=self.n_classes)
        return self

    def predict(self, x):
        return tree_predict(self.model, x)

    def params(self):
        return {'max_depth': self.max_depth, 'min_leaf': self.min_leaf}


class RandomForestClassifier(Classifier):
    kind = 'rf'

    def __init__(self, n_estimators=100, max_depth=3, max_features=-1, bootstrap=True, **kwargs):
        super().__init__(**kwargs)
        self.n_estimators = int(n_estimators)
        self.max_depth = max_depth
        self.max_features = max_features
        self.bootstrap = bool(bootstrap)
        self.model = None

    def fit(self, x, y):
        self.model = forest_fit(x, y, n_estimators=self.n_estimators, max_depth=self.max_depth,
                                rng=RngState.from_seed(self.seed), max_features=self.max_features,
                                bootstrap=self.bootstrap, n_classes=self.n_classes)
        return self

    def predict(self, x):
        return forest_predict(self.model, x)

    def params(self):
        return {'n_estimators': self.n_estimators, 'max_depth': self.max_depth,
                'max_features': self.max_features, 'bootstrap': self.bootstrap}


class ShallowAnnClassifier(Classifier):
    """One hidden layer of 2 units."""

    kind = 'ann'

    def __init__(self, hidden=SHALLOW_HIDDEN, training=None, **kwargs):
        super().__init__(**kwargs)
        self.hidden = tuple(int(w) for w in hidden)
        self.training = dict(training or {})
        self.network = None

    def fit(self, x, y):
        spec = shallow_ann_spec(x.shape[1], self.n_classes, self.hidden)
        net = init_network(spec, RngState.from_seed(derive_seed(self.seed, "init")))
        cfg = train_config(self.training, derive_seed(self.seed, "train"))
        self.network, _ = fit(net, x, one_hot(y, self.n_classes), cfg)
        return self

    def predict(self, x):
        return predict_classes(self.network, x)

    def params(self):
        return {'hidden': list(self.hidden), 'training': self.training}


class ConstantClassifier(Classifier):
    """Predicts one label everywhere: the given one, or the training majority."""

    kind = 'constant'

    def __init__(self, label=None, **kwargs):
        super().__init__(**kwargs)
        self.label = label
        self.fitted_label = None

    def fit(self, x, y):
        if self.label is not None:
            self.fitted_label = int(self.label)
        else:
            self.fitted_label = int(np.argmax(np.bincount(y, minlength=self.n_classes)))
        return self

    def predict(self, x):
        return np.full(x.shape[0], self.fitted_label, dtype=np.int64)

    def params(self):
        return {'label': self.label}


MODEL_TYPES = {
    cls.kind: cls
    for cls in (DnnClassifier, Derm2VecClassifier, KnnClassifier, NaiveBayesClassifier,
                DecisionTreeClassifier, RandomForestClassifier, ShallowAnnClassifier, ConstantClassifier)
}


def create_model(kind: str, params: Optional[Dict[str, Any]] = None, seed: int = 0,
                 n_classes: int = N_CLASSES) -> Classifier:
    """
    Factory function to create an unfitted classifier.

    Args:
        kind: Method name ('dnn', 'derm2vec', 'knn', 'nb', 'dt', 'rf', 'ann', 'constant')
        params: Constructor parameters of that method
        seed: Seed of every random choice the model makes
        n_classes: Number of classes

    Returns:
        Classifier instance

    Examples:
        # two hidden layers with dropout
        model = create_model('dnn', {'hidden': [100, 100], 'dropout': 0.5}, seed=1)

        # k-nearest neighbors
        model = create_model('knn', {'k': 5})
    """
    kind = (kind or '').lower()
    if kind not in MODEL_TYPES:
        raise ValueError(
            f"Unknown model type: {kind}. "
            f"Supported types: {', '.join(repr(k) for k in MODEL_TYPES)}"
        )
    try:
        return MODEL_TYPES[kind](seed=seed, n_classes=n_classes, **(params or {}))
    except TypeError as e:
        raise ValueError(f"Invalid parameters for model type '{kind}': {e}") from e


def model_factory(kind: str, params: Optional[Dict[str, Any]] = None,
                  n_classes: int = N_CLASSES) -> Callable[[int], Classifier]:
    """Seed -> fresh classifier, the form cross_validate consumes. Picklable."""
    create_model(kind, params, n_classes=n_classes)
    return partial(create_model, kind, params, n_classes=n_classes)


def describe_model(kind: str, params: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    return create_model(kind, params).describe()


def get_available_models() -> dict:
    """
    Get information about available classifiers.

    Returns:
        Dictionary with model information
    """
    return {
        'derm2vec': 'Autoencoder patient vectors (129 -> 200 -> 100 -> 50 -> d) + dropout softmax network',
        'dnn': 'Softmax network with ReLU hidden layers on the one-hot features',
        'knn': 'k-nearest neighbors, Euclidean distance, majority vote',
        'nb': 'Gaussian naive Bayes with a relative variance floor',
        'dt': 'CART decision tree, Gini impurity',
        'rf': 'Bootstrap random forest of depth-limited CART trees',
        'ann': 'Shallow network with one hidden layer of 2 units',
        'constant': 'Always predicts one label (majority class by default)',
    }
