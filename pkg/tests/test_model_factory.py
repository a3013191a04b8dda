import pickle

import numpy as np
import pytest

from dermatology_data import load_feature_matrix
from model_factory import (
    MODEL_TYPES,
    ConstantClassifier,
    Derm2VecClassifier,
    create_model,
    describe_model,
    get_available_models,
    model_factory,
    train_config,
)

FAST = {'epochs': 2, 'batch_size': 8}


def test_every_kind_is_documented():
    assert set(MODEL_TYPES) == set(get_available_models())


def test_unknown_kind_lists_supported_types():
    with pytest.raises(ValueError, match="Unknown model type: svm. Supported types:"):
        create_model('svm')


def test_bad_parameters_become_value_error():
    with pytest.raises(ValueError, match="Invalid parameters for model type 'knn'"):
        create_model('knn', {'neighbours': 3})


def test_train_config_rejects_unknown_keys():
    assert train_config({'epochs': 7}, seed=3).epochs == 7
    assert train_config(seed=3).seed == 3
    with pytest.raises(ValueError, match="Unknown training settings"):
        train_config({'momentum': 0.9})


@pytest.mark.parametrize("kind, params", [
    ('knn', {'k': 3}),
    ('nb', {}),
    ('dt', {'max_depth': 4}),
    ('rf', {'n_estimators': 5}),
    ('ann', {'training': FAST}),
    ('dnn', {'hidden': [8], 'dropout': 0.5, 'training': FAST}),
    ('derm2vec', {'encoding_dim': 4, 'encoder_widths': [16], 'hidden': [8],
                  'ae_training': FAST, 'training': FAST}),
    ('constant', {}),
])
def test_every_kind_fits_and_predicts(data_file, kind, params):
    data = load_feature_matrix(data_file)
    model = create_model(kind, params, seed=1).fit(data.features, data.labels)
    predicted = model.predict(data.features)
    assert predicted.shape == (data.rows,)
    assert predicted.min() >= 0 and predicted.max() < 6


def test_same_seed_same_predictions(data_file):
    data = load_feature_matrix(data_file)
    params = {'hidden': [8], 'dropout': 0.5, 'training': FAST}
    a = create_model('dnn', params, seed=9).fit(data.features, data.labels)
    b = create_model('dnn', params, seed=9).fit(data.features, data.labels)
    np.testing.assert_array_equal(a.predict(data.features), b.predict(data.features))


def test_factory_closure_passes_seed():
    build = model_factory('rf', {'n_estimators': 3})
    assert build(4).seed == 4
    assert build(5).n_estimators == 3
    with pytest.raises(ValueError):
        model_factory('nope')


def test_constant_classifier():
    x = np.zeros((5, 2))
    y = np.array([2, 2, 1, 0, 2])
    assert ConstantClassifier().fit(x, y).predict(x).tolist() == [2] * 5
    assert ConstantClassifier(label=4).fit(x, y).predict(x[:2]).tolist() == [4, 4]


def test_derm2vec_config_mapping():
    model = create_model('derm2vec', {'encoding_dim': 8, 'hidden': [100, 100], 'dropout': None}, seed=2)
    assert isinstance(model, Derm2VecClassifier)
    cfg = model.config(129)
    assert cfg.ae_spec.encoding_dim == 8
    assert cfg.ae_spec.encoder_widths == (200, 100, 50)
    assert cfg.clf_hidden == (100, 100)
    assert cfg.clf_dropout is None
    assert cfg.seed == 2


def test_describe_model_is_plain_data():
    description = describe_model('dnn', {'hidden': [100], 'dropout': 0.5})
    assert description == {'kind': 'dnn', 'params': {'hidden': [100], 'dropout': 0.5, 'training': {}}}


def test_factory_survives_pickling():
    build = pickle.loads(pickle.dumps(model_factory('knn', {'k': 3}, n_classes=4)))
    model = build(2)
    assert (model.k, model.seed, model.n_classes) == (3, 2, 4)
