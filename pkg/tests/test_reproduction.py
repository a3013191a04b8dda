"""
Checks against the real dermatology file.

Skipped unless DERM2VEC_DATA_PATH points at the file. The table runs are
marked slow and deselected by default; run them with `pytest -m slow`.
"""

import os

import numpy as np
import pytest

from config_loader import ConfigLoader
from dermatology_data import class_distribution, drop_missing, encode_features, get_schema, parse_dataset
from experiments import ExperimentConfig, run_experiment

DATA_PATH = os.getenv("DERM2VEC_DATA_PATH", "")
SCHEMA = get_schema(os.getenv("DERM2VEC_DATA_SCHEMA", "compact"))

pytestmark = pytest.mark.skipif(not os.path.isfile(DATA_PATH), reason="DERM2VEC_DATA_PATH not set")


def seeded_config(kind, **experiment_section):
    config = ConfigLoader()._get_default_config()
    config['data'] = {'path': DATA_PATH, 'schema': SCHEMA.name}
    config['seeds'] = 5
    config['jobs'] = os.cpu_count() or 1
    config['experiments'][kind].update(experiment_section)
    return ExperimentConfig.from_config(config, kind)


def test_data_fidelity():
    records = parse_dataset(DATA_PATH, SCHEMA)
    retained = drop_missing(records)
    assert len(records) == 366
    assert len(retained) == 358
    assert class_distribution(retained).as_list() == [111, 60, 71, 48, 48, 20]
    assert encode_features(retained, SCHEMA).features.shape == (358, SCHEMA.feature_count)


@pytest.mark.slow
def test_best_dnn_row():
    cfg = seeded_config('dnn_sweep', grid=[{'hidden': [100], 'dropout': 0.5}])
    row = run_experiment(cfg).rows[0]
    assert abs(row.mean_cv_score - 96.65) <= 4.0


@pytest.mark.slow
def test_best_derm2vec_row():
    cfg = seeded_config('derm2vec_sweep', grid=[{'encoding_dim': 32, 'hidden': [100], 'dropout': 0.5}])
    row = run_experiment(cfg).rows[0]
    assert abs(row.mean_cv_score - 96.92) <= 4.0


@pytest.mark.slow
def test_comparison_bands_and_ordering():
    table = run_experiment(seeded_config('comparison', published_only=[]))
    scores = {row.method: row.mean_cv_score for row in table.rows}
    assert abs(scores['nb'] - 92.68) <= 5.0
    assert abs(scores['dt'] - 93.10) <= 6.0
    assert abs(scores['knn'] - 79.30) <= 6.0
    classical = [scores[m] for m in ('dt', 'ann', 'rf', 'nb', 'knn')]
    assert scores['derm2vec'] > np.max(classical)
