"""
Shared fixtures: the flat modules on sys.path, a synthetic dermatology
file in the 34-field layout, and small seeded classification sets.
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from dermatology_data import COMPACT_SCHEMA, DermSchema  # noqa: E402


def synthetic_lines(n_per_class=(6, 4, 5, 3, 4, 2), missing_age=(), seed=0, schema: DermSchema = COMPACT_SCHEMA):
    """
    Data lines whose categorical values depend on the class.

    Attribute j of a class-c row is (c + j) % 4 unless a small amount of noise
    replaces it; rows listed in missing_age get '?' for age.
    """
    rng = np.random.default_rng(seed)
    n_categorical = len(schema.categorical)
    family = schema.categorical.index("family_history")
    lines = []
    row = 0
    for c, count in enumerate(n_per_class, 1):
        for _ in range(count):
            values = [(c + j) % 4 for j in range(n_categorical)]
            noisy = rng.integers(0, n_categorical)
            values[noisy] = int(rng.integers(0, 4))
            values[family] = c % 2
            age = "?" if row in missing_age else str(int(rng.integers(8, 75)))
            lines.append(",".join(str(v) for v in values) + f",{age},{c}")
            row += 1
    return lines


@pytest.fixture
def data_file(tmp_path):
    """24 rows (class counts 6,4,5,3,4,2), two of them with a missing age."""
    path = tmp_path / "dermatology.data"
    path.write_text("\n".join(synthetic_lines(missing_age=(1, 7))) + "\n")
    return str(path)


@pytest.fixture
def wide_data_file(tmp_path):
    """60 rows, 10 per class, no missing ages."""
    path = tmp_path / "dermatology_wide.data"
    path.write_text("\n".join(synthetic_lines(n_per_class=(10,) * 6, seed=3)) + "\n")
    return str(path)


@pytest.fixture
def blobs():
    """Three well separated Gaussian clusters in 4 dimensions, values in [0, 1]."""
    rng = np.random.default_rng(11)
    centers = np.array([[0.2, 0.2, 0.8, 0.5], [0.8, 0.2, 0.2, 0.5], [0.5, 0.8, 0.5, 0.2]])
    x = np.vstack([center + 0.03 * rng.standard_normal((20, 4)) for center in centers])
    y = np.repeat(np.arange(3), 20)
    return np.clip(x, 0.0, 1.0), y


@pytest.fixture
def fast_training():
    """Training settings small enough for unit tests."""
    return {'epochs': 3, 'batch_size': 16}


def tiny_config(data_path: str) -> dict:
    """Default configuration shrunk to seconds: 3 folds, 2 epochs, small grids."""
    from config_loader import ConfigLoader

    config = ConfigLoader()._get_default_config()
    config['data']['path'] = data_path
    config['seed'] = 7
    config['evaluation']['folds'] = 3
    for stage in ('autoencoder', 'classifier'):
        config['training'][stage].update(epochs=2, batch_size=16)
    experiments = config['experiments']
    experiments['dnn_sweep']['grid'] = [
        {'hidden': [8], 'dropout': None, 'published_score': 95.8},
        {'hidden': [8, 8], 'dropout': 0.5},
    ]
    experiments['derm2vec_sweep']['grid'] = [
        {'encoding_dim': 4, 'encoder_widths': [16], 'hidden': [8], 'dropout': 0.5, 'published_score': 95.52},
    ]
    experiments['comparison']['methods'] = ['knn', 'nb', 'constant']
    config['baselines']['rf']['n_estimators'] = 5
    return config


@pytest.fixture
def clean_env(monkeypatch, tmp_path):
    """No DERM2VEC_* overrides and no config.yaml in the working directory."""
    for name in ('DERM2VEC_DATA_PATH', 'DERM2VEC_DATA_SCHEMA', 'DERM2VEC_SEED',
                 'DERM2VEC_JOBS', 'DERM2VEC_OUTPUT_DIR'):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
    return tmp_path
