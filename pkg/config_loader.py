"""
Configuration Loader for the Derm2Vec experiments

Loads configuration from multiple sources with priority (highest last):
1. Embedded defaults (reproduce all three result tables)
2. config.yaml or the file given with --config (merged over the defaults)
3. Environment variables (.env)

CLI flags are applied on top by main.py through set_config().

Usage:
    from config_loader import load_config, get_config

    # Load configuration
    config = load_config("config.yaml")

    # Access values
    folds = config['evaluation']['folds']

    # Or use helper
    epochs = get_config('training.classifier.epochs', default=100)
"""

import copy
import os
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv

from config import (
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPSILON,
    BATCH_SIZE,
    CV_FOLDS,
    DATA_PATH,
    DATA_SCHEMA,
    ENCODER_WIDTHS,
    ENCODING_DIM,
    EPOCHS,
    LEARNING_RATE,
    MASTER_SEED,
    MAX_JOBS,
    NB_VAR_SMOOTHING,
    OUTPUT_DIR,
)
from errors import ConfigError

DEFAULT_CONFIG_PATH = "config.yaml"

# (hidden, dropout, published mean CV score)
_DNN_GRID = [
    ([100, 100], None, 96.1),
    ([100], None, 95.8),
    ([100, 100], 0.5, 96.37),
    ([100], 0.5, 96.65),
    ([100, 100, 100], None, 96.37),
    ([100, 100, 100], 0.5, 96.08),
    ([200], None, 95.8),
    ([200], 0.5, 96.09),
    ([300], None, 95.81),
    ([300], 0.5, 95.25),
]

# (encoding_dim, hidden, dropout, published mean CV score)
_DERM2VEC_GRID = [
    (4, [100], 0.5, 95.52),
    (8, [100], 0.5, 96.37),
    (16, [100], 0.5, 95.79),
    (24, [100], 0.5, 96.35),
    (32, [100], 0.5, 96.92),
    (40, [100], 0.5, 94.96),
    (48, [100], 0.5, 96.37),
    (32, [100, 100], None, 94.97),
    (32, [100, 100], 0.5, 96.92),
    (32, [100], 0.5, 96.1),
    (56, [100], 0.5, 96.94),
    (64, [100], 0.5, 95.52),
    (72, [100], 0.5, 95.53),
    (80, [100], 0.5, 96.92),
    (88, [100], 0.5, 96.36),
]


def _training_defaults() -> Dict[str, Any]:
    return {
        'epochs': EPOCHS,
        'batch_size': BATCH_SIZE,
        'learning_rate': LEARNING_RATE,
        'optimizer': 'adam',
        'beta1': ADAM_BETA1,
        'beta2': ADAM_BETA2,
        'epsilon': ADAM_EPSILON,
        'shuffle': True,
    }


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge override into a copy of base; lists and scalars replace."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


class ConfigLoader:
    """Configuration loader with multiple sources support."""

    def __init__(self, config_path: Optional[str] = None):
        """
        Initialize configuration loader.

        Args:
            config_path: Path to a YAML configuration file. An explicit path
                         must exist; when None, config.yaml is used if present.
        """
        self.explicit = config_path is not None
        self.config_path = config_path or DEFAULT_CONFIG_PATH
        self.config = {}
        self._loaded = False

    def load(self) -> Dict[str, Any]:
        """
        Load configuration from all sources.

        Returns:
            Complete configuration dictionary
        """
        if self._loaded:
            return self.config

        # Load environment variables first
        load_dotenv()

        self.config = _deep_merge(self._get_default_config(), self._load_yaml())
        self._apply_env_overrides()

        self._loaded = True
        return self.config

    def _load_yaml(self) -> Dict[str, Any]:
        """Load configuration from YAML file."""
        if not os.path.exists(self.config_path):
            if self.explicit:
                raise ConfigError("config", f"configuration file not found: {self.config_path}")
            print(f"[INFO] No {self.config_path} found, using default configuration")
            return {}

        try:
            with open(self.config_path, 'r', encoding='utf-8') as f:
                config = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError("config", f"cannot parse {self.config_path}: {e}")

        if config is None:
            return {}
        if not isinstance(config, dict):
            raise ConfigError("config", f"{self.config_path} must hold a mapping at the top level")
        return config

    def _apply_env_overrides(self):
        """Override configuration with environment variables."""
        if os.getenv('DERM2VEC_DATA_PATH'):
            self.config.setdefault('data', {})['path'] = os.getenv('DERM2VEC_DATA_PATH')

        if os.getenv('DERM2VEC_DATA_SCHEMA'):
            self.config.setdefault('data', {})['schema'] = os.getenv('DERM2VEC_DATA_SCHEMA')

        if os.getenv('DERM2VEC_SEED'):
            self.config['seed'] = self._env_int('DERM2VEC_SEED', 'seed')

        if os.getenv('DERM2VEC_JOBS'):
            self.config['jobs'] = self._env_int('DERM2VEC_JOBS', 'jobs')

        if os.getenv('DERM2VEC_OUTPUT_DIR'):
            self.config.setdefault('output', {})['dir'] = os.getenv('DERM2VEC_OUTPUT_DIR')

    @staticmethod
    def _env_int(name: str, field_path: str) -> int:
        try:
            return int(os.getenv(name))
        except ValueError:
            raise ConfigError(field_path, f"{name}={os.getenv(name)!r} is not an integer")

    def _get_default_config(self) -> Dict[str, Any]:
        """Get default configuration."""
        return {
            'data': {
                'path': DATA_PATH,
                'schema': DATA_SCHEMA,
            },
            'seed': MASTER_SEED,
            'seeds': 1,
            'jobs': MAX_JOBS,
            'output': {
                'dir': OUTPUT_DIR,
                'formats': ['md', 'csv'],
            },
            'experiment': {
                'tables': [1, 2, 3],
            },
            'training': {
                'autoencoder': _training_defaults(),
                'classifier': _training_defaults(),
            },
            'autoencoder': {
                'encoder_widths': list(ENCODER_WIDTHS),
                'bottleneck_activation': 'relu',
            },
            'evaluation': {
                'folds': CV_FOLDS,
                'stratified': True,
                'fold_workers': 1,
            },
            'experiments': {
                'dnn_sweep': {
                    'caption': 'Mean CV score for DNN with different hyperparameters',
                    'grid': [
                        {'hidden': hidden, 'dropout': dropout, 'published_score': score}
                        for hidden, dropout, score in _DNN_GRID
                    ],
                },
                'derm2vec_sweep': {
                    'caption': 'Mean CV score for Derm2Vec with different hyperparameters',
                    'grid': [
                        {'encoding_dim': dim, 'hidden': hidden, 'dropout': dropout, 'published_score': score}
                        for dim, hidden, dropout, score in _DERM2VEC_GRID
                    ],
                },
                'comparison': {
                    'caption': 'Comparing Derm2Vec and DNN with other methods',
                    'methods': ['derm2vec', 'dnn', 'dt', 'ann', 'rf', 'nb', 'knn'],
                    'derm2vec': {'encoding_dim': ENCODING_DIM, 'hidden': [100], 'dropout': 0.5},
                    'dnn': {'hidden': [100], 'dropout': 0.5},
                    'published_scores': {
                        'derm2vec': 96.92, 'dnn': 96.65, 'dt': 93.10, 'ann': 74.29,
                        'rf': 51.13, 'nb': 92.68, 'knn': 79.30,
                    },
                    'published_only': [
                        {'method': 'XGBoost', 'score': 95.80,
                         'note': 'learning_rate=0.05, n_estimators=300, max_depth=3'},
                        {'method': 'SVC', 'score': 82.13, 'note': 'RBF kernel'},
                    ],
                },
                'single': {
                    'method': 'derm2vec',
                    'params': {},
                },
            },
            'baselines': {
                'knn': {'k': 5},
                'dt': {'max_depth': None, 'min_leaf': 1},
                'rf': {'n_estimators': 100, 'max_depth': 3},
                'nb': {'var_smoothing': NB_VAR_SMOOTHING},
                'ann': {'hidden': [2]},
            },
        }

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Get configuration value using dot notation.

        Args:
            key_path: Dot-separated key path (e.g., 'evaluation.folds')
            default: Default value if key not found

        Returns:
            Configuration value
        """
        if not self._loaded:
            self.load()

        value = self.config
        for key in key_path.split('.'):
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default
        return value

    def set(self, key_path: str, value: Any):
        """
        Set configuration value using dot notation.

        Args:
            key_path: Dot-separated key path
            value: Value to set
        """
        if not self._loaded:
            self.load()

        keys = key_path.split('.')
        config = self.config
        for key in keys[:-1]:
            if not isinstance(config.get(key), dict):
                config[key] = {}
            config = config[key]
        config[keys[-1]] = value

    def save(self, output_path: Optional[str] = None):
        """
        Save current configuration to YAML file.

        Args:
            output_path: Output file path (default: same as config_path)
        """
        output_path = output_path or self.config_path
        with open(output_path, 'w', encoding='utf-8') as f:
            yaml.safe_dump(self.config, f, default_flow_style=False, sort_keys=False)
        print(f"[INFO] Configuration saved to: {output_path}")

    def reload(self):
        """Reload configuration from sources."""
        self._loaded = False
        return self.load()

    def print_config(self, section: Optional[str] = None):
        """
        Print configuration in readable format.

        Args:
            section: Optional section to print (e.g., 'training')
        """
        if not self._loaded:
            self.load()

        config_to_print = self.get(section, {}) if section else self.config
        print(yaml.safe_dump(config_to_print, default_flow_style=False, sort_keys=False))


# Global configuration instance
_config_loader = None


def load_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """
    Load configuration from file.

    Args:
        config_path: Path to configuration file (None: config.yaml if present)

    Returns:
        Configuration dictionary
    """
    global _config_loader
    _config_loader = ConfigLoader(config_path)
    return _config_loader.load()


def get_config(key_path: str = None, default: Any = None) -> Any:
    """
    Get configuration value.

    Args:
        key_path: Dot-separated key path (e.g., 'training.classifier.epochs')
                 If None, returns entire configuration
        default: Default value if key not found

    Returns:
        Configuration value
    """
    global _config_loader
    if _config_loader is None:
        load_config()

    if key_path is None:
        return _config_loader.config

    return _config_loader.get(key_path, default)


def set_config(key_path: str, value: Any):
    """
    Set configuration value.

    Args:
        key_path: Dot-separated key path
        value: Value to set
    """
    global _config_loader
    if _config_loader is None:
        load_config()

    _config_loader.set(key_path, value)


def save_config(output_path: Optional[str] = None):
    global _config_loader
    if _config_loader is None:
        load_config()

    _config_loader.save(output_path)


def print_config(section: Optional[str] = None):
    global _config_loader
    if _config_loader is None:
        load_config()

    _config_loader.print_config(section)
