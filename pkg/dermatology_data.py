"""
Dermatology data ingestion.

Parses the comma-separated dermatology data file, drops rows with a missing
age, counts classes, and one-hot encodes the categorical attributes into the
design matrix the models consume.

Usage:
    from dermatology_data import load_feature_matrix

    data = load_feature_matrix("data/dermatology.data")
    print(data.features.shape)   # (358, 129)
"""

import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import CLASS_NAMES, N_CLASSES
from errors import DatasetParseError

MISSING = "?"
LEVELS = (0, 1, 2, 3)

CLINICAL_ATTRIBUTES = (
    "erythema",
    "scaling",
    "definite_borders",
    "itching",
    "koebner_phenomenon",
    "polygonal_papules",
    "follicular_papules",
    "oral_mucosal_involvement",
    "knee_and_elbow_involvement",
    "scalp_involvement",
)

_HISTOPATHOLOGICAL_HEAD = (
    "melanin_incontinence",
    "eosinophils_in_the_infiltrate",
    "pnl_infiltrate",
    "fibrosis_of_the_papillary_dermis",
    "exocytosis",
    "acanthosis",
    "hyperkeratosis",
    "parakeratosis",
    "clubbing_of_the_rete_ridges",
    "elongation_of_the_rete_ridges",
    "thinning_of_the_suprapapillary_epidermis",
    "spongiform_pustule",
    "munro_microabcess",
    "focal_hypergranulosis",
    "disappearance_of_the_granular_layer",
    "vacuolisation_and_damage_of_basal_layer",
)
_HISTOPATHOLOGICAL_TAIL = (
    "follicular_horn_plug",
    "perifollicular_parakeratosis",
    "inflammatory_monoluclear_inflitrate",
    "band_like_infiltrate",
)


@dataclass(frozen=True)
class DermSchema:
    """Ordered attribute layout of one data file line."""

    name: str
    histopathological: Tuple[str, ...]
    clinical: Tuple[str, ...] = CLINICAL_ATTRIBUTES

    @property
    def categorical(self) -> Tuple[str, ...]:
        """Categorical attributes in file order (clinical, family history, histopathological)."""
        return self.clinical + ("family_history",) + self.histopathological

    @property
    def field_count(self) -> int:
        # categorical attributes, age, class
        return len(self.categorical) + 2

    @property
    def feature_count(self) -> int:
        return len(self.categorical) * len(LEVELS) + 1

    @property
    def column_names(self) -> Tuple[str, ...]:
        names = [f"{attr}={level}" for attr in self.categorical for level in LEVELS]
        names.append("age")
        return tuple(names)


# 21 histopathological attributes, spongiosis and saw-tooth retes graded together: 129 columns
COMPACT_SCHEMA = DermSchema(
    name="compact",
    histopathological=_HISTOPATHOLOGICAL_HEAD + ("spongiosis_saw_tooth_appearance_of_retes",)
    + _HISTOPATHOLOGICAL_TAIL,
)

# The public UCI release grades them separately: 22 attributes, 133 columns
UCI_RELEASE_SCHEMA = DermSchema(
    name="uci_release",
    histopathological=_HISTOPATHOLOGICAL_HEAD + ("spongiosis", "saw_tooth_appearance_of_retes")
    + _HISTOPATHOLOGICAL_TAIL,
)

SCHEMAS = {schema.name: schema for schema in (COMPACT_SCHEMA, UCI_RELEASE_SCHEMA)}


def get_schema(name: str) -> DermSchema:
    if name not in SCHEMAS:
        raise ValueError(f"Unknown data schema: {name}. Supported schemas: {sorted(SCHEMAS)}")
    return SCHEMAS[name]


@dataclass(frozen=True)
class DermRecord:
    """One patient row of the dermatology file."""

    clinical: Tuple[int, ...]
    family_history: int
    age: Optional[int]
    histopathological: Tuple[int, ...]
    class_label: int

    @property
    def categorical(self) -> Tuple[int, ...]:
        """Categorical values in file order."""
        return self.clinical + (self.family_history,) + self.histopathological

    @property
    def has_age(self) -> bool:
        return self.age is not None


@dataclass
class FeatureMatrix:
    """Encoded design matrix with 0-based class labels."""

    features: np.ndarray
    labels: np.ndarray
    column_names: Tuple[str, ...]
    age_range: Tuple[int, int] = (0, 0)

    @property
    def rows(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    def subset(self, indices: Sequence[int]) -> "FeatureMatrix":
        """Rows at the given indices, in that order."""
        idx = np.asarray(indices, dtype=np.int64)
        return FeatureMatrix(
            features=self.features[idx],
            labels=self.labels[idx],
            column_names=self.column_names,
            age_range=self.age_range,
        )

    def __repr__(self):
        return f"FeatureMatrix(rows={self.rows}, features={self.n_features})"


@dataclass
class ClassDistribution:
    """Per-class record counts, keyed by class name in label order."""

    counts: Dict[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def as_list(self) -> List[int]:
        return [self.counts[name] for name in CLASS_NAMES]


@dataclass
class DatasetSummary:
    """Row counts before and after the missing-age drop."""

    path: str
    schema: str
    rows_read: int
    rows_retained: int
    distribution: ClassDistribution

    @property
    def rows_dropped(self) -> int:
        return self.rows_read - self.rows_retained


def _parse_int(token: str, line_number: int, attribute: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise DatasetParseError(line_number, f"{attribute}: not an integer: {token!r}")


def parse_line(line: str, line_number: int, schema: DermSchema = COMPACT_SCHEMA) -> DermRecord:
    """
    Parse one comma-separated data line.

    Args:
        line: Raw line text (without trailing newline)
        line_number: 1-based line number, used in error messages
        schema: Attribute layout

    Returns:
        DermRecord
    """
    tokens = [token.strip() for token in line.split(',')]
    if len(tokens) != schema.field_count:
        raise DatasetParseError(
            line_number, f"expected {schema.field_count} fields, found {len(tokens)}"
        )

    n_categorical = len(schema.categorical)
    values = []
    for attribute, token in zip(schema.categorical, tokens[:n_categorical]):
        value = _parse_int(token, line_number, attribute)
        allowed = (0, 1) if attribute == "family_history" else LEVELS
        if value not in allowed:
            raise DatasetParseError(line_number, f"{attribute}: value {value} not in {list(allowed)}")
        values.append(value)

    age_token = tokens[n_categorical]
    if age_token == MISSING:
        age = None
    else:
        age = _parse_int(age_token, line_number, "age")
        if age < 0:
            raise DatasetParseError(line_number, f"age: negative value {age}")

    class_label = _parse_int(tokens[n_categorical + 1], line_number, "class")
    if not 1 <= class_label <= N_CLASSES:
        raise DatasetParseError(line_number, f"class: value {class_label} not in 1..{N_CLASSES}")

    n_clinical = len(schema.clinical)
    return DermRecord(
        clinical=tuple(values[:n_clinical]),
        family_history=values[n_clinical],
        age=age,
        histopathological=tuple(values[n_clinical + 1:]),
        class_label=class_label,
    )


def parse_dataset(path: str, schema: DermSchema = COMPACT_SCHEMA) -> List[DermRecord]:
    """
    Parse the dermatology data file.

    Blank lines are skipped; every other line must hold one record.

    Args:
        path: Path to the comma-separated data file (no header)
        schema: Attribute layout of each line

    Returns:
        One DermRecord per data line, in file order
    """
    records = []
    with open(path, 'r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            records.append(parse_line(line, line_number, schema))
    return records


def drop_missing(records: List[DermRecord]) -> List[DermRecord]:
    """Keep only records with a present age, preserving order."""
    return [record for record in records if record.has_age]


def class_distribution(records: List[DermRecord]) -> ClassDistribution:
    """Exact record count per class."""
    counts = {name: 0 for name in CLASS_NAMES}
    for record in records:
        counts[CLASS_NAMES[record.class_label - 1]] += 1
    return ClassDistribution(counts=counts)


def encode_features(records: List[DermRecord], schema: DermSchema = COMPACT_SCHEMA) -> FeatureMatrix:
    """
    One-hot encode records into the design matrix.

    Each categorical attribute becomes a block of 4 indicator columns over the
    fixed levels {0,1,2,3}; age is min-max scaled to [0, 1] and placed last.

    Args:
        records: Records with present ages
        schema: Attribute layout the records were parsed with

    Returns:
        FeatureMatrix with 4 * len(schema.categorical) + 1 columns
    """
    if not records:
        raise ValueError("cannot encode an empty record list: age scaling is undefined")
    missing = [i for i, record in enumerate(records) if not record.has_age]
    if missing:
        raise ValueError(f"records at positions {missing[:5]} have no age; call drop_missing first")

    categorical = np.array([record.categorical for record in records], dtype=np.int64)
    if categorical.shape[1] != len(schema.categorical):
        raise ValueError(
            f"records carry {categorical.shape[1]} categorical values, "
            f"schema '{schema.name}' expects {len(schema.categorical)}"
        )
    one_hot = np.eye(len(LEVELS), dtype=np.float64)[categorical]
    one_hot = one_hot.reshape(len(records), -1)

    ages = np.array([record.age for record in records], dtype=np.float64)
    age_min, age_max = ages.min(), ages.max()
    span = age_max - age_min
    scaled_age = (ages - age_min) / span if span > 0 else np.zeros_like(ages)

    features = np.ascontiguousarray(np.column_stack([one_hot, scaled_age]))
    labels = np.array([record.class_label - 1 for record in records], dtype=np.int64)

    return FeatureMatrix(
        features=features,
        labels=labels,
        column_names=schema.column_names,
        age_range=(int(age_min), int(age_max)),
    )


def load_feature_matrix(path: str, schema: DermSchema = COMPACT_SCHEMA) -> FeatureMatrix:
    """Parse, drop missing ages and encode in one call."""
    return encode_features(drop_missing(parse_dataset(path, schema)), schema)


def dataset_summary(path: str, schema: DermSchema = COMPACT_SCHEMA) -> DatasetSummary:
    """
    Row counts and class distribution of a data file.

    Args:
        path: Path to the data file
        schema: Attribute layout

    Returns:
        DatasetSummary
    """
    records = parse_dataset(path, schema)
    retained = drop_missing(records)
    return DatasetSummary(
        path=os.path.abspath(path),
        schema=schema.name,
        rows_read=len(records),
        rows_retained=len(retained),
        distribution=class_distribution(retained),
    )


def render_summary_markdown(summary: DatasetSummary) -> str:
    """Render a dataset summary as Markdown tables."""
    counts = pd.DataFrame({
        "class": list(range(1, N_CLASSES + 1)),
        "name": list(CLASS_NAMES),
        "count": summary.distribution.as_list(),
    })
    rows = pd.DataFrame({
        "rows read": [summary.rows_read],
        "missing age dropped": [summary.rows_dropped],
        "rows retained": [summary.rows_retained],
    })
    return "\n".join([
        f"# Dataset summary: {os.path.basename(summary.path)} (schema: {summary.schema})",
        "",
        rows.to_markdown(index=False),
        "",
        counts.to_markdown(index=False),
        "",
    ])


def decode_one_hot(features: np.ndarray, schema: DermSchema = COMPACT_SCHEMA) -> np.ndarray:
    """
    Recover categorical values from the one-hot blocks by arg-max.

    Args:
        features: Encoded rows (n x feature_count)
        schema: Layout used for encoding

    Returns:
        Integer array (n x len(schema.categorical))
    """
    n_categorical = len(schema.categorical)
    blocks = features[:, :n_categorical * len(LEVELS)].reshape(features.shape[0], n_categorical, len(LEVELS))
    return blocks.argmax(axis=2)
