"""
Experiment sweeps behind the three result tables.

Each experiment expands its config section into numbered grid points, runs
cross-validation for every point under one or more derived seeds, and
collects the rows of a ReportTable. Grid points are independent: with
jobs > 1 they run on a process pool and are reassembled by grid index.

Usage:
    from config_loader import load_config
    from experiments import ExperimentConfig, run_experiment

    cfg = ExperimentConfig.from_config(load_config(), kind='dnn_sweep')
    table = run_experiment(cfg)
"""

import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from config import ENCODING_DIM, N_CLASSES, TOOL_VERSION
from dermatology_data import FeatureMatrix, get_schema, load_feature_matrix
from errors import ConfigError
from evaluation import CVReport, config_fingerprint, cross_validate, make_folds
from model_factory import MODEL_TYPES, describe_model, model_factory, train_config
from numeric_core import derive_seed

EXPERIMENT_KINDS = ('dnn_sweep', 'derm2vec_sweep', 'comparison', 'single')
TABLE_KINDS = {1: 'dnn_sweep', 2: 'derm2vec_sweep', 3: 'comparison'}
TABLE_NAMES = {'dnn_sweep': 'table1', 'derm2vec_sweep': 'table2', 'comparison': 'table3', 'single': 'single'}
REPORT_FORMATS = ('md', 'csv')

METHOD_LABELS = {
    'derm2vec': 'Derm2Vec',
    'dnn': 'DNN',
    'dt': 'DT',
    'rf': 'RF',
    'nb': 'NB',
    'knn': 'KNN',
    'ann': 'ANN',
    'constant': 'Constant',
}

SOURCE_REPRODUCED = 'reproduced'
SOURCE_PUBLISHED = 'published'
STATUS_OK = 'ok'


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

def _require(condition: bool, field_path: str, reason: str):
    if not condition:
        raise ConfigError(field_path, reason)


def _check_int(value: Any, field_path: str, minimum: int) -> int:
    _require(isinstance(value, int) and not isinstance(value, bool) and value >= minimum,
             field_path, f"expected an integer >= {minimum}, got {value!r}")
    return value


def _check_hidden(value: Any, field_path: str) -> List[int]:
    if isinstance(value, int) and not isinstance(value, bool):
        value = [value]
    _require(isinstance(value, (list, tuple)) and len(value) > 0, field_path,
             f"expected a non-empty list of layer widths, got {value!r}")
    for i, width in enumerate(value):
        _check_int(width, f"{field_path}[{i}]", 1)
    return list(value)


def _check_dropout(value: Any, field_path: str) -> Optional[float]:
    if value is None or value is False:
        return None
    _require(isinstance(value, (int, float)) and not isinstance(value, bool) and 0.0 <= value < 1.0,
             field_path, f"expected a rate in [0, 1) or null, got {value!r}")
    return float(value) if value > 0 else None


def _check_training(value: Any, field_path: str) -> Dict[str, Any]:
    _require(isinstance(value, dict), field_path, f"expected a mapping, got {value!r}")
    try:
        train_config(value)
    except (ValueError, TypeError) as e:
        raise ConfigError(field_path, str(e))
    return dict(value)


def _check_grid(value: Any, field_path: str) -> List[Dict[str, Any]]:
    _require(isinstance(value, list) and len(value) > 0, field_path, "grid must be a non-empty list")
    for i, entry in enumerate(value):
        _require(isinstance(entry, dict), f"{field_path}[{i}]", f"expected a mapping, got {entry!r}")
    return value


@dataclass
class ExperimentConfig:
    """Validated settings of one experiment run."""

    kind: str
    data_path: str
    schema: str = 'compact'
    seed: int = 0
    seeds: int = 1
    jobs: int = 1
    output_dir: str = 'results'
    formats: List[str] = field(default_factory=lambda: list(REPORT_FORMATS))
    folds: int = 10
    stratified: bool = True
    fold_workers: int = 1
    ae_training: Dict[str, Any] = field(default_factory=dict)
    clf_training: Dict[str, Any] = field(default_factory=dict)
    encoder_widths: List[int] = field(default_factory=lambda: [200, 100, 50])
    bottleneck_activation: str = 'relu'
    experiments: Dict[str, Any] = field(default_factory=dict)
    baselines: Dict[str, Any] = field(default_factory=dict)
    verbose: bool = False

    @classmethod
    def from_config(cls, config: Dict[str, Any], kind: str, verbose: bool = False) -> "ExperimentConfig":
        """
        Validate a loaded configuration dict for one experiment kind.

        Args:
            config: Configuration as returned by config_loader.load_config
            kind: One of EXPERIMENT_KINDS
            verbose: Log progress while running

        Returns:
            ExperimentConfig
        """
        _require(kind in EXPERIMENT_KINDS, 'experiment.kind',
                 f"unknown experiment kind '{kind}', expected one of {EXPERIMENT_KINDS}")
        data = config.get('data') or {}
        _require(isinstance(data.get('path'), str) and data.get('path'), 'data.path', "a data file path is required")
        try:
            get_schema(data.get('schema', 'compact'))
        except ValueError as e:
            raise ConfigError('data.schema', str(e))

        output = config.get('output') or {}
        formats = output.get('formats', list(REPORT_FORMATS))
        if isinstance(formats, str):
            formats = [formats]
        for fmt in formats:
            _require(fmt in REPORT_FORMATS, 'output.formats', f"unknown format '{fmt}', expected {REPORT_FORMATS}")

        evaluation = config.get('evaluation') or {}
        training = config.get('training') or {}
        autoencoder = config.get('autoencoder') or {}
        experiments = config.get('experiments') or {}
        _require(isinstance(experiments.get(kind), dict), f'experiments.{kind}', "section missing")

        bottleneck = autoencoder.get('bottleneck_activation', 'relu')
        _require(bottleneck in ('relu', 'linear', 'sigmoid'), 'autoencoder.bottleneck_activation',
                 f"expected relu, linear or sigmoid, got {bottleneck!r}")

        cfg = cls(
            kind=kind,
            data_path=data['path'],
            schema=data.get('schema', 'compact'),
            seed=_check_int(config.get('seed', 0), 'seed', 0),
            seeds=_check_int(config.get('seeds', 1), 'seeds', 1),
            jobs=_check_int(config.get('jobs', 1), 'jobs', 1),
            output_dir=str(output.get('dir', 'results')),
            formats=list(formats),
            folds=_check_int(evaluation.get('folds', 10), 'evaluation.folds', 2),
            stratified=bool(evaluation.get('stratified', True)),
            fold_workers=_check_int(evaluation.get('fold_workers', 1), 'evaluation.fold_workers', 1),
            ae_training=_check_training(training.get('autoencoder', {}), 'training.autoencoder'),
            clf_training=_check_training(training.get('classifier', {}), 'training.classifier'),
            encoder_widths=_check_hidden(autoencoder.get('encoder_widths', [200, 100, 50]),
                                         'autoencoder.encoder_widths'),
            bottleneck_activation=bottleneck,
            experiments=experiments,
            baselines=config.get('baselines') or {},
            verbose=verbose,
        )
        # expanding the grid validates every entry
        build_grid(cfg)
        return cfg

    @property
    def section(self) -> Dict[str, Any]:
        return self.experiments.get(self.kind, {})


# ---------------------------------------------------------------------------
# Grid points and report rows
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridPoint:
    """One configuration to cross-validate; index is 1-based."""

    index: int
    method: str
    params: Dict[str, Any]
    columns: Dict[str, str]
    published_score: Optional[float] = None

    @property
    def description(self) -> str:
        return ", ".join(f"{key}={value}" for key, value in self.columns.items())


@dataclass
class ReportRow:
    index: int
    method: str
    columns: Dict[str, str]
    fingerprint: str = ''
    seeds: List[int] = field(default_factory=list)
    scores: List[float] = field(default_factory=list)
    mean_cv_score: Optional[float] = None
    spread: Optional[float] = None
    published_score: Optional[float] = None
    source: str = SOURCE_REPRODUCED
    status: str = STATUS_OK
    reports: List[CVReport] = field(default_factory=list)
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.status != STATUS_OK

    @property
    def description(self) -> str:
        return ", ".join(f"{key}={value}" for key, value in self.columns.items())


@dataclass
class ReportTable:
    name: str
    kind: str
    caption: str
    rows: List[ReportRow]
    metadata: Dict[str, str] = field(default_factory=dict)
    generated: str = ''

    @property
    def failed_rows(self) -> List[ReportRow]:
        return [row for row in self.rows if row.failed]

    @property
    def column_names(self) -> List[str]:
        names: List[str] = []
        for row in self.rows:
            for key in row.columns:
                if key not in names:
                    names.append(key)
        return names


def _layout_columns(hidden: List[int], dropout: Optional[float]) -> Dict[str, str]:
    nodes = str(hidden[0]) if len(hidden) == 1 else "(" + ", ".join(str(w) for w in hidden) + ")"
    return {
        'hidden_layers': str(len(hidden)),
        'hidden_nodes': nodes,
        'dropout': f"Yes ({dropout:g})" if dropout else "No",
    }


def _published(entry: Dict[str, Any], field_path: str) -> Optional[float]:
    score = entry.get('published_score')
    if score is None:
        return None
    _require(isinstance(score, (int, float)) and 0 <= score <= 100, field_path,
             f"expected a percentage, got {score!r}")
    return float(score)


def _derm2vec_params(cfg: ExperimentConfig, entry: Dict[str, Any], path: str) -> Dict[str, Any]:
    return {
        'encoding_dim': _check_int(entry.get('encoding_dim', ENCODING_DIM), f'{path}.encoding_dim', 1),
        'encoder_widths': _check_hidden(entry.get('encoder_widths', cfg.encoder_widths), f'{path}.encoder_widths'),
        'bottleneck_activation': entry.get('bottleneck_activation', cfg.bottleneck_activation),
        'hidden': _check_hidden(entry.get('hidden', [100]), f'{path}.hidden'),
        'dropout': _check_dropout(entry.get('dropout'), f'{path}.dropout'),
        'ae_training': cfg.ae_training,
        'training': cfg.clf_training,
    }


def _dnn_params(cfg: ExperimentConfig, entry: Dict[str, Any], path: str) -> Dict[str, Any]:
    return {
        'hidden': _check_hidden(entry.get('hidden', [100]), f'{path}.hidden'),
        'dropout': _check_dropout(entry.get('dropout'), f'{path}.dropout'),
        'training': cfg.clf_training,
    }


def _method_params(cfg: ExperimentConfig, method: str, path: str) -> Dict[str, Any]:
    """Parameters of a comparison method: deep rows from the comparison section, the rest from baselines."""
    if method == 'derm2vec':
        return _derm2vec_params(cfg, cfg.section.get('derm2vec') or {}, f'{path}.derm2vec')
    if method == 'dnn':
        return _dnn_params(cfg, cfg.section.get('dnn') or {}, f'{path}.dnn')
    params = dict(cfg.baselines.get(method) or {})
    if method == 'ann':
        params.setdefault('training', cfg.clf_training)
    return params


def build_grid(cfg: ExperimentConfig) -> List[GridPoint]:
    """
    Expand the experiment's config section into grid points.

    Args:
        cfg: Validated experiment settings

    Returns:
        Grid points in table order
    """
    path = f'experiments.{cfg.kind}'
    section = cfg.section
    points: List[GridPoint] = []

    if cfg.kind == 'dnn_sweep':
        for i, entry in enumerate(_check_grid(section.get('grid'), f'{path}.grid')):
            params = _dnn_params(cfg, entry, f'{path}.grid[{i}]')
            points.append(GridPoint(
                index=i + 1, method='dnn', params=params,
                columns=_layout_columns(params['hidden'], params['dropout']),
                published_score=_published(entry, f'{path}.grid[{i}].published_score'),
            ))

    elif cfg.kind == 'derm2vec_sweep':
        for i, entry in enumerate(_check_grid(section.get('grid'), f'{path}.grid')):
            params = _derm2vec_params(cfg, entry, f'{path}.grid[{i}]')
            columns = {'encoding_dim': str(params['encoding_dim'])}
            columns.update(_layout_columns(params['hidden'], params['dropout']))
            points.append(GridPoint(
                index=i + 1, method='derm2vec', params=params, columns=columns,
                published_score=_published(entry, f'{path}.grid[{i}].published_score'),
            ))

    elif cfg.kind == 'comparison':
        methods = section.get('methods')
        _require(isinstance(methods, list) and len(methods) > 0, f'{path}.methods',
                 "expected a non-empty list of methods")
        published = section.get('published_scores') or {}
        for i, method in enumerate(methods):
            _require(method in MODEL_TYPES, f'{path}.methods[{i}]',
                     f"unknown method '{method}', expected one of {sorted(MODEL_TYPES)}")
            params = _method_params(cfg, method, path)
            _check_model(method, params, f'{path}.methods[{i}]')
            score = published.get(method)
            points.append(GridPoint(
                index=i + 1, method=method, params=params,
                columns={'model': METHOD_LABELS.get(method, method)},
                published_score=float(score) if score is not None else None,
            ))

    else:
        method = section.get('method')
        _require(method in MODEL_TYPES, f'{path}.method',
                 f"unknown method '{method}', expected one of {sorted(MODEL_TYPES)}")
        params = dict(section.get('params') or {})
        if method in ('derm2vec', 'dnn'):
            params = (_derm2vec_params if method == 'derm2vec' else _dnn_params)(cfg, params, f'{path}.params')
        _check_model(method, params, f'{path}.params')
        points.append(GridPoint(index=1, method=method, params=params,
                                columns={'model': METHOD_LABELS.get(method, method)}))

    return points


def _check_model(method: str, params: Dict[str, Any], field_path: str):
    try:
        describe_model(method, params)
    except (ValueError, TypeError) as e:
        raise ConfigError(field_path, str(e))


def row_seeds(master_seed: int, fingerprint: str, replicate: int, n_seeds: int) -> List[int]:
    """
    Model seeds of one grid point.

    Identical configurations share a fingerprint; replicate counts earlier
    occurrences in the same grid so repeated rows get distinct seeds.
    """
    base = derive_seed(master_seed, fingerprint, replicate)
    if n_seeds == 1:
        return [base]
    return [derive_seed(base, "repeat", j) for j in range(n_seeds)]


def fold_seeds(master_seed: int, n_seeds: int) -> List[int]:
    """Fold plan seed per repeat; every row of a run shares the same plans."""
    return [derive_seed(master_seed, "folds", j) for j in range(n_seeds)]


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

@dataclass
class GridTask:
    point: GridPoint
    fingerprint: str
    seeds: List[int]
    plan_seeds: List[int]
    data: FeatureMatrix
    folds: int
    stratified: bool
    fold_workers: int = 1
    verbose: bool = False


# Global function for parallel processing (must be at module level for pickling)
def evaluate_grid_point(task: GridTask) -> Tuple[ReportRow, Optional[str]]:
    """
    Cross-validate one grid point under each of its seeds.

    Args:
        task: Grid point, seeds and data

    Returns:
        tuple of (row, error); failed rows carry status "FAILED: <reason>"
    """
    point = task.point
    row = ReportRow(
        index=point.index,
        method=point.method,
        columns=dict(point.columns),
        fingerprint=task.fingerprint,
        seeds=list(task.seeds),
        published_score=point.published_score,
        params=dict(point.params),
    )
    try:
        factory = model_factory(point.method, point.params)
        for seed, plan_seed in zip(task.seeds, task.plan_seeds):
            plan = make_folds(task.data.labels, task.folds, plan_seed, task.stratified)
            report = cross_validate(factory, task.data, plan, seed=seed, description=point.description,
                                    fingerprint=task.fingerprint, n_classes=N_CLASSES,
                                    max_workers=task.fold_workers)
            row.reports.append(report)
        row.scores = [report.mean_cv_score for report in row.reports]
        row.mean_cv_score = float(np.mean(row.scores))
        row.spread = float(np.std(row.scores))
        return row, None
    except Exception as e:
        row.status = f"FAILED: {type(e).__name__}: {e}"
        return row, str(e)


def _log_row(row: ReportRow, total: int):
    if row.failed:
        print(f"  [{row.index}/{total}] [FAIL] {row.description}: {row.status}")
        return
    seeds = ",".join(str(s) for s in row.seeds)
    spread = f" ± {row.spread:.2f}" if len(row.scores) > 1 else ""
    print(f"  [{row.index}/{total}] [OK] {row.description}: {row.mean_cv_score:.2f}%{spread} "
          f"(fingerprint {row.fingerprint}, seed {seeds})")


def load_data(cfg: ExperimentConfig) -> FeatureMatrix:
    if not os.path.isfile(cfg.data_path):
        raise ConfigError('data.path', f"data file not found: {cfg.data_path}")
    return load_feature_matrix(cfg.data_path, get_schema(cfg.schema))


def make_tasks(cfg: ExperimentConfig, points: List[GridPoint], data: FeatureMatrix) -> List[GridTask]:
    seen: Dict[str, int] = {}
    plan_seeds = fold_seeds(cfg.seed, cfg.seeds)
    tasks = []
    for point in points:
        fingerprint = config_fingerprint(describe_model(point.method, point.params))
        replicate = seen.get(fingerprint, 0)
        seen[fingerprint] = replicate + 1
        tasks.append(GridTask(
            point=point,
            fingerprint=fingerprint,
            seeds=row_seeds(cfg.seed, fingerprint, replicate, cfg.seeds),
            plan_seeds=plan_seeds,
            data=data,
            folds=cfg.folds,
            stratified=cfg.stratified,
            fold_workers=cfg.fold_workers,
        ))
    return tasks


def run_grid(cfg: ExperimentConfig, points: List[GridPoint], data: FeatureMatrix) -> List[ReportRow]:
    """
    Evaluate grid points, in parallel when cfg.jobs > 1.

    Args:
        cfg: Experiment settings
        points: Grid points
        data: Encoded dataset

    Returns:
        Rows sorted by grid index
    """
    tasks = make_tasks(cfg, points, data)
    rows: Dict[int, ReportRow] = {}
    total = len(tasks)
    parallel = cfg.jobs > 1 and total > 1

    if parallel:
        max_workers = min(cfg.jobs, total)
        if cfg.verbose:
            print(f"[INFO] Evaluating {total} grid points on {max_workers} worker processes")
        try:
            with ProcessPoolExecutor(max_workers=max_workers) as executor:
                futures = [executor.submit(evaluate_grid_point, task) for task in tasks]
                for future in tqdm(as_completed(futures), total=total, desc="Grid points",
                                   disable=not cfg.verbose, leave=False):
                    row, _ = future.result()
                    rows[row.index] = row
                    if cfg.verbose:
                        _log_row(row, total)
        except Exception as e:
            print(f"[WARNING] Multiprocessing failed: {e}")
            print("[INFO] Falling back to sequential processing...")
            parallel = False

    if not parallel:
        for task in tqdm(tasks, desc="Grid points", disable=not cfg.verbose, leave=False):
            if task.point.index in rows:
                continue
            row, _ = evaluate_grid_point(task)
            rows[row.index] = row
            if cfg.verbose:
                _log_row(row, total)

    return [rows[index] for index in sorted(rows)]


def _metadata(cfg: ExperimentConfig, data: FeatureMatrix) -> Dict[str, str]:
    return {
        'seed': str(cfg.seed),
        'seeds': str(cfg.seeds),
        'folds': str(cfg.folds),
        'stratified': str(cfg.stratified).lower(),
        'data': os.path.basename(cfg.data_path),
        'schema': cfg.schema,
        'rows': str(data.rows),
        'features': str(data.n_features),
        'version': TOOL_VERSION,
    }


def _run_table(cfg: ExperimentConfig, data: Optional[FeatureMatrix],
               points: Optional[List[GridPoint]] = None) -> ReportTable:
    data = data if data is not None else load_data(cfg)
    points = points if points is not None else build_grid(cfg)
    if cfg.verbose:
        print(f"[INFO] {TABLE_NAMES[cfg.kind]}: {len(points)} configurations, "
              f"{cfg.folds}-fold CV, {cfg.seeds} seed(s), {data.rows} rows x {data.n_features} features")
    rows = run_grid(cfg, points, data)
    return ReportTable(
        name=TABLE_NAMES[cfg.kind],
        kind=cfg.kind,
        caption=str(cfg.section.get('caption', METHOD_LABELS.get(cfg.kind, cfg.kind))),
        rows=rows,
        metadata=_metadata(cfg, data),
        generated=datetime.now().isoformat(timespec='seconds'),
    )


def run_dnn_sweep(cfg: ExperimentConfig, data: Optional[FeatureMatrix] = None) -> ReportTable:
    """Plain softmax networks on the raw features, one row per layout/dropout pair."""
    return _run_table(_with_kind(cfg, 'dnn_sweep'), data)


def run_derm2vec_sweep(cfg: ExperimentConfig, data: Optional[FeatureMatrix] = None) -> ReportTable:
    """Derm2Vec over encoding dimensions and classifier variants."""
    return _run_table(_with_kind(cfg, 'derm2vec_sweep'), data)


def best_row(table: ReportTable) -> Optional[ReportRow]:
    """Highest-scoring reproduced row that did not fail; the lowest index wins ties."""
    candidates = [row for row in table.rows
                  if row.source == SOURCE_REPRODUCED and not row.failed and row.params]
    if not candidates:
        return None
    return min(candidates, key=lambda row: (-row.mean_cv_score, row.index))


def run_comparison(
    cfg: ExperimentConfig,
    data: Optional[FeatureMatrix] = None,
    sweeps: Optional[List[ReportTable]] = None,
) -> ReportTable:
    """
    Derm2Vec and DNN against the classical baselines.

    The Derm2Vec and DNN rows take their configuration from the comparison
    section, unless a sweep table of the same method is passed in: then the
    best row of that sweep is used. The metadata keys derm2vec_config and
    dnn_config record which one it was.

    Methods that are listed under published_only are not reimplemented; they
    are appended with their published score and source "published". The
    expected ordering (Derm2Vec >= DNN >= every classical baseline) is
    checked and logged, never enforced.

    Args:
        cfg: Experiment settings
        data: Encoded dataset (loaded from cfg.data_path when None)
        sweeps: Sweep tables already run in this invocation

    Returns:
        ReportTable
    """
    cfg = _with_kind(cfg, 'comparison')
    points = build_grid(cfg)
    origins = {method: f'experiments.comparison.{method}' for method in ('derm2vec', 'dnn')}
    for sweep in sweeps or []:
        best = best_row(sweep)
        if best is None or best.method not in origins:
            continue
        points = [replace(point, params=dict(best.params)) if point.method == best.method else point
                  for point in points]
        origins[best.method] = f'best of {sweep.name} (row {best.index})'
        if cfg.verbose:
            print(f"[INFO] {METHOD_LABELS[best.method]} row uses {origins[best.method]}: {best.description}")

    table = _run_table(cfg, data, points)
    table.metadata.update({f'{method}_config': origin for method, origin in origins.items()})
    next_index = len(table.rows) + 1
    for i, entry in enumerate(cfg.section.get('published_only') or []):
        _require(isinstance(entry, dict) and 'method' in entry and 'score' in entry,
                 f'experiments.comparison.published_only[{i}]', "expected a mapping with method and score")
        columns = {'model': str(entry['method'])}
        if entry.get('note'):
            columns['note'] = str(entry['note'])
        table.rows.append(ReportRow(
            index=next_index + i,
            method=str(entry['method']).lower(),
            columns=columns,
            mean_cv_score=float(entry['score']),
            published_score=float(entry['score']),
            source=SOURCE_PUBLISHED,
        ))

    violations = check_ordering(table)
    if cfg.verbose:
        if violations:
            for violation in violations:
                print(f"[WARNING] Expected ordering violated: {violation}")
        else:
            print("[INFO] Expected ordering holds: Derm2Vec >= DNN >= classical baselines")
    return table


def check_ordering(table: ReportTable) -> List[str]:
    """
    Compare reproduced rows against Derm2Vec >= DNN >= each classical baseline.

    Args:
        table: Comparison table

    Returns:
        Human-readable violations (empty when the ordering holds or rows are missing)
    """
    scores = {row.method: row.mean_cv_score for row in table.rows
              if row.source == SOURCE_REPRODUCED and not row.failed}
    violations = []
    if 'derm2vec' in scores and 'dnn' in scores and scores['derm2vec'] < scores['dnn']:
        violations.append(f"Derm2Vec {scores['derm2vec']:.2f} < DNN {scores['dnn']:.2f}")
    deep = [m for m in ('dnn', 'derm2vec') if m in scores]
    for method, score in scores.items():
        if method in ('dnn', 'derm2vec'):
            continue
        for top in deep:
            if score > scores[top]:
                violations.append(f"{METHOD_LABELS.get(method, method)} {score:.2f} > "
                                  f"{METHOD_LABELS[top]} {scores[top]:.2f}")
    return violations


def run_single(cfg: ExperimentConfig, data: Optional[FeatureMatrix] = None) -> ReportTable:
    """One ad-hoc method row from experiments.single."""
    return _run_table(_with_kind(cfg, 'single'), data)


def _with_kind(cfg: ExperimentConfig, kind: str) -> ExperimentConfig:
    if cfg.kind == kind:
        return cfg
    copy = ExperimentConfig(**{**cfg.__dict__, 'kind': kind})
    build_grid(copy)
    return copy


_RUNNERS = {
    'dnn_sweep': run_dnn_sweep,
    'derm2vec_sweep': run_derm2vec_sweep,
    'comparison': run_comparison,
    'single': run_single,
}


def run_experiment(
    cfg: ExperimentConfig,
    data: Optional[FeatureMatrix] = None,
    sweeps: Optional[List[ReportTable]] = None,
) -> ReportTable:
    """Dispatch on cfg.kind; sweeps only matter to the comparison."""
    if cfg.kind == 'comparison':
        return run_comparison(cfg, data, sweeps)
    return _RUNNERS[cfg.kind](cfg, data)
