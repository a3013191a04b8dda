import copy

import numpy as np
import pytest

from config_loader import ConfigLoader
from conftest import tiny_config
from dermatology_data import load_feature_matrix
from errors import ConfigError
from experiments import (
    SOURCE_PUBLISHED,
    SOURCE_REPRODUCED,
    ExperimentConfig,
    ReportRow,
    ReportTable,
    best_row,
    build_grid,
    check_ordering,
    fold_seeds,
    load_data,
    make_tasks,
    row_seeds,
    run_comparison,
    run_experiment,
)
from numeric_core import derive_seed


def experiment(config, kind):
    return ExperimentConfig.from_config(config, kind)


def test_default_dnn_grid():
    config = ConfigLoader()._get_default_config()
    config['data']['path'] = 'unused.data'
    points = build_grid(experiment(config, 'dnn_sweep'))
    assert len(points) == 10
    assert points[0].columns == {'hidden_layers': '2', 'hidden_nodes': '(100, 100)', 'dropout': 'No'}
    assert points[3].columns == {'hidden_layers': '1', 'hidden_nodes': '100', 'dropout': 'Yes (0.5)'}
    assert points[0].published_score == 96.1
    assert [p.index for p in points] == list(range(1, 11))


def test_default_derm2vec_grid_and_repeated_rows(data_file):
    config = ConfigLoader()._get_default_config()
    config['data']['path'] = data_file
    cfg = experiment(config, 'derm2vec_sweep')
    points = build_grid(cfg)
    assert len(points) == 15
    assert [p.params['encoding_dim'] for p in points][:7] == [4, 8, 16, 24, 32, 40, 48]
    assert points[4].params['encoder_widths'] == [200, 100, 50]

    tasks = make_tasks(cfg, points, load_feature_matrix(data_file))
    assert tasks[4].fingerprint == tasks[9].fingerprint
    assert tasks[4].seeds != tasks[9].seeds
    assert tasks[4].fingerprint != tasks[8].fingerprint
    assert all(task.plan_seeds == tasks[0].plan_seeds for task in tasks)


def test_default_single_and_comparison_grids():
    config = ConfigLoader()._get_default_config()
    config['data']['path'] = 'unused.data'
    single = build_grid(experiment(config, 'single'))
    assert single[0].method == 'derm2vec'
    assert single[0].params['encoding_dim'] == 32
    comparison = build_grid(experiment(config, 'comparison'))
    assert [p.method for p in comparison] == ['derm2vec', 'dnn', 'dt', 'ann', 'rf', 'nb', 'knn']
    assert comparison[4].params == {'n_estimators': 100, 'max_depth': 3}
    assert comparison[0].published_score == 96.92


def test_seed_derivation():
    assert row_seeds(7, "abc", 0, 1) == [derive_seed(7, "abc", 0)]
    three = row_seeds(7, "abc", 0, 3)
    assert len(set(three)) == 3
    assert three[1] == derive_seed(derive_seed(7, "abc", 0), "repeat", 1)
    assert fold_seeds(7, 2) == [derive_seed(7, "folds", 0), derive_seed(7, "folds", 1)]


@pytest.mark.parametrize("mutate, field_path", [
    (lambda c: c.update(seeds=0), 'seeds'),
    (lambda c: c.update(jobs='two'), 'jobs'),
    (lambda c: c['output'].update(formats=['pdf']), 'output.formats'),
    (lambda c: c['evaluation'].update(folds=1), 'evaluation.folds'),
    (lambda c: c['data'].update(schema='other'), 'data.schema'),
    (lambda c: c['data'].update(path=''), 'data.path'),
    (lambda c: c['training']['classifier'].update(momentum=0.9), 'training.classifier'),
    (lambda c: c['experiments']['dnn_sweep']['grid'][1].update(hidden=[]), 'experiments.dnn_sweep.grid[1].hidden'),
    (lambda c: c['experiments']['dnn_sweep']['grid'][0].update(dropout=1.5),
     'experiments.dnn_sweep.grid[0].dropout'),
    (lambda c: c['experiments']['dnn_sweep']['grid'][0].update(published_score=140),
     'experiments.dnn_sweep.grid[0].published_score'),
])
def test_invalid_configuration_names_the_field(data_file, mutate, field_path):
    config = tiny_config(data_file)
    mutate(config)
    with pytest.raises(ConfigError) as info:
        experiment(config, 'dnn_sweep')
    assert info.value.field_path == field_path


def test_invalid_comparison_method(data_file):
    config = tiny_config(data_file)
    config['experiments']['comparison']['methods'] = ['knn', 'svm']
    with pytest.raises(ConfigError) as info:
        experiment(config, 'comparison')
    assert info.value.field_path == 'experiments.comparison.methods[1]'


def test_unknown_kind(data_file):
    with pytest.raises(ConfigError):
        experiment(tiny_config(data_file), 'table4')


def test_missing_data_file(tmp_path):
    cfg = experiment(tiny_config(str(tmp_path / "absent.data")), 'dnn_sweep')
    with pytest.raises(ConfigError) as info:
        load_data(cfg)
    assert info.value.field_path == 'data.path'


def test_dnn_sweep_rows(wide_data_file):
    cfg = experiment(tiny_config(wide_data_file), 'dnn_sweep')
    table = run_experiment(cfg)
    assert table.name == 'table1'
    assert [row.index for row in table.rows] == [1, 2]
    for row in table.rows:
        assert not row.failed
        assert 0.0 <= row.mean_cv_score <= 100.0
        assert len(row.reports) == 1
        assert len(row.reports[0].fold_accuracies) == 3
        assert row.spread == 0.0
    assert table.rows[0].published_score == 95.8
    assert table.rows[1].published_score is None
    assert table.metadata['rows'] == '60'
    assert table.metadata['folds'] == '3'


def test_runs_are_reproducible(wide_data_file):
    cfg = experiment(tiny_config(wide_data_file), 'derm2vec_sweep')
    first = run_experiment(cfg)
    second = run_experiment(cfg)
    assert [row.scores for row in first.rows] == [row.scores for row in second.rows]
    assert first.rows[0].columns['encoding_dim'] == '4'


def test_multiple_seeds_report_spread(wide_data_file):
    config = tiny_config(wide_data_file)
    config['seeds'] = 3
    table = run_experiment(experiment(config, 'dnn_sweep'))
    row = table.rows[0]
    assert len(row.scores) == 3 and len(row.seeds) == 3
    assert row.mean_cv_score == pytest.approx(np.mean(row.scores))
    assert row.spread == pytest.approx(np.std(row.scores))


def test_process_pool_matches_sequential(wide_data_file):
    config = tiny_config(wide_data_file)
    sequential = run_experiment(experiment(config, 'dnn_sweep'))
    config['jobs'] = 2
    pooled = run_experiment(experiment(config, 'dnn_sweep'))
    assert [row.scores for row in pooled.rows] == [row.scores for row in sequential.rows]
    assert [row.index for row in pooled.rows] == [1, 2]


def test_comparison_appends_published_rows(wide_data_file):
    table = run_comparison(experiment(tiny_config(wide_data_file), 'comparison'))
    assert [row.method for row in table.rows] == ['knn', 'nb', 'constant', 'xgboost', 'svc']
    published = table.rows[3]
    assert published.source == SOURCE_PUBLISHED
    assert published.mean_cv_score == published.published_score == 95.80
    assert published.columns['model'] == 'XGBoost'
    assert 'n_estimators=300' in published.columns['note']
    assert table.rows[0].source == SOURCE_REPRODUCED
    assert table.rows[0].columns == {'model': 'KNN'}


def test_failed_row_does_not_stop_the_table(wide_data_file):
    config = tiny_config(wide_data_file)
    config['experiments']['single'] = {'method': 'knn', 'params': {'k': 1000}}
    table = run_experiment(experiment(config, 'single'))
    assert len(table.failed_rows) == 1
    assert table.rows[0].status.startswith("FAILED: FoldError")
    assert table.rows[0].mean_cv_score is None


def test_check_ordering():
    def row(method, score, source=SOURCE_REPRODUCED):
        return ReportRow(index=0, method=method, columns={}, mean_cv_score=score, source=source)

    good = ReportTable('table3', 'comparison', '', [row('derm2vec', 96.0), row('dnn', 95.0), row('knn', 80.0),
                                                     row('xgboost', 99.0, SOURCE_PUBLISHED)])
    assert check_ordering(good) == []
    bad = ReportTable('table3', 'comparison', '', [row('derm2vec', 90.0), row('dnn', 95.0), row('knn', 97.0)])
    assert check_ordering(bad) == [
        "Derm2Vec 90.00 < DNN 95.00",
        "KNN 97.00 > DNN 95.00",
        "KNN 97.00 > Derm2Vec 90.00",
    ]


def test_config_is_not_mutated_by_validation(data_file):
    config = tiny_config(data_file)
    before = copy.deepcopy(config)
    experiment(config, 'comparison')
    assert config == before


def test_best_row_prefers_score_then_lower_index():
    def row(index, score, **kwargs):
        return ReportRow(index=index, method='dnn', columns={}, mean_cv_score=score,
                         params={'hidden': [index]}, **kwargs)

    table = ReportTable(name='table1', kind='dnn_sweep', caption='', rows=[
        row(1, 90.0),
        row(2, 95.0),
        row(3, 95.0),
        row(4, None, status='FAILED: FoldError'),
        row(5, 99.0, source=SOURCE_PUBLISHED),
    ])
    assert best_row(table).index == 2
    assert best_row(ReportTable(name='t', kind='dnn_sweep', caption='', rows=[])) is None


def test_comparison_takes_dnn_from_best_sweep_row(wide_data_file):
    config = tiny_config(wide_data_file)
    config['experiments']['comparison']['methods'] = ['dnn', 'knn']
    sweep = run_experiment(experiment(config, 'dnn_sweep'))
    best = best_row(sweep)

    table = run_comparison(experiment(config, 'comparison'), sweeps=[sweep])
    dnn = table.rows[0]
    assert dnn.method == 'dnn'
    assert dnn.params == best.params
    assert dnn.params['hidden'] in ([8], [8, 8])
    assert table.metadata['dnn_config'] == f'best of table1 (row {best.index})'
    assert table.metadata['derm2vec_config'] == 'experiments.comparison.derm2vec'


def test_comparison_without_sweeps_uses_configured_rows(wide_data_file):
    config = tiny_config(wide_data_file)
    table = run_experiment(experiment(config, 'comparison'))
    assert table.metadata['dnn_config'] == 'experiments.comparison.dnn'
    assert table.metadata['derm2vec_config'] == 'experiments.comparison.derm2vec'
