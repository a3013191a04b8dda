import os

import pytest
import yaml

from conftest import tiny_config
from main import build_parser, main


@pytest.fixture(autouse=True)
def isolated(clean_env):
    return clean_env


def write_config(path, config):
    path.write_text(yaml.safe_dump(config))
    return str(path)


def test_no_command_prints_help():
    assert main([]) == 1


def test_table_and_kind_are_exclusive():
    with pytest.raises(SystemExit):
        build_parser().parse_args(['run', '--table', '1', '--kind', 'single'])


def test_models(capsys):
    assert main(['models']) == 0
    assert "derm2vec" in capsys.readouterr().out


def test_run_one_table(tmp_path, wide_data_file, capsys):
    config = write_config(tmp_path / "tiny.yaml", tiny_config(wide_data_file))
    out = tmp_path / "results"
    assert main(['run', '--config', config, '--table', '1', '--out', str(out), '--quiet']) == 0
    assert sorted(os.listdir(out)) == ['cv_reports.csv', 'cv_summary.csv', 'table1.csv', 'table1.md']
    assert "table1: 2/2 rows succeeded" in capsys.readouterr().out


def test_run_single_format(tmp_path, wide_data_file):
    config = write_config(tmp_path / "tiny.yaml", tiny_config(wide_data_file))
    out = tmp_path / "md_only"
    assert main(['run', '--config', config, '--kind', 'comparison', '--format', 'md',
                 '--out', str(out), '--quiet']) == 0
    assert 'table3.md' in os.listdir(out)
    assert 'table3.csv' not in os.listdir(out)


def test_failed_row_exits_one(tmp_path, wide_data_file):
    settings = tiny_config(wide_data_file)
    settings['experiments']['single'] = {'method': 'knn', 'params': {'k': 1000}}
    config = write_config(tmp_path / "failing.yaml", settings)
    assert main(['run', '--config', config, '--kind', 'single', '--out', str(tmp_path / "r"), '--quiet']) == 1


def test_missing_data_exits_two(tmp_path, capsys):
    config = write_config(tmp_path / "tiny.yaml", tiny_config(str(tmp_path / "absent.data")))
    assert main(['run', '--config', config, '--table', '1', '--quiet']) == 2
    assert "data.path" in capsys.readouterr().out


def test_invalid_config_exits_two(tmp_path, wide_data_file):
    settings = tiny_config(wide_data_file)
    settings['seeds'] = 0
    config = write_config(tmp_path / "bad.yaml", settings)
    assert main(['run', '--config', config, '--table', '1']) == 2
    assert main(['run', '--config', str(tmp_path / "nowhere.yaml")]) == 2


def test_cli_flags_override_config(tmp_path, wide_data_file):
    settings = tiny_config(wide_data_file)
    settings['evaluation']['folds'] = 1
    config = write_config(tmp_path / "tiny.yaml", settings)
    assert main(['run', '--config', config, '--table', '1', '--quiet']) == 2
    settings['evaluation']['folds'] = 3
    settings['data']['path'] = str(tmp_path / "absent.data")
    config = write_config(tmp_path / "tiny.yaml", settings)
    assert main(['run', '--config', config, '--table', '1', '--data', wide_data_file,
                 '--out', str(tmp_path / "r"), '--quiet']) == 0


def test_data_summary(data_file, capsys):
    assert main(['data-summary', '--data', data_file]) == 0
    out = capsys.readouterr().out
    assert "pityriasis rosea" in out
    assert "22 rows x 129 columns" in out


def test_data_summary_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.data"
    bad.write_text("1,2,3\n")
    assert main(['data-summary', '--data', str(bad)]) == 2
    assert "line 1" in capsys.readouterr().out


def test_show_config_section(capsys):
    assert main(['show-config', '--section', 'evaluation']) == 0
    assert "folds: 10" in capsys.readouterr().out


def test_show_config_save(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv('DERM2VEC_SEED', '31')
    target = tmp_path / "effective.yaml"
    assert main(['show-config', '--save', str(target)]) == 0
    saved = yaml.safe_load(target.read_text())
    assert saved['evaluation']['folds'] == 10
    assert saved['seed'] == 31
    assert "folds: 10" not in capsys.readouterr().out
