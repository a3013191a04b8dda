import os

import pytest

from evaluation import CVReport
from experiments import SOURCE_PUBLISHED, ReportRow, ReportTable
from report_writer import (
    CV_SUMMARY_FILE,
    emit_report,
    load_cv_reports,
    parse_report_csv,
    render_csv,
    render_markdown,
    write_cv_reports,
)

BIG_SEED = 18446744073709551557


def sample_table(generated="2026-01-01T00:00:00", seeds=1):
    reports = [
        CVReport(fold_accuracies=[0.9, 1.0, 0.95], fingerprint="a1b2c3d4e5f6", seed=BIG_SEED - j,
                 fold_sizes=[20, 20, 20], description="hidden_layers=2")
        for j in range(seeds)
    ]
    scores = [report.mean_cv_score for report in reports]
    rows = [
        ReportRow(index=1, method='dnn',
                  columns={'hidden_layers': '2', 'hidden_nodes': '(100, 100)', 'dropout': 'Yes (0.5)'},
                  fingerprint="a1b2c3d4e5f6", seeds=[r.seed for r in reports], scores=scores,
                  mean_cv_score=sum(scores) / len(scores) + 1e-13, spread=0.0 if seeds == 1 else 0.25,
                  published_score=96.37, reports=reports),
        ReportRow(index=2, method='dnn', columns={'hidden_layers': '1', 'hidden_nodes': '100', 'dropout': 'No'},
                  fingerprint="ffffffffffff", seeds=[3], status="FAILED: FoldError: fold 0: boom"),
        ReportRow(index=3, method='svc', columns={'model': 'SVC', 'note': 'RBF kernel'},
                  mean_cv_score=82.13, published_score=82.13, source=SOURCE_PUBLISHED),
    ]
    return ReportTable(name='table1', kind='dnn_sweep', caption='Mean CV score for DNN, by layout',
                       rows=rows, metadata={'seed': '7', 'folds': '3'}, generated=generated)


def test_csv_reparses_to_the_same_rows(tmp_path):
    table = sample_table()
    path = emit_report(table, 'csv', str(tmp_path))
    assert path == os.path.join(str(tmp_path), 'table1.csv')
    parsed = parse_report_csv(path)
    assert (parsed.name, parsed.kind, parsed.caption) == ('table1', 'dnn_sweep', table.caption)
    assert parsed.metadata == {'seed': '7', 'folds': '3'}
    assert parsed.generated == table.generated
    for original, back in zip(table.rows, parsed.rows):
        assert back.index == original.index
        assert back.method == original.method
        assert back.columns == original.columns
        assert back.seeds == original.seeds
        assert back.mean_cv_score == original.mean_cv_score
        assert back.published_score == original.published_score
        assert back.source == original.source
        assert back.status == original.status
    assert len(parsed.rows) == 3
    assert parsed.rows[1].failed


def test_content_independent_of_generation_time():
    first = render_csv(sample_table(generated="2026-01-01T00:00:00")).splitlines()
    second = render_csv(sample_table(generated="2026-06-30T12:00:00")).splitlines()
    assert first[1] != second[1]
    assert first[:1] + first[2:] == second[:1] + second[2:]

    md_first = render_markdown(sample_table(generated="a")).splitlines()
    md_second = render_markdown(sample_table(generated="b")).splitlines()
    assert md_first[:-1] == md_second[:-1]
    assert md_first[-1] == "_Generated: a_"


def test_markdown_layout():
    text = render_markdown(sample_table())
    lines = text.splitlines()
    assert lines[0] == "# Mean CV score for DNN, by layout"
    assert "Mean CV score (%)" in text
    assert "Hidden nodes" in text
    assert "(100, 100)" in text
    assert "96.37" in text
    assert "FAILED: FoldError" in text
    assert "published" in text
    assert "table=table1; kind=dnn_sweep" in text


def test_markdown_shows_spread_for_multiple_seeds():
    text = render_markdown(sample_table(seeds=2))
    assert "95.00 ± 0.25" in text
    assert "82.13 ±" not in text


def test_unknown_format(tmp_path):
    with pytest.raises(ValueError, match="Unknown report format"):
        emit_report(sample_table(), 'pdf', str(tmp_path))


def test_write_failure_names_the_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="cannot create output directory"):
        emit_report(sample_table(), 'md', str(blocker / "sub"))


def test_cv_reports(tmp_path):
    paths = write_cv_reports([sample_table(seeds=2)], str(tmp_path))
    assert [os.path.basename(p) for p in paths] == ['cv_reports.csv', CV_SUMMARY_FILE]
    frame = load_cv_reports(str(tmp_path))
    assert len(frame) == 6
    assert list(frame.columns) == ['table', 'row', 'description', 'fingerprint', 'seed', 'fold',
                                   'fold_size', 'accuracy']
    assert frame['seed'].iloc[0] == str(BIG_SEED)
    assert frame['accuracy'].tolist() == [0.9, 1.0, 0.95] * 2
    assert load_cv_reports(str(tmp_path), fingerprint="nothing").empty
