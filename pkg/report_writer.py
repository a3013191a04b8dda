"""
Report Writer

Saves experiment tables as Markdown and CSV, writes the per-fold
cv_reports.csv and re-parses table CSVs. Table content is deterministic; the
generation timestamp sits on its own line (a "# generated:" comment in CSV,
the last line in Markdown) so files can be compared without it.
"""

import csv
import os
from typing import Any, Dict, List, Optional

import pandas as pd

from config import CV_REPORTS_FILE
from experiments import SOURCE_REPRODUCED, STATUS_OK, ReportRow, ReportTable

CV_SUMMARY_FILE = "cv_summary.csv"
GENERATED_PREFIX = "# generated: "
META_PREFIX = "# meta: "

# Machine columns of a table CSV; every other column is a descriptive one
_CSV_FIELDS = ['index', 'method', 'mean_cv_score', 'spread', 'seeds', 'fingerprint',
               'published_score', 'source', 'status']


def _fmt_float(value: Optional[float]) -> str:
    # repr round-trips a float exactly
    return '' if value is None else repr(float(value))


def _parse_float(text: str) -> Optional[float]:
    return None if text == '' else float(text)


def table_frame(table: ReportTable) -> pd.DataFrame:
    """Machine-readable frame of a table: one row per grid point, every value a string."""
    descriptive = table.column_names
    records = []
    for row in table.rows:
        record = {'index': str(row.index), 'method': row.method}
        for name in descriptive:
            record[name] = row.columns.get(name, '')
        record.update({
            'mean_cv_score': _fmt_float(row.mean_cv_score),
            'spread': _fmt_float(row.spread),
            'seeds': ' '.join(str(seed) for seed in row.seeds),
            'fingerprint': row.fingerprint,
            'published_score': _fmt_float(row.published_score),
            'source': row.source,
            'status': row.status,
        })
        records.append(record)
    columns = ['index', 'method'] + descriptive + _CSV_FIELDS[2:]
    return pd.DataFrame.from_records(records, columns=columns)


def display_frame(table: ReportTable) -> pd.DataFrame:
    """Human-readable frame for Markdown: scores with two decimals, spread when seeds > 1."""
    multi_seed = any(len(row.scores) > 1 for row in table.rows)
    records = []
    for row in table.rows:
        record = {'Sl no.': row.index}
        for name in table.column_names:
            record[name.replace('_', ' ').capitalize()] = row.columns.get(name, '')
        if row.failed:
            score = row.status
        elif row.mean_cv_score is None:
            score = ''
        elif multi_seed and row.source == SOURCE_REPRODUCED:
            score = f"{row.mean_cv_score:.2f} ± {row.spread:.2f}"
        else:
            score = f"{row.mean_cv_score:.2f}"
        record['Mean CV score (%)'] = score
        record['Published (%)'] = '' if row.published_score is None else f"{row.published_score:.2f}"
        record['Source'] = row.source
        record['Fingerprint'] = row.fingerprint
        records.append(record)
    return pd.DataFrame.from_records(records)


def _meta_line(table: ReportTable) -> str:
    items = [f"table={table.name}", f"kind={table.kind}", f"caption={table.caption}"]
    items += [f"{key}={value}" for key, value in table.metadata.items()]
    return "; ".join(items)


def render_markdown(table: ReportTable) -> str:
    lines = [
        f"# {table.caption}",
        "",
        display_frame(table).to_markdown(index=False, disable_numparse=True),
        "",
        _meta_line(table),
        "",
        f"_Generated: {table.generated}_",
        "",
    ]
    return "\n".join(lines)


def render_csv(table: ReportTable) -> str:
    body = table_frame(table).to_csv(index=False, lineterminator='\n')
    return f"{META_PREFIX}{_meta_line(table)}\n{GENERATED_PREFIX}{table.generated}\n{body}"


def _write(path: str, content: str):
    try:
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(content)
    except OSError as e:
        raise OSError(f"cannot write report {path}: {e}") from e


def emit_report(table: ReportTable, fmt: str, out_dir: str) -> str:
    """
    Write a table to <out_dir>/<table.name>.<fmt>.

    Args:
        table: Report table
        fmt: 'md' or 'csv'
        out_dir: Output directory (created if missing)

    Returns:
        Path of the written file
    """
    renderers = {'md': render_markdown, 'markdown': render_markdown, 'csv': render_csv}
    if fmt not in renderers:
        raise ValueError(f"Unknown report format: {fmt}. Supported formats: 'md', 'csv'")
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create output directory {out_dir}: {e}") from e

    extension = 'md' if fmt in ('md', 'markdown') else 'csv'
    path = os.path.join(out_dir, f"{table.name}.{extension}")
    _write(path, renderers[fmt](table))
    print(f"[INFO] Report saved to: {path}")
    return path


def parse_report_csv(path: str) -> ReportTable:
    """
    Read a table CSV written by emit_report.

    Per-fold reports are not part of the table file, so rows come back
    without them.

    Args:
        path: Table CSV path

    Returns:
        ReportTable
    """
    meta: Dict[str, str] = {}
    generated = ''
    header_lines = 0
    with open(path, 'r', encoding='utf-8') as f:
        for line in f:
            if line.startswith(META_PREFIX):
                for item in line[len(META_PREFIX):].rstrip('\n').split('; '):
                    key, _, value = item.partition('=')
                    meta[key] = value
            elif line.startswith(GENERATED_PREFIX):
                generated = line[len(GENERATED_PREFIX):].rstrip('\n')
            else:
                break
            header_lines += 1

    frame = pd.read_csv(path, skiprows=header_lines, dtype=str, keep_default_na=False)
    descriptive = [name for name in frame.columns if name not in _CSV_FIELDS]
    rows = []
    for record in frame.to_dict(orient='records'):
        rows.append(ReportRow(
            index=int(record['index']),
            method=record['method'],
            columns={name: record[name] for name in descriptive if record[name] != ''},
            fingerprint=record['fingerprint'],
            seeds=[int(seed) for seed in record['seeds'].split()],
            mean_cv_score=_parse_float(record['mean_cv_score']),
            spread=_parse_float(record['spread']),
            published_score=_parse_float(record['published_score']),
            source=record['source'],
            status=record['status'] or STATUS_OK,
        ))

    name = meta.pop('table', os.path.splitext(os.path.basename(path))[0])
    kind = meta.pop('kind', '')
    caption = meta.pop('caption', '')
    return ReportTable(name=name, kind=kind, caption=caption, rows=rows, metadata=meta, generated=generated)


def cv_report_records(tables: List[ReportTable]) -> List[Dict[str, Any]]:
    """One record per fold per seed per reproduced row."""
    records = []
    for table in tables:
        for row in table.rows:
            for report in row.reports:
                for fold_row in report.to_csv_rows():
                    records.append({'table': table.name, 'row': row.index,
                                    'description': row.description, **fold_row})
    return records


def write_cv_reports(tables: List[ReportTable], out_dir: str) -> List[str]:
    """
    Write cv_reports.csv (one line per fold) and cv_summary.csv (one line per CV run).

    Args:
        tables: Tables whose rows carry CVReports
        out_dir: Output directory

    Returns:
        Paths of the written files
    """
    os.makedirs(out_dir, exist_ok=True)
    folds = pd.DataFrame.from_records(
        cv_report_records(tables),
        columns=['table', 'row', 'description', 'fingerprint', 'seed', 'fold', 'fold_size', 'accuracy'],
    )
    summaries = []
    for table in tables:
        for row in table.rows:
            for report in row.reports:
                summaries.append({'table': table.name, 'row': row.index, **report.summary_row()})
    summary = pd.DataFrame.from_records(summaries)

    paths = []
    for name, frame in ((CV_REPORTS_FILE, folds), (CV_SUMMARY_FILE, summary)):
        path = os.path.join(out_dir, name)
        _write(path, frame.to_csv(index=False, lineterminator='\n', float_format='%.17g',
                                  quoting=csv.QUOTE_MINIMAL))
        paths.append(path)
    print(f"[INFO] Per-fold accuracies saved to: {paths[0]}")
    return paths


def load_cv_reports(out_dir: str, fingerprint: Optional[str] = None) -> pd.DataFrame:
    """Per-fold accuracies from cv_reports.csv, optionally for one fingerprint."""
    frame = pd.read_csv(os.path.join(out_dir, CV_REPORTS_FILE), dtype={'fingerprint': str, 'seed': str})
    if fingerprint is not None:
        frame = frame[frame['fingerprint'] == fingerprint]
    return frame
