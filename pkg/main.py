#!/usr/bin/env python3
"""
Main CLI application for the Derm2Vec experiments.
"""

import argparse
import sys
from typing import List, Optional

from config_loader import load_config, print_config, save_config, set_config
from dermatology_data import dataset_summary, get_schema, load_feature_matrix, render_summary_markdown
from errors import ConfigError, DatasetParseError
from experiments import TABLE_KINDS, EXPERIMENT_KINDS, ExperimentConfig, load_data, run_experiment
from model_factory import get_available_models
from report_writer import emit_report, write_cv_reports


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="derm2vec",
        description="Derm2Vec - autoencoder patient vectors for erythemato-squamous disease classification",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Reproduce all three tables with the default configuration
  python main.py run --data data/dermatology.data

  # Only the DNN sweep, 5 seeds, 4 worker processes
  python main.py run --table 1 --seeds 5 --jobs 4

  # Custom configuration file, Markdown only
  python main.py run --config my_experiment.yaml --format md

  # Class distribution of the data file
  python main.py data-summary --data data/dermatology.data
        """
    )

    subparsers = parser.add_subparsers(dest='command', help='Command to execute')

    # Run command
    run_parser = subparsers.add_parser('run', help='Run experiments and write reports')
    run_parser.add_argument('--config', type=str, help='YAML configuration file (default: config.yaml if present)')
    which = run_parser.add_mutually_exclusive_group()
    which.add_argument('--table', type=int, choices=sorted(TABLE_KINDS),
                       help='Run one table: 1 = DNN sweep, 2 = Derm2Vec sweep, 3 = comparison')
    which.add_argument('--kind', type=str, choices=EXPERIMENT_KINDS, help='Run one experiment kind')
    run_parser.add_argument('--data', type=str, help='Path to the dermatology data file')
    run_parser.add_argument('--schema', type=str, help="Data layout: 'compact' or 'uci_release'")
    run_parser.add_argument('--seed', type=int, help='Master seed')
    run_parser.add_argument('--seeds', type=int, help='Repeat every configuration under N derived seeds')
    run_parser.add_argument('--out', type=str, help='Output directory')
    run_parser.add_argument('--format', type=str, choices=['md', 'csv'], action='append',
                            help='Report format (repeatable; default: config output.formats)')
    run_parser.add_argument('--jobs', type=int, help='Worker processes for grid points')
    run_parser.add_argument('--quiet', action='store_true', help='Only print the final summary')

    # Data summary command
    summary_parser = subparsers.add_parser('data-summary', help='Show row counts and class distribution')
    summary_parser.add_argument('--data', type=str, help='Path to the dermatology data file')
    summary_parser.add_argument('--schema', type=str, help="Data layout: 'compact' or 'uci_release'")
    summary_parser.add_argument('--config', type=str, help='YAML configuration file')

    # Show config command
    show_parser = subparsers.add_parser('show-config', help='Print the effective configuration')
    show_parser.add_argument('--config', type=str, help='YAML configuration file')
    show_parser.add_argument('--section', type=str, help="Dot path of a section, e.g. 'training'")
    show_parser.add_argument('--save', type=str, metavar='PATH',
                             help='Write the effective configuration (file + env overrides) to PATH')

    # Models command
    subparsers.add_parser('models', help='List available classifiers')

    return parser


def apply_overrides(args):
    """CLI flags take precedence over config file and environment."""
    overrides = {
        'data.path': getattr(args, 'data', None),
        'data.schema': getattr(args, 'schema', None),
        'seed': getattr(args, 'seed', None),
        'seeds': getattr(args, 'seeds', None),
        'jobs': getattr(args, 'jobs', None),
        'output.dir': getattr(args, 'out', None),
        'output.formats': getattr(args, 'format', None),
    }
    for key_path, value in overrides.items():
        if value is not None:
            set_config(key_path, value)


def requested_kinds(args, config) -> List[str]:
    if args.table is not None:
        return [TABLE_KINDS[args.table]]
    if args.kind is not None:
        return [args.kind]
    tables = config.get('experiment', {}).get('tables', sorted(TABLE_KINDS))
    kinds = []
    for i, table in enumerate(tables):
        if table not in TABLE_KINDS:
            raise ConfigError(f'experiment.tables[{i}]', f"expected one of {sorted(TABLE_KINDS)}, got {table!r}")
        kinds.append(TABLE_KINDS[table])
    return kinds


def handle_run(args) -> int:
    """Run the requested experiments; 1 if any row failed."""
    config = load_config(args.config)
    apply_overrides(args)
    verbose = not args.quiet

    cfgs = [ExperimentConfig.from_config(config, kind, verbose=verbose) for kind in requested_kinds(args, config)]
    data = load_data(cfgs[0])
    if verbose:
        print(f"[INFO] Loaded {data.rows} rows x {data.n_features} features from {cfgs[0].data_path}")

    tables = []
    for cfg in cfgs:
        sweeps = [t for t in tables if t.kind in ('dnn_sweep', 'derm2vec_sweep')]
        table = run_experiment(cfg, data, sweeps)
        tables.append(table)
        for fmt in cfg.formats:
            emit_report(table, fmt, cfg.output_dir)
    write_cv_reports(tables, cfgs[0].output_dir)

    failed = [(table.name, row) for table in tables for row in table.failed_rows]
    print("\n" + "=" * 80)
    print("EXPERIMENT SUMMARY")
    print("=" * 80)
    for table in tables:
        ok = len(table.rows) - len(table.failed_rows)
        print(f"{table.name}: {ok}/{len(table.rows)} rows succeeded - {table.caption}")
    for name, row in failed:
        print(f"  [FAIL] {name} row {row.index} ({row.description}): {row.status}")
    print("=" * 80)
    return 1 if failed else 0


def handle_data_summary(args) -> int:
    config = load_config(args.config)
    apply_overrides(args)
    path = config['data']['path']
    schema = get_schema(config['data'].get('schema', 'compact'))
    summary = dataset_summary(path, schema)
    print(render_summary_markdown(summary))
    data = load_feature_matrix(path, schema)
    print(f"Encoded design matrix: {data.rows} rows x {data.n_features} columns, "
          f"age range {data.age_range[0]}-{data.age_range[1]}")
    return 0


def handle_show_config(args) -> int:
    load_config(args.config)
    if args.save:
        save_config(args.save)
        return 0
    print_config(args.section)
    return 0


def handle_models() -> int:
    print("Available classifiers:\n")
    for kind, description in get_available_models().items():
        print(f"  {kind:<10} {description}")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return 1

    try:
        if args.command == 'run':
            return handle_run(args)
        elif args.command == 'data-summary':
            return handle_data_summary(args)
        elif args.command == 'show-config':
            return handle_show_config(args)
        elif args.command == 'models':
            return handle_models()
    except ConfigError as e:
        print(f"[FAIL] Configuration error: {e}")
        return 2
    except DatasetParseError as e:
        print(f"[FAIL] Data file error: {e}")
        return 2
    except OSError as e:
        print(f"[FAIL] {e}")
        return 2

    parser.print_help()
    return 1


if __name__ == "__main__":
    sys.exit(main())
