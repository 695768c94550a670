"""
Command line entry point: `featprop <command> [options]`

    run           one budget sweep over a dataset, from flags and/or a config file (flags win)
    summarize     mean +- stddev per strategy of a results csv
    bound-report  both clustering objectives of every pool saved by a run
    gen-sbm       write a stochastic block model dataset in the json format
    sweep         a base experiment run once per section of a .cfg / .toml grid
    plot          render a plot-data csv (requires matplotlib)
"""
import argparse
import logging
import sys
from typing import List, Optional

from featprop.common.exceptions import FeatPropError
from featprop.loaders.loaders import save_dataset_json
from featprop.loaders.synthetic import generate_sbm
from featprop.plugins.config import (DATASET_FORMATS, MODEL_VARIANTS, REPRESENTATIONS, ExperimentConfig,
                                     InstantiationError, parse_int_list)
from featprop.plugins.reporters import METRICS, format_summary, read_csv, summarize
from featprop.runner.diagnostics import bound_report_from_dir
from featprop.runner.experiment_runner import ExperimentRunner

logger = logging.getLogger(__name__)


def _add_run_arguments(parser: argparse.ArgumentParser):
    # every default is None so that only the flags actually given override the config file
    parser.add_argument('--config', help="experiment file (json, yaml or toml) with one key per flag")
    parser.add_argument('--dataset', help="dataset path")
    parser.add_argument('--format', choices=DATASET_FORMATS)
    parser.add_argument('--strategies', help="comma separated strategy names")
    parser.add_argument('--budgets', help="strictly increasing, comma separated, e.g. 10,20,40,80,160")
    parser.add_argument('--seeds', help="a seed count N (seeds 0..N-1) or a comma separated list")
    parser.add_argument('--initial-pool', type=int)
    parser.add_argument('--model', choices=MODEL_VARIANTS)
    parser.add_argument('--prop-steps', type=int)
    parser.add_argument('--hidden', type=int)
    parser.add_argument('--epochs', type=int)
    parser.add_argument('--lr', type=float)
    parser.add_argument('--weight-decay', type=float)
    parser.add_argument('--out', help="report directory")
    parser.add_argument('--representation', choices=REPRESENTATIONS,
                        help="model representation used by coreset and netrep-kmedoids")
    parser.add_argument('--n-jobs', type=int, help="worker processes for the (strategy, seed) cells")
    parser.add_argument('--log-every', type=int)
    parser.add_argument('--name', help="experiment name, defaults to the dataset name")
    parser.add_argument('--no-row-normalize', dest='row_normalize', action='store_const', const=False, default=None)
    parser.add_argument('--lenient-edges', dest='strict_edges', action='store_const', const=False, default=None,
                        help="drop citations to undeclared nodes instead of failing")
    parser.add_argument('--decay-all-layers', action='store_const', const=True, default=None)
    parser.add_argument('--no-timings', dest='timings', action='store_const', const=False, default=None,
                        help="write 0 for the timing columns so that reruns are byte-identical")
    parser.add_argument('--no-bootstrap-model', dest='bootstrap_model', action='store_const', const=False,
                        default=None)


def build_parser() -> argparse.ArgumentParser:

    parser = argparse.ArgumentParser(prog='featprop', description="Active learning for GCNs by feature propagation")
    parser.add_argument('--verbose', action='store_true', help="debug logging")
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    _add_run_arguments(commands.add_parser('run', help="run one budget sweep"))

    summarize_parser = commands.add_parser('summarize', help="summarize a results csv")
    summarize_parser.add_argument('--in', dest='in_path', required=True)
    summarize_parser.add_argument('--metric', choices=METRICS, default='macro_f1')

    bound_parser = commands.add_parser('bound-report', help="clustering objectives of the saved pools")
    bound_parser.add_argument('--in', dest='in_path', required=True, help="report directory of a run")
    bound_parser.add_argument('--out', help="csv path, defaults to <in>/bound_report.csv")

    sbm_parser = commands.add_parser('gen-sbm', help="write a stochastic block model dataset")
    sbm_parser.add_argument('--blocks', default='50,50')
    sbm_parser.add_argument('--p-in', type=float, default=0.2)
    sbm_parser.add_argument('--p-out', type=float, default=0.02)
    sbm_parser.add_argument('--noise', type=float, default=0.0, help="stddev of the feature noise")
    sbm_parser.add_argument('--seed', type=int, default=0)
    sbm_parser.add_argument('--out', required=True)

    sweep_parser = commands.add_parser('sweep', help="run a base experiment once per grid section")
    sweep_parser.add_argument('--config', required=True, help="base experiment file")
    sweep_parser.add_argument('--grid', required=True, help=".cfg or .toml file, one section per experiment")
    sweep_parser.add_argument('--out', required=True, help="report directory, must not exist")
    sweep_parser.add_argument('--n-jobs', type=int)

    plot_parser = commands.add_parser('plot', help="render a plot-data csv")
    plot_parser.add_argument('--in', dest='in_path', required=True)
    plot_parser.add_argument('--out', required=True, help="image path")
    plot_parser.add_argument('--metric', default='Macro-F1', help="y axis label")

    return parser


def _run(args) -> int:
    overrides = {key: value for key, value in vars(args).items() if key not in {'command', 'verbose', 'config'}}
    if args.config:
        cfg = ExperimentConfig.from_file(args.config, **overrides)
    else:
        cfg = ExperimentConfig(**overrides)

    outcome, rows = ExperimentRunner.run(cfg)
    if rows:
        print(format_summary([row for row in rows if row.metric == 'macro_f1']))
    for error in outcome.errors:
        print(f"FAILED {error}", file=sys.stderr)
    return 1 if outcome.errors else 0


def _summarize(args) -> int:
    print(format_summary(summarize(read_csv(args.in_path), metric=args.metric)))
    return 0


def _gen_sbm(args) -> int:
    dataset = generate_sbm(parse_int_list(args.blocks, 'blocks'), p_in=args.p_in, p_out=args.p_out,
                           feature_noise=args.noise, seed=args.seed)
    save_dataset_json(dataset, args.out)
    logger.info(f"Wrote {dataset} to {args.out}")
    return 0


def _sweep(args) -> int:
    ExperimentRunner.run_all(experiment=args.config, experiment_config=args.grid, report_dir=args.out,
                             n_jobs=args.n_jobs)
    return 0


def _bound_report(args) -> int:
    bound_report_from_dir(args.in_path, args.out)
    return 0


def _plot(args) -> int:
    from featprop.plugins.plotting import render_plot
    render_plot(args.in_path, args.out, metric=args.metric)
    return 0


COMMANDS = {
    'run': _run,
    'summarize': _summarize,
    'bound-report': _bound_report,
    'gen-sbm': _gen_sbm,
    'sweep': _sweep,
    'plot': _plot,
}


def main(argv: Optional[List[str]] = None) -> int:

    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)

    try:
        return COMMANDS[args.command](args)
    except (FeatPropError, InstantiationError, ValueError, OSError) as e:
        logger.error(str(e))
        return 2
