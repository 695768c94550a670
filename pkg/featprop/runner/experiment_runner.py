"""
The experiment protocol.

For every (strategy, seed) cell: draw the initial pool uniformly with the seed, train a bootstrap model on it, then
for every budget in increasing order select, train a fresh model on the labeled pool and evaluate it on all nodes.
Cells are independent and may run in a process pool; results are always reported in canonical order
(strategy order of the configuration, then seed order, then budget).
"""
import configparser
import json
import logging
import shutil
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Tuple, Union

import numpy as np
import toml
from smart_open import open

from featprop.common.exceptions import CellError, ConfigError, FeatPropError
from featprop.common.utils import derive_seed, elapsed_ms
from featprop.loaders.graph import Dataset, NormalizedAdjacency, normalized_adjacency
from featprop.loaders.loaders import load_dataset
from featprop.plugins.config import REGISTRY, ExperimentConfig, build_plugin, plugin_name
from featprop.plugins.helpers import TrainConfig
from featprop.plugins.metrics import evaluate
from featprop.plugins.models import GcnModel, GraphInputs
from featprop.plugins.predictors import GcnPredictor
from featprop.plugins.reporters import CsvReporter, ExperimentRecord, ReporterABC
from featprop.plugins.strategies import RepresentationStrategy, SelectionContext, SelectionStrategy
from featprop.plugins.trainers import GcnTrainer
from featprop.propagation.propagation import PropagatedFeatures, propagate

logger = logging.getLogger(__name__)

ConfigEnv = Dict[str, Any]
# strategy -> seed -> budget -> labeled pool
Pools = Dict[str, Dict[int, Dict[int, List[int]]]]


class ExperimentData:
    """
    The dataset and everything derived from it once and shared by all cells: S, S X / S^2 X and S^K X
    """

    def __init__(self, dataset: Dataset, prop_steps: int):
        self.dataset: Dataset = dataset
        self.adjacency: NormalizedAdjacency = normalized_adjacency(dataset.graph)
        self.inputs: GraphInputs = GraphInputs(self.adjacency, dataset.features)
        self.propagated: PropagatedFeatures = propagate(self.adjacency, dataset.features, k_steps=prop_steps)


class CellOutcome(NamedTuple):
    strategy: str
    seed: int
    initial_pool: List[int]
    records: List[ExperimentRecord]
    pools: Dict[int, List[int]]
    errors: List[CellError]


class ExperimentOutcome(NamedTuple):
    records: List[ExperimentRecord]
    pools: Pools
    initial_pools: Dict[int, List[int]]
    errors: List[CellError]


def load_experiment_dataset(cfg: ExperimentConfig) -> Dataset:
    if cfg.dataset is None:
        raise ConfigError('dataset', "a dataset path is required")
    return load_dataset(cfg.dataset, format=cfg.format, row_normalize=cfg.row_normalize, strict_edges=cfg.strict_edges)


def check_budgets(cfg: ExperimentConfig, dataset: Dataset):
    if cfg.initial_pool + cfg.budgets[-1] > dataset.n_nodes:
        raise ConfigError('budgets', f"initial pool ({cfg.initial_pool}) + largest budget ({cfg.budgets[-1]}) exceeds "
                                     f"the {dataset.n_nodes} nodes of {dataset.name}")


def draw_initial_pool(n_nodes: int, size: int, seed: int) -> List[int]:
    rng = np.random.default_rng(seed)
    return sorted(int(v) for v in rng.choice(n_nodes, size=size, replace=False))


def _train(cfg: ExperimentConfig, data: ExperimentData, pool: List[int], seed: int) -> GcnModel:
    trainer = GcnTrainer(dataset=data.dataset, inputs=data.inputs, pool=pool,
                         config=TrainConfig(learning_rate=cfg.lr, weight_decay=cfg.weight_decay, epochs=cfg.epochs, seed=seed),
                         variant=cfg.model, hidden_size=cfg.hidden, decay_all_layers=cfg.decay_all_layers,
                         log_every=cfg.log_every)
    return trainer.train()


def run_cell(cfg: ExperimentConfig, data: ExperimentData, strategy_config: Union[str, Dict[str, Any]],
             seed: int) -> CellOutcome:
    """
    Run the budget sweep of one (strategy, seed) cell. A failing budget is logged and recorded as a CellError; the
    remaining budgets of the cell are skipped since they build on its pool.
    """
    name = plugin_name(strategy_config)
    if isinstance(strategy_config, str) and issubclass(REGISTRY.get(name, object), RepresentationStrategy):
        strategy_config = {'_name': name, 'representation': cfg.representation}
    strategy: SelectionStrategy = build_plugin(strategy_config, name=f'strategies.{name}')
    dataset = data.dataset

    initial = draw_initial_pool(dataset.n_nodes, cfg.initial_pool, seed)
    records: List[ExperimentRecord] = []
    pools: Dict[int, List[int]] = {}
    errors: List[CellError] = []

    previous_model: Optional[GcnModel] = None
    if cfg.bootstrap_model and initial:
        try:
            previous_model = _train(cfg, data, initial, seed)
        except FeatPropError as e:
            error = CellError(name, seed, 0, e)
            logger.error(f"{error}; continuing without a bootstrap model")
            errors.append(error)

    pool = list(initial)
    for budget in cfg.budgets:
        try:
            current = pool if strategy.incremental else initial
            ctx = SelectionContext(dataset=dataset, adjacency=data.adjacency, propagated=data.propagated,
                                   current_pool=current, initial_pool=initial, budget_total=budget,
                                   seed=derive_seed(seed, budget), previous_model=previous_model, inputs=data.inputs)
            selection_ms, train_ms = [], []
            with elapsed_ms(selection_ms):
                selection = strategy.select(ctx)
            pool = sorted(set(current) | set(selection.new_nodes))
            if len(pool) != budget + len(initial):
                raise FeatPropError(f"{name} produced a pool of {len(pool)} nodes, expected {budget + len(initial)}")

            with elapsed_ms(train_ms):
                model = _train(cfg, data, pool, seed)
            metrics = evaluate(GcnPredictor(model, data.inputs).predict(), dataset.labels)
        except Exception as e:
            error = CellError(name, seed, budget, e)
            logger.error(str(error), exc_info=not isinstance(e, FeatPropError))
            errors.append(error)
            break

        record = ExperimentRecord(
            strategy=name, seed=seed, budget=budget,
            macro_f1=metrics['macro_f1'], micro_f1=metrics['micro_f1'], accuracy=metrics['accuracy'],
            kmedoids_obj=selection.diagnostics['kmedoids_objective'],
            kcenter_obj=selection.diagnostics['kcenter_objective'],
            selection_ms=selection_ms[0] if cfg.timings else 0.0,
            train_ms=train_ms[0] if cfg.timings else 0.0)
        logger.info(f"{name} seed={seed} budget={budget}: macro-F1={record.macro_f1:.4f} "
                    f"micro-F1={record.micro_f1:.4f} kmedoids={record.kmedoids_obj:.4f}")
        records.append(record)
        pools[budget] = pool
        previous_model = model

    return CellOutcome(strategy=name, seed=seed, initial_pool=initial, records=records, pools=pools, errors=errors)


def _run_cell_in_worker(args: Tuple[ExperimentConfig, ExperimentData, Union[str, Dict[str, Any]], int]) -> CellOutcome:
    outcome = run_cell(*args)
    # exception causes do not all survive pickling
    errors = [CellError(e.strategy, e.seed, e.budget, FeatPropError(f"{type(e.cause).__name__}: {e.cause}"))
              for e in outcome.errors]
    return outcome._replace(errors=errors)


def run_cells(cfg: ExperimentConfig, dataset: Dataset = None) -> ExperimentOutcome:

    dataset = dataset if dataset is not None else load_experiment_dataset(cfg)
    check_budgets(cfg, dataset)
    data = ExperimentData(dataset, prop_steps=cfg.prop_steps)

    cells = [(cfg, data, strategy_config, seed) for strategy_config in cfg.strategies for seed in cfg.seeds]
    logger.info(f"Running {len(cells)} cells ({len(cfg.strategies)} strategies x {len(cfg.seeds)} seeds) "
                f"over budgets {cfg.budgets} on {dataset.name}")

    if cfg.n_jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=cfg.n_jobs) as executor:
            outcomes = list(executor.map(_run_cell_in_worker, cells))
    else:
        outcomes = [run_cell(*cell) for cell in cells]

    records, pools, initial_pools, errors = [], {}, {}, []
    for outcome in outcomes:
        records.extend(outcome.records)
        pools.setdefault(outcome.strategy, {})[outcome.seed] = outcome.pools
        initial_pools[outcome.seed] = outcome.initial_pool
        errors.extend(outcome.errors)

    if errors:
        logger.warning(f"{len(errors)} cells failed")
    return ExperimentOutcome(records=records, pools=pools, initial_pools=initial_pools, errors=errors)


def run_experiment(cfg: ExperimentConfig, dataset: Dataset = None) -> List[ExperimentRecord]:
    """
    :param dataset: use this dataset instead of loading `cfg.dataset`
    :return: one record per successful (strategy, seed, budget), in canonical order
    """
    return run_cells(cfg, dataset).records


def save_pools(outcome: ExperimentOutcome, path: Path) -> Path:
    payload = {
        'initial': {str(seed): pool for seed, pool in outcome.initial_pools.items()},
        'pools': {strategy: {str(seed): {str(budget): pool for budget, pool in by_budget.items()}
                             for seed, by_budget in by_seed.items()}
                  for strategy, by_seed in outcome.pools.items()}}
    with open(str(path), 'w') as f:
        json.dump(payload, f, indent=1)
    return path


def load_pools(path: Path) -> Tuple[Dict[int, List[int]], Pools]:
    with open(str(path), 'r') as f:
        payload = json.load(f)
    initial = {int(seed): pool for seed, pool in payload['initial'].items()}
    pools = {strategy: {int(seed): {int(budget): pool for budget, pool in by_budget.items()}
                        for seed, by_budget in by_seed.items()}
             for strategy, by_seed in payload['pools'].items()}
    return initial, pools


def load_config(p: Path) -> Dict[str, ConfigEnv]:
    """
    Read a sweep grid: a .toml file with one table per experiment, or a .cfg file with one section per experiment
    """
    p = Path(str(p)).expanduser()
    if p.suffix == '.toml':
        rv = toml.load(str(p))
        return rv

    if p.suffix != '.cfg':
        raise ValueError("Config files should be either .cfg or .toml files")

    def get_val(cfg: configparser.ConfigParser, section: str, key):
        try:
            return cfg.getint(section, key)
        except ValueError:
            pass
        try:
            return cfg.getfloat(section, key)
        except ValueError:
            pass
        try:
            return cfg.getboolean(section, key)
        except ValueError:
            pass

        return cfg[section][key]

    cfg = configparser.ConfigParser()
    cfg.optionxform = str
    cfg.read(str(p))

    rv = {}

    for exp_name in cfg.sections():
        exp = {}
        for key in cfg[exp_name].keys():
            exp[key] = get_val(cfg, exp_name, key)
        rv[exp_name] = exp

    return rv


class ExperimentRunner:
    """
    Run one experiment into a report directory, or a base experiment several times with varying configurations.
    """

    @staticmethod
    def _capture_logs(report_path: Path):
        logger = logging.getLogger('')
        handler = logging.FileHandler(str(report_path / 'runner.log'))
        fmt = logging.Formatter('%(asctime)s %(levelname)s: %(message)s')
        handler.setFormatter(fmt)
        logger.addHandler(handler)
        return handler

    @staticmethod
    def _stop_log_capture(handler):
        logger = logging.getLogger('')
        logger.removeHandler(handler)
        handler.close()

    @staticmethod
    def run(cfg: ExperimentConfig, report_dir: Union[str, Path] = None, reporter: ReporterABC = None,
            dataset: Dataset = None) -> Tuple[ExperimentOutcome, Any]:
        """
        Run the experiment and write into `report_dir` (default `cfg.out`): `results.csv`, `plot_data_<name>.csv`,
        `summary.csv`, `pools.json`, `experiment_config.toml` and `runner.log`

        :return: the outcome and the report returned by the reporter
        """
        report_path = Path(str(report_dir if report_dir is not None else cfg.out)).expanduser()
        report_path.mkdir(parents=True, exist_ok=True)
        reporter = reporter or CsvReporter()

        log_handler = ExperimentRunner._capture_logs(report_path)
        try:
            dataset = dataset if dataset is not None else load_experiment_dataset(cfg)
            name = cfg.name or dataset.name
            logger.info(f"running {name}")

            with open(str(report_path / 'experiment_config.toml'), 'w') as expfile:
                toml.dump(cfg.to_dict(), expfile)

            outcome = run_cells(cfg, dataset)
            save_pools(outcome, report_path / 'pools.json')
            report = reporter.report(name, outcome.records, report_path)
            for error in outcome.errors:
                logger.warning(f"failed cell: {error}")
        finally:
            ExperimentRunner._stop_log_capture(log_handler)

        return outcome, report

    @staticmethod
    def run_all(experiment: Union[str, Path, Dict],
                experiment_config: Union[str, Path],
                report_dir: Union[str, Path],
                reporter: ReporterABC = None,
                **overrides) -> Dict[str, Any]:
        """
        :param experiment: the base experiment, a dict or a json/yaml/toml file
        :param experiment_config: the sweep grid. The cfg file should be defined in `ConfigParser
               <https://docs.python.org/3/library/configparser.html#module-configparser>`_ format (or toml) such that
               each section is an experiment configuration overriding keys of the base experiment.
        :param report_dir: the directory in which to produce the reports, one sub-directory per section. It's
               recommended to include a timestamp in your report directory so you can preserve previous reports.
        :param reporter: defaults to `CsvReporter`
        :param overrides: values overriding both the base experiment and every section
        :return: the report of each section
        """
        envs: Dict[str, ConfigEnv] = load_config(Path(str(experiment_config)))

        report_path = Path(str(report_dir)).expanduser()
        report_path.mkdir(parents=True)

        # Before starting, save the global files: base experiment and grid
        global_report_dir = report_path / 'global-reporting'
        global_report_dir.mkdir(parents=True)
        if not isinstance(experiment, dict):
            shutil.copy(src=str(experiment), dst=str(global_report_dir / Path(str(experiment)).name))
        shutil.copy(src=str(experiment_config), dst=str(global_report_dir / Path(str(experiment_config)).name))

        base = ExperimentConfig.load_experiment_config(experiment)
        reporter = reporter or CsvReporter()

        aggregate_reports = {}
        for exp_name, env in envs.items():
            values = dict(base)
            values.update(env)
            values.update({key: value for key, value in overrides.items() if value is not None})
            values['out'] = str(report_path / exp_name)
            values.setdefault('name', exp_name)
            cfg = ExperimentConfig.from_dict(values)

            _, report = ExperimentRunner.run(cfg, report_dir=report_path / exp_name, reporter=reporter)
            aggregate_reports[exp_name] = report

        reporter.report_globally(aggregate_reports=aggregate_reports, report_dir=global_report_dir)
        return aggregate_reports
