import io
import logging
import shutil
import tempfile
from pathlib import Path
from typing import Any, Dict
from unittest import TestCase

import toml

from featprop.common.exceptions import ConfigError, TrainingError
from featprop.loaders.loaders import save_dataset_json
from featprop.loaders.synthetic import generate_sbm
from featprop.plugins.config import STRATEGY_NAMES, ExperimentConfig, register_as, register_plugin
from featprop.plugins.reporters import ReporterABC, summarize
from featprop.plugins.strategies import RandomStrategy, SelectionContext, SelectionStrategy
from featprop.runner.experiment_runner import (ExperimentRunner, draw_initial_pool, load_pools, run_cells,
                                               run_experiment)

logger = logging.getLogger(__name__)
logger.setLevel(level=logging.INFO)

# Source to keep logs: http://alanwsmith.com/capturing-python-log-output-in-a-variable
log_capture_string = io.StringIO()
ch = logging.StreamHandler(log_capture_string)
ch.setLevel(logging.INFO)
logger.addHandler(ch)


@register_as('test-failing')
class FailingStrategy(SelectionStrategy):
    """
    Random selection that diverges from budget 8 on
    """
    name = 'test-failing'

    def select(self, ctx: SelectionContext):
        if ctx.budget_total >= 8:
            raise TrainingError(epoch=None, reason='diverged')
        return RandomStrategy().select(ctx)


@register_plugin
class MockReporter(ReporterABC):

    def report(self, experiment_name: str, records, report_dir: Path):
        ExperimentRunnerTest._reports[experiment_name] = list(records)
        logger.info(f"{experiment_name}: {len(records)} records")
        return len(records)

    @staticmethod
    def report_globally(aggregate_reports: Dict, report_dir: Path) -> Any:
        logger.info("global reporting message")
        return sum(aggregate_reports.values())


def toy_config(**values) -> ExperimentConfig:
    settings = dict(strategies=['random', 'featprop'], budgets=[4, 8], seeds=[0, 1], initial_pool=2, hidden=8,
                    epochs=20, timings=False)
    settings.update(values)
    return ExperimentConfig(**settings)


class ExperimentRunnerTest(TestCase):
    _reports = {}

    def setUp(self):
        ExperimentRunnerTest._reports = {}
        self.test_dir = Path(tempfile.mkdtemp())
        self.dataset = generate_sbm([10, 10], p_in=0.5, p_out=0.05, feature_noise=0.3, seed=0, name='toy')
        self.dataset_path = save_dataset_json(self.dataset, self.test_dir / 'toy.json')

    def tearDown(self):
        shutil.rmtree(str(self.test_dir))

    def test_records(self):
        records = run_experiment(toy_config(), dataset=self.dataset)
        self.assertEqual([(r.strategy, r.seed, r.budget) for r in records],
                         [(s, seed, b) for s in ('random', 'featprop') for seed in (0, 1) for b in (4, 8)])
        for r in records:
            self.assertEqual(r.micro_f1, r.accuracy)
            for value in (r.macro_f1, r.micro_f1, r.accuracy):
                self.assertTrue(0.0 <= value <= 1.0)
            self.assertGreaterEqual(r.kmedoids_obj, 0.0)
            self.assertLessEqual(r.kmedoids_obj, r.kcenter_obj)
            self.assertEqual((r.selection_ms, r.train_ms), (0.0, 0.0))

    def test_loads_the_configured_dataset(self):
        cfg = toy_config(dataset=str(self.dataset_path), format='json', row_normalize=False)
        self.assertEqual(run_experiment(cfg), run_experiment(toy_config(), dataset=self.dataset))
        with self.assertRaises(ConfigError):
            run_experiment(toy_config())

    def test_budgets_must_fit(self):
        with self.assertRaises(ConfigError):
            run_experiment(toy_config(budgets=[10, 19]), dataset=self.dataset)

    def test_full_pool(self):
        outcome = run_cells(toy_config(strategies=['random'], budgets=[15], initial_pool=5), dataset=self.dataset)
        for seed in (0, 1):
            self.assertEqual(outcome.pools['random'][seed][15], list(range(20)))
        self.assertEqual(len(outcome.records), 2)

    def test_pools(self):
        cfg = toy_config(strategies=list(STRATEGY_NAMES), budgets=[2, 4, 6], epochs=10)
        outcome = run_cells(cfg, dataset=self.dataset)
        self.assertEqual(outcome.errors, [])
        self.assertEqual(len(outcome.records), len(STRATEGY_NAMES) * 2 * 3)
        for seed in cfg.seeds:
            initial = outcome.initial_pools[seed]
            self.assertEqual(initial, draw_initial_pool(20, 2, seed))
            for strategy in STRATEGY_NAMES:
                pools = outcome.pools[strategy][seed]
                for budget in cfg.budgets:
                    self.assertEqual(len(pools[budget]), budget + 2, f"{strategy} {budget}")
                    self.assertTrue(set(initial) <= set(pools[budget]))
                if strategy in ('random', 'degree', 'uncertainty', 'coreset'):
                    self.assertTrue(set(pools[2]) < set(pools[4]) < set(pools[6]), strategy)

    def test_deterministic_csv(self):
        cfg = toy_config(dataset=str(self.dataset_path), format='json', name='toy')
        ExperimentRunner.run(cfg, report_dir=self.test_dir / 'first')
        ExperimentRunner.run(cfg, report_dir=self.test_dir / 'second')
        for name in ('results.csv', 'plot_data_toy.csv', 'summary.csv', 'pools.json'):
            self.assertEqual((self.test_dir / 'first' / name).read_bytes(),
                             (self.test_dir / 'second' / name).read_bytes(), name)

    def test_parallel_cells_match_serial(self):
        serial = run_cells(toy_config(), dataset=self.dataset)
        parallel = run_cells(toy_config(n_jobs=2), dataset=self.dataset)
        self.assertEqual(parallel.records, serial.records)
        self.assertEqual(parallel.pools, serial.pools)

    def test_failing_cell_is_isolated(self):
        outcome = run_cells(toy_config(strategies=['test-failing', 'random']), dataset=self.dataset)
        self.assertEqual([(e.strategy, e.seed, e.budget) for e in outcome.errors],
                         [('test-failing', 0, 8), ('test-failing', 1, 8)])
        self.assertIsInstance(outcome.errors[0].cause, TrainingError)
        self.assertIn('diverged', str(outcome.errors[0]))
        self.assertEqual([(r.strategy, r.budget) for r in outcome.records if r.strategy == 'test-failing'],
                         [('test-failing', 4), ('test-failing', 4)])
        self.assertEqual(len([r for r in outcome.records if r.strategy == 'random']), 4)

    def test_run(self):
        cfg = toy_config(dataset=str(self.dataset_path), format='json')
        outcome, report = ExperimentRunner.run(cfg, report_dir=self.test_dir / 'report', reporter=MockReporter())
        report_dir = self.test_dir / 'report'
        for name in ('pools.json', 'experiment_config.toml', 'runner.log'):
            self.assertTrue((report_dir / name).exists(), name)

        self.assertEqual(report, 8)
        self.assertEqual(ExperimentRunnerTest._reports['toy'], outcome.records)
        self.assertEqual(ExperimentConfig.from_dict(toml.load(str(report_dir / 'experiment_config.toml'))), cfg)

        initial, pools = load_pools(report_dir / 'pools.json')
        self.assertEqual(initial, outcome.initial_pools)
        self.assertEqual(pools, outcome.pools)

    def test_run_all(self):
        pkg_dir = Path(__file__).parent

        reports = ExperimentRunner.run_all(experiment=pkg_dir / 'test_experiment.json',
                                           experiment_config=pkg_dir / 'test_experiment.cfg',
                                           report_dir=self.test_dir / 'reports',
                                           reporter=MockReporter(),
                                           dataset=str(self.dataset_path))
        self.assertEqual(reports, {'gcn': 8, 'sgc': 8})
        self.assertEqual(set(ExperimentRunnerTest._reports), {'gcn', 'sgc'})
        self.assertIn("global reporting message", log_capture_string.getvalue())

        global_dir = self.test_dir / 'reports' / 'global-reporting'
        self.assertTrue((global_dir / 'test_experiment.json').exists())
        self.assertTrue((global_dir / 'test_experiment.cfg').exists())

        for name, model, prop_steps, lr in [('gcn', 'gcn', 2, 0.01), ('sgc', 'sgc', 1, 0.05)]:
            # assert the section values were merged into the base experiment and recorded in the reports directory
            cfg = ExperimentConfig.from_dict(toml.load(str(self.test_dir / 'reports' / name / 'experiment_config.toml')))
            self.assertEqual((cfg.model, cfg.prop_steps, cfg.lr), (model, prop_steps, lr))
            self.assertEqual((cfg.budgets, cfg.seeds, cfg.epochs), ([4, 8], [0, 1], 20))
            self.assertEqual(cfg.dataset, str(self.dataset_path))
            self.assertEqual(cfg.out, str(self.test_dir / 'reports' / name))

        with self.assertRaises(FileExistsError):
            ExperimentRunner.run_all(experiment=pkg_dir / 'test_experiment.json',
                                     experiment_config=pkg_dir / 'test_experiment.cfg',
                                     report_dir=self.test_dir / 'reports', dataset=str(self.dataset_path))


class FourBlockSbmTest(TestCase):

    def test_featprop_beats_random(self):
        dataset = generate_sbm([100, 100, 100, 100], p_in=0.15, p_out=0.01, feature_noise=0.5, seed=0)
        cfg = ExperimentConfig(strategies=['featprop', 'random'], budgets=[8], seeds=5, timings=False)
        outcome = run_cells(cfg, dataset=dataset)
        self.assertEqual(outcome.errors, [])

        labels = dataset.labels.labels
        for seed in cfg.seeds:
            pool = outcome.pools['featprop'][seed][8]
            selected = sorted(set(pool) - set(outcome.initial_pools[seed]))
            self.assertEqual(len(selected), 8)
            self.assertEqual(set(labels[selected].tolist()), {0, 1, 2, 3}, f"seed {seed}")
        macro_f1 = {row.strategy: row.mean for row in summarize(outcome.records, 'macro_f1')}
        self.assertGreaterEqual(macro_f1['featprop'], 0.85)
        self.assertGreaterEqual(macro_f1['featprop'] - macro_f1['random'], 0.05, macro_f1)
