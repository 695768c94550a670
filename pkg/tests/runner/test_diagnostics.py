import csv
import shutil
import tempfile
from pathlib import Path
from unittest import TestCase

import numpy as np

from featprop.loaders.graph import normalized_adjacency
from featprop.loaders.loaders import save_dataset_json
from featprop.loaders.synthetic import generate_sbm
from featprop.plugins.config import ExperimentConfig
from featprop.plugins.strategies import SelectionContext, select_featprop, select_random
from featprop.propagation.propagation import PropagatedFeatures, propagate
from featprop.runner.diagnostics import BOUND_HEADER, bound_report, bound_report_from_dir
from featprop.runner.experiment_runner import ExperimentRunner


class BoundReportTest(TestCase):

    def setUp(self):
        self.points = PropagatedFeatures(np.random.default_rng(0).normal(size=(30, 3)))

    def test_all_nodes(self):
        report = bound_report(self.points, {'featprop': range(30), 'random': range(30)})
        for row in report.rows:
            self.assertEqual((row.kmedoids_obj, row.kcenter_obj, row.pool_size), (0.0, 0.0, 30))
        self.assertTrue(report.featprop_is_best)

    def test_mean_never_exceeds_max(self):
        rng = np.random.default_rng(1)
        pools = {f'pool{k}': rng.choice(30, size=5, replace=False) for k in range(10)}
        report = bound_report(self.points, pools)
        self.assertEqual([row.strategy for row in report.rows], list(pools))
        for row in report.rows:
            self.assertLessEqual(row.kmedoids_obj, row.kcenter_obj)
        self.assertIsNone(report.featprop_is_best)
        with self.assertRaises(KeyError):
            report.row('featprop')

    def test_flag(self):
        points = PropagatedFeatures(np.array([[0.0], [1.0], [2.0], [10.0]]))
        report = bound_report(points, {'featprop': [1], 'random': [3]})
        self.assertTrue(report.featprop_is_best)
        self.assertEqual(report.row('featprop').kmedoids_obj, (1 + 0 + 1 + 9) / 4)
        self.assertFalse(bound_report(points, {'featprop': [3], 'random': [1]}).featprop_is_best)

    def test_featprop_against_random_on_two_block_sbms(self):
        wins = 0
        for seed in range(50):
            dataset = generate_sbm([50, 50], p_in=0.2, p_out=0.02, feature_noise=0.5, seed=seed)
            adjacency = normalized_adjacency(dataset.graph)
            propagated = propagate(adjacency, dataset.features, k_steps=2)
            ctx = SelectionContext(dataset=dataset, adjacency=adjacency, propagated=propagated, current_pool=[],
                                   budget_total=10, seed=seed)
            report = bound_report(propagated, {'featprop': select_featprop(ctx).new_nodes,
                                               'random': select_random(ctx).new_nodes})
            for row in report.rows:
                self.assertLessEqual(row.kmedoids_obj, row.kcenter_obj)
            wins += report.row('featprop').kmedoids_obj < report.row('random').kmedoids_obj
        self.assertGreaterEqual(wins, 45)


class BoundReportFromDirTest(TestCase):

    def setUp(self):
        self.test_dir = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(str(self.test_dir))

    def test_report_of_a_run(self):
        dataset = generate_sbm([10, 10], p_in=0.5, p_out=0.05, feature_noise=0.3, seed=2, name='toy')
        path = save_dataset_json(dataset, self.test_dir / 'toy.json')
        cfg = ExperimentConfig(dataset=str(path), format='json', strategies=['random', 'degree', 'featprop'],
                               budgets=[3, 6], seeds=[0, 1], initial_pool=2, epochs=5)
        ExperimentRunner.run(cfg, report_dir=self.test_dir / 'run')

        out = bound_report_from_dir(self.test_dir / 'run')
        self.assertEqual(out, self.test_dir / 'run' / 'bound_report.csv')
        with open(str(out)) as f:
            reader = csv.reader(f)
            self.assertEqual(tuple(next(reader)), BOUND_HEADER)
            rows = list(reader)
        self.assertEqual(len(rows), 2 * 2 * 3)
        self.assertEqual([(int(r[0]), int(r[1]), r[2]) for r in rows[:3]],
                         [(0, 3, 'random'), (0, 3, 'degree'), (0, 3, 'featprop')])
        for row in rows:
            self.assertEqual(int(row[3]), int(row[1]) + 2)
            self.assertLessEqual(float(row[4]), float(row[5]))
            self.assertIn(row[6], ('true', 'false'))

        custom = bound_report_from_dir(self.test_dir / 'run', self.test_dir / 'bounds.csv')
        self.assertEqual(custom.read_text(), out.read_text())
