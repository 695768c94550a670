import shutil
import tempfile
import unittest
from pathlib import Path

import toml

from featprop.common.exceptions import ConfigError
from featprop.plugins.config import (REGISTRY, STRATEGY_NAMES, CallableInstantiationError, ExperimentConfig,
                                     UnknownPluginException, build_plugin, parse_seeds, plugin_name, register_as,
                                     register_plugin)
from featprop.plugins.strategies import CoresetGreedyStrategy, FeatPropStrategy


@register_as('test-demo-plugin')
class DemoPlugin:

    def __init__(self, width: int = 3):
        self.width = width


class RegistryTest(unittest.TestCase):

    def test_register_twice(self):
        with self.assertRaises(ValueError):
            register_plugin(DemoPlugin, alias='test-demo-plugin')
        self.assertIs(REGISTRY['test-demo-plugin'], DemoPlugin)

    def test_build_by_name(self):
        self.assertIsInstance(build_plugin('featprop', name='strategies[0]'), FeatPropStrategy)
        self.assertEqual(build_plugin('test-demo-plugin', name='demo').width, 3)

    def test_build_from_mapping(self):
        strategy = build_plugin({'_name': 'coreset', 'representation': 'hidden'}, name='strategies[0]')
        self.assertIsInstance(strategy, CoresetGreedyStrategy)
        self.assertEqual(strategy.representation, 'hidden')

    def test_unknown_plugin(self):
        with self.assertRaises(UnknownPluginException) as context:
            build_plugin('age', name='strategies[1]')
        self.assertIn('age', str(context.exception))

    def test_failing_constructor(self):
        with self.assertRaises(CallableInstantiationError) as context:
            build_plugin({'_name': 'coreset', 'representation': 'logits'}, name='strategies[0]')
        self.assertEqual(context.exception.arg_names, ['representation'])

    def test_plugin_name(self):
        self.assertEqual(plugin_name('random'), 'random')
        self.assertEqual(plugin_name({'_name': 'degree'}), 'degree')
        with self.assertRaises(ConfigError):
            plugin_name({'representation': 'final'})


class ExperimentConfigTest(unittest.TestCase):

    def setUp(self):
        self.test_dir = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(str(self.test_dir))

    def test_defaults(self):
        cfg = ExperimentConfig()
        self.assertEqual(cfg.strategies, list(STRATEGY_NAMES))
        self.assertEqual(cfg.budgets, [10, 20, 40, 80, 160])
        self.assertEqual(cfg.seeds, [0, 1, 2, 3, 4])
        self.assertEqual((cfg.initial_pool, cfg.model, cfg.prop_steps, cfg.hidden), (5, 'gcn', 2, 16))
        self.assertEqual((cfg.epochs, cfg.lr, cfg.weight_decay), (200, 0.01, 5e-4))
        self.assertIsNone(cfg.dataset)
        # wall-clock columns unless switched off
        self.assertTrue(cfg.timings)
        self.assertFalse(ExperimentConfig(timings=False).timings)

    def test_string_values(self):
        cfg = ExperimentConfig(strategies='random, featprop', budgets='5,10', seeds='3')
        self.assertEqual(cfg.strategies, ['random', 'featprop'])
        self.assertEqual(cfg.budgets, [5, 10])
        self.assertEqual(cfg.seeds, [0, 1, 2])
        self.assertEqual(ExperimentConfig(seeds='7,3').seeds, [7, 3])
        self.assertEqual(parse_seeds(2), [0, 1])

    def test_invalid_values(self):
        invalid = [{'budgets': [20, 10]}, {'budgets': [10, 10]}, {'budgets': []}, {'seeds': [1, 1]}, {'seeds': 0},
                   {'model': 'gat'}, {'format': 'csv'}, {'strategies': ['random', 'random']}, {'strategies': []},
                   {'lr': 0.0}, {'hidden': 0}, {'epochs': -1}, {'representation': 'logits'}, {'budgets': 'a,b'}]
        for values in invalid:
            with self.assertRaises(ConfigError, msg=str(values)):
                ExperimentConfig(**values)

    def test_unknown_key(self):
        with self.assertRaises(ConfigError) as context:
            ExperimentConfig(learning_rate=0.1)
        self.assertEqual(context.exception.key, 'learning_rate')

    def test_overrides_win(self):
        cfg = ExperimentConfig.from_dict({'epochs': 10, 'prop-steps': 3, 'model': 'sgc'}, epochs=20, model=None)
        self.assertEqual((cfg.epochs, cfg.prop_steps, cfg.model), (20, 3, 'sgc'))

    def test_files(self):
        values = {'dataset': 'graph.json', 'format': 'json', 'strategies': ['random', 'featprop'], 'budgets': [4, 8],
                  'seeds': 2, 'epochs': 30}
        (self.test_dir / 'experiment.toml').write_text(toml.dumps(values))
        (self.test_dir / 'experiment.yml').write_text(
            'dataset: graph.json\nformat: json\nstrategies: [random, featprop]\nbudgets: [4, 8]\nseeds: 2\nepochs: 30\n')
        (self.test_dir / 'experiment.json').write_text(
            '{"dataset": "graph.json", "format": "json", "strategies": ["random", "featprop"], "budgets": [4, 8], '
            '"seeds": 2, "epochs": 30}')
        expected = ExperimentConfig(**values)
        for name in ('experiment.toml', 'experiment.yml', 'experiment.json'):
            self.assertEqual(ExperimentConfig.from_file(self.test_dir / name), expected, name)
        self.assertEqual(ExperimentConfig.from_file(self.test_dir / 'experiment.json', epochs=5).epochs, 5)

        (self.test_dir / 'experiment.ini').write_text('[section]\n')
        with self.assertRaises(ValueError):
            ExperimentConfig.from_file(self.test_dir / 'experiment.ini')

    def test_to_dict_reloads(self):
        cfg = ExperimentConfig(dataset='cora', strategies=['random', {'_name': 'coreset', 'representation': 'hidden'}],
                               budgets=[10, 20], seeds=[4, 2], name='cora-run')
        path = self.test_dir / 'saved.toml'
        path.write_text(toml.dumps(cfg.to_dict()))
        reloaded = ExperimentConfig.from_file(path)
        self.assertEqual(reloaded, cfg)
        self.assertEqual(reloaded.strategy_names, ['random', 'coreset'])

    def test_replace(self):
        cfg = ExperimentConfig(budgets=[10, 20])
        changed = cfg.replace(model='sgc')
        self.assertEqual(changed.model, 'sgc')
        self.assertEqual(changed.budgets, [10, 20])
        self.assertEqual(cfg.model, 'gcn')


if __name__ == '__main__':
    unittest.main()
