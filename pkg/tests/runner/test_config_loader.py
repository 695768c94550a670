import shutil
import tempfile
from pathlib import Path
from unittest import TestCase

from featprop.plugins.config import ExperimentConfig
from featprop.runner.experiment_runner import load_config


class ConfigLoaderTest(TestCase):

    def test_loader(self):
        pkg_dir = Path(__file__).parent

        # Test the load_config works for both cfg and toml files
        cfg_config = load_config(p=pkg_dir / 'test_experiment.cfg')
        toml_config = load_config(p=pkg_dir / 'test_experiment.toml')
        self.assertEqual(list(cfg_config), ['gcn', 'sgc'])
        self.assertEqual(list(toml_config), ['gcn', 'sgc'])

        # cfg values are typed one by one, lists stay strings
        self.assertEqual(cfg_config['sgc']['prop_steps'], 1)
        self.assertEqual(cfg_config['sgc']['lr'], 0.05)
        self.assertIs(cfg_config['gcn']['decay_all_layers'], False)
        self.assertIsInstance(cfg_config['gcn']['budgets'], str)
        self.assertIsInstance(toml_config['gcn']['budgets'], list)

        # both give the same experiments once merged into a base experiment
        base = ExperimentConfig.load_experiment_config(pkg_dir / 'test_experiment.json')
        for section in ('gcn', 'sgc'):
            self.assertEqual(ExperimentConfig.from_dict({**base, **cfg_config[section]}),
                             ExperimentConfig.from_dict({**base, **toml_config[section]}))

    def test_base_experiment_formats(self):
        pkg_dir = Path(__file__).parent
        self.assertEqual(ExperimentConfig.from_file(pkg_dir / 'test_experiment.json'),
                         ExperimentConfig.from_file(pkg_dir / 'test_experiment.yml'))

    def test_unknown_suffix(self):
        test_dir = tempfile.mkdtemp()
        try:
            path = Path(test_dir) / 'grid.ini'
            path.write_text('[a]\nmodel=gcn\n')
            with self.assertRaises(ValueError):
                load_config(path)
        finally:
            shutil.rmtree(test_dir)
