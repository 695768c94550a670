import csv
import shutil
import tempfile
import unittest
from pathlib import Path

from featprop.common.exceptions import EmptySelectionError
from featprop.plugins.reporters import (CSV_HEADER, PLOT_HEADER, CsvReporter, ExperimentRecord, emit_csv,
                                        emit_plot_data, format_summary, plot_rows, read_csv, summarize)


def record(strategy: str = 'random', seed: int = 0, budget: int = 10, macro_f1: float = 0.5) -> ExperimentRecord:
    return ExperimentRecord(strategy=strategy, seed=seed, budget=budget, macro_f1=macro_f1, micro_f1=0.6,
                            accuracy=0.6, kmedoids_obj=0.1 + seed, kcenter_obj=0.7 + seed, selection_ms=1.25,
                            train_ms=31.0)


class SummarizeTest(unittest.TestCase):

    def test_single_record(self):
        row, = summarize([record(macro_f1=0.42)])
        self.assertEqual((row.strategy, row.mean, row.stddev, row.count), ('random', 0.42, 0.0, 1))

    def test_population_stddev(self):
        row, = summarize([record(macro_f1=0.6), record(seed=1, macro_f1=0.8)])
        self.assertAlmostEqual(row.mean, 0.7, places=12)
        self.assertAlmostEqual(row.stddev, 0.1, places=12)

    def test_strategies_in_order_of_appearance(self):
        rows = summarize([record('featprop'), record('random'), record('featprop', seed=1)], metric='accuracy')
        self.assertEqual([(row.strategy, row.count) for row in rows], [('featprop', 2), ('random', 1)])
        self.assertTrue(all(row.metric == 'accuracy' for row in rows))
        self.assertIn('featprop', format_summary(rows))

    def test_errors(self):
        with self.assertRaises(EmptySelectionError):
            summarize([])
        with self.assertRaises(ValueError):
            summarize([record()], metric='auc')


class FilesTest(unittest.TestCase):

    def setUp(self):
        self.test_dir = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(str(self.test_dir))

    def test_csv_reload(self):
        records = [record('featprop', seed, budget, macro_f1=1.0 / 3.0 + seed) for seed in range(2) for budget in (5, 10)]
        path = emit_csv(records, self.test_dir / 'nested' / 'results.csv')
        self.assertEqual(path.read_text().splitlines()[0], ','.join(CSV_HEADER))
        self.assertEqual(read_csv(path), records)

    def test_empty_records(self):
        path = emit_csv([], self.test_dir / 'results.csv')
        self.assertEqual(path.read_text(), ','.join(CSV_HEADER) + '\n')
        self.assertEqual(read_csv(path), [])
        plot = emit_plot_data([], self.test_dir / 'plot.csv')
        self.assertEqual(plot.read_text(), ','.join(PLOT_HEADER) + '\n')

    def test_foreign_csv(self):
        path = self.test_dir / 'other.csv'
        path.write_text('a,b\n1,2\n')
        with self.assertRaises(ValueError):
            read_csv(path)

    def test_plot_data_rows(self):
        records = [record(strategy, seed, budget, macro_f1=0.1 * seed)
                   for strategy in ('featprop', 'random') for budget in (10, 20, 40, 80, 160) for seed in range(3)]
        path = emit_plot_data(records, self.test_dir / 'plot.csv')
        with open(str(path)) as f:
            rows = list(csv.DictReader(f))
        self.assertEqual(len(rows), 10)
        self.assertEqual([(r['strategy'], int(r['budget'])) for r in rows[:5]],
                         [('featprop', b) for b in (10, 20, 40, 80, 160)])
        self.assertAlmostEqual(float(rows[0]['mean']), 0.1, places=12)

    def test_plot_rows_are_sorted_by_budget(self):
        records = [record(budget=20), record(budget=10), record('featprop', budget=10)]
        self.assertEqual([(r['strategy'], r['budget']) for r in plot_rows(records)],
                         [('random', 10), ('random', 20), ('featprop', 10)])


class CsvReporterTest(unittest.TestCase):

    def setUp(self):
        self.test_dir = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(str(self.test_dir))

    def test_report(self):
        records = [record('featprop', seed, macro_f1=0.8) for seed in range(2)] + [record('random', macro_f1=0.4)]
        rows = CsvReporter().report('toy', records, self.test_dir)
        for name in ('results.csv', 'plot_data_toy.csv', 'summary.csv'):
            self.assertTrue((self.test_dir / name).exists(), name)
        self.assertEqual(len(rows), 6)
        macro = [row for row in rows if row.metric == 'macro_f1']
        self.assertEqual([(row.strategy, row.mean) for row in macro], [('featprop', 0.8), ('random', 0.4)])

    def test_report_without_records(self):
        self.assertEqual(CsvReporter().report('empty', [], self.test_dir), [])
        self.assertFalse((self.test_dir / 'summary.csv').exists())

    def test_report_globally(self):
        rows = CsvReporter().report('toy', [record()], self.test_dir)
        path = CsvReporter.report_globally({'gcn': rows, 'sgc': rows}, self.test_dir)
        lines = path.read_text().splitlines()
        self.assertEqual(lines[0], 'section,strategy,metric,mean,stddev,count')
        self.assertEqual(len(lines), 1 + 2 * len(rows))


if __name__ == '__main__':
    unittest.main()
