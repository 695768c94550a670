"""
Experiment records and the files written from them.

results csv   `strategy,seed,budget,macro_f1,micro_f1,accuracy,kmedoids_obj,kcenter_obj,selection_ms,train_ms`,
              one row per (strategy, seed, budget), floats written with `repr` so that a reload is exact
plot data     `budget,strategy,mean,stddev` of one metric, one row per (strategy, budget), averaged over seeds
summary       `strategy,metric,mean,stddev,count`, per strategy, flat over every (seed, budget) run

Standard deviations are population ones (divide by N).
"""
import csv
import logging
from abc import ABC
from collections import OrderedDict
from pathlib import Path
from typing import Any, Dict, Iterable, List, NamedTuple, Sequence, Union

import numpy as np
from smart_open import open

from featprop.common.exceptions import EmptySelectionError
from featprop.plugins.config import register_plugin

logger = logging.getLogger(__name__)

CSV_HEADER = ('strategy', 'seed', 'budget', 'macro_f1', 'micro_f1', 'accuracy', 'kmedoids_obj', 'kcenter_obj',
              'selection_ms', 'train_ms')
PLOT_HEADER = ('budget', 'strategy', 'mean', 'stddev')
SUMMARY_HEADER = ('strategy', 'metric', 'mean', 'stddev', 'count')
METRICS = ('macro_f1', 'micro_f1', 'accuracy')


class ExperimentRecord(NamedTuple):
    strategy: str
    seed: int
    budget: int
    macro_f1: float
    micro_f1: float
    accuracy: float
    kmedoids_obj: float
    kcenter_obj: float
    selection_ms: float
    train_ms: float


class SummaryRow(NamedTuple):
    strategy: str
    metric: str
    mean: float
    stddev: float
    count: int


def format_value(value: Any) -> str:
    return repr(float(value)) if isinstance(value, (float, np.floating)) else str(value)


def emit_csv(records: Iterable[ExperimentRecord], path: Union[str, Path]) -> Path:
    """
    Write the records in the given order; no records gives a header-only file
    """
    path = Path(str(path)).expanduser()
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(str(path), 'w') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(CSV_HEADER)
        for record in records:
            writer.writerow([format_value(value) for value in record])
    logger.info(f"Wrote results to {path}")
    return path


def read_csv(path: Union[str, Path]) -> List[ExperimentRecord]:

    records = []
    with open(str(Path(str(path)).expanduser()), 'r') as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"{path} does not have the results header {','.join(CSV_HEADER)}")
        for row in reader:
            records.append(ExperimentRecord(
                strategy=row['strategy'],
                seed=int(row['seed']),
                budget=int(row['budget']),
                **{field: float(row[field]) for field in CSV_HEADER[3:]}))
    return records


def _group(records: Iterable[ExperimentRecord], key) -> Dict[Any, List[ExperimentRecord]]:
    groups = OrderedDict()
    for record in records:
        groups.setdefault(key(record), []).append(record)
    return groups


def summarize(records: Sequence[ExperimentRecord], metric: str = 'macro_f1') -> List[SummaryRow]:
    """
    Mean and population stddev of `metric` per strategy, over all seeds and budgets.
    Strategies appear in order of first appearance.
    """
    if not records:
        raise EmptySelectionError('summarize')
    if metric not in CSV_HEADER[3:]:
        raise ValueError(f"Unknown metric `{metric}`, expected one of {', '.join(CSV_HEADER[3:])}")

    rows = []
    for strategy, group in _group(records, lambda r: r.strategy).items():
        values = np.array([getattr(r, metric) for r in group], dtype=np.float64)
        rows.append(SummaryRow(strategy=strategy, metric=metric, mean=float(values.mean()),
                               stddev=float(values.std(ddof=0)), count=len(values)))
    return rows


def plot_rows(records: Sequence[ExperimentRecord], metric: str = 'macro_f1') -> List[Dict[str, Any]]:
    """
    One row per (strategy, budget): mean and population stddev over seeds
    """
    rows = []
    for (strategy, budget), group in _group(records, lambda r: (r.strategy, r.budget)).items():
        values = np.array([getattr(r, metric) for r in group], dtype=np.float64)
        rows.append({'budget': budget, 'strategy': strategy, 'mean': float(values.mean()),
                     'stddev': float(values.std(ddof=0))})
    order = {strategy: k for k, strategy in enumerate(OrderedDict.fromkeys(r['strategy'] for r in rows))}
    return sorted(rows, key=lambda r: (order[r['strategy']], r['budget']))


def emit_plot_data(records: Sequence[ExperimentRecord], path: Union[str, Path], metric: str = 'macro_f1') -> Path:
    """
    Accuracy-vs-labeled-nodes curves of one dataset as data: `budget,strategy,mean,stddev`
    """
    path = Path(str(path)).expanduser()
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(str(path), 'w') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(PLOT_HEADER)
        for row in plot_rows(records, metric):
            writer.writerow([format_value(row[column]) for column in PLOT_HEADER])
    logger.info(f"Wrote {metric} plot data to {path}")
    return path


def emit_summary(rows: Iterable[SummaryRow], path: Union[str, Path]) -> Path:

    path = Path(str(path)).expanduser()
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(str(path), 'w') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(SUMMARY_HEADER)
        for row in rows:
            writer.writerow([format_value(value) for value in row])
    return path


def format_summary(rows: Sequence[SummaryRow]) -> str:
    """
    Human readable table, metrics in percent
    """
    width = max([len('strategy')] + [len(row.strategy) for row in rows])
    lines = [f"{'strategy':<{width}}  {'metric':<10}  {'mean':>7} +- {'std':<6}  n"]
    for row in rows:
        lines.append(f"{row.strategy:<{width}}  {row.metric:<10}  {100 * row.mean:7.2f} +- {100 * row.stddev:<6.2f}  {row.count}")
    return '\n'.join(lines)


class ReporterABC(ABC):
    """
    Reporter implementations write reports about finished experiments. They should at least produce human readable
    reports, but can additionally produce reports that are easily machine-parsable.
    """

    def report(self, experiment_name: str, records: Sequence[ExperimentRecord], report_dir: Path) -> Any:
        """
        report the results of an experiment
        :param experiment_name: the name of the experiment.
        :param records: the records of the completed experiment.
        :param report_dir: the directory in which to write the report
        :return: the key metric values
        """
        pass

    @staticmethod
    def report_globally(aggregate_reports: Dict, report_dir: Path) -> Any:
        """
        do a global reporting for multiple experiment configurations
        :param aggregate_reports: the result of report() on each experiment config.
        :param report_dir: the directory in which to write the report
        :return: a global reporting of the key metric values along different configurations.
        """
        pass


@register_plugin
class CsvReporter(ReporterABC):
    """
    Writes `results.csv`, `plot_data_<name>.csv` and `summary.csv` for one experiment, and `summary.csv` over every
    experiment of a sweep
    """

    def __init__(self, metric: str = 'macro_f1'):
        self.metric: str = metric

    def report(self, experiment_name: str, records: Sequence[ExperimentRecord], report_dir: Path) -> List[SummaryRow]:

        report_dir = Path(str(report_dir))
        emit_csv(records, report_dir / 'results.csv')
        emit_plot_data(records, report_dir / f'plot_data_{experiment_name}.csv', metric=self.metric)
        if not records:
            logger.warning(f"{experiment_name}: no records, skipping the summary")
            return []

        rows = [row for metric in METRICS for row in summarize(records, metric)]
        emit_summary(rows, report_dir / 'summary.csv')
        logger.info(f"{experiment_name}:\n{format_summary([row for row in rows if row.metric == self.metric])}")
        return rows

    @staticmethod
    def report_globally(aggregate_reports: Dict[str, List[SummaryRow]], report_dir: Path) -> Path:

        path = Path(str(report_dir)) / 'summary.csv'
        with open(str(path), 'w') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(('section',) + SUMMARY_HEADER)
            for section, rows in aggregate_reports.items():
                for row in rows:
                    writer.writerow([section] + [format_value(value) for value in row])
        logger.info(f"Wrote the summary of {len(aggregate_reports)} experiments to {path}")
        return path
