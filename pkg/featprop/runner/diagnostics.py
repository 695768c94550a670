"""
Both clustering objectives of the labeled pools over the propagated features.

The mean distance to the nearest labeled node (K-Medoids objective) and the cover radius (K-Center objective) are
the geometric terms of the two classification-loss bounds; a pool with a smaller K-Medoids objective gives the
tighter bound. The report flags whether the featprop pool is the one minimizing it.
"""
import csv
import logging
from collections import OrderedDict
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Union

import toml
from smart_open import open

from featprop.clustering.clustering import kcenter_objective, kmedoids_objective
from featprop.loaders.graph import normalized_adjacency
from featprop.plugins.config import ExperimentConfig
from featprop.plugins.reporters import format_value
from featprop.propagation.propagation import PropagatedFeatures, propagate
from featprop.runner.experiment_runner import load_experiment_dataset, load_pools

logger = logging.getLogger(__name__)

FEATPROP = 'featprop'
BOUND_HEADER = ('seed', 'budget', 'strategy', 'pool_size', 'kmedoids_obj', 'kcenter_obj', 'featprop_is_best')


class BoundRow(NamedTuple):
    strategy: str
    pool_size: int
    kmedoids_obj: float
    kcenter_obj: float


class BoundReport(NamedTuple):
    rows: List[BoundRow]
    # None when no featprop pool is part of the comparison
    featprop_is_best: Optional[bool]

    def row(self, strategy: str) -> BoundRow:
        for row in self.rows:
            if row.strategy == strategy:
                return row
        raise KeyError(strategy)


def bound_report(features: PropagatedFeatures, pools: Mapping[str, Iterable[int]]) -> BoundReport:
    """
    :param features: S^K X
    :param pools: strategy -> labeled pool, pools of the same size for a fair comparison
    :return: one row per pool in the given order; ties with the featprop objective count as featprop being best
    """
    rows = []
    for strategy, pool in pools.items():
        pool = sorted(set(int(v) for v in pool))
        rows.append(BoundRow(strategy=strategy, pool_size=len(pool),
                             kmedoids_obj=kmedoids_objective(features, pool),
                             kcenter_obj=kcenter_objective(features, pool)))

    best = None
    if FEATPROP in pools:
        featprop = next(row for row in rows if row.strategy == FEATPROP)
        best = all(featprop.kmedoids_obj <= row.kmedoids_obj for row in rows)
    return BoundReport(rows=rows, featprop_is_best=best)


def bound_report_from_dir(in_dir: Union[str, Path], out_path: Union[str, Path] = None) -> Path:
    """
    Recompute the objectives of every pool saved by a run (`pools.json` and `experiment_config.toml` of its
    report directory), grouped by (seed, budget), and write them to `bound_report.csv`

    :return: the csv path
    """
    in_dir = Path(str(in_dir)).expanduser()
    with open(str(in_dir / 'experiment_config.toml'), 'r') as f:
        cfg = ExperimentConfig.from_dict(toml.load(f))
    _, pools = load_pools(in_dir / 'pools.json')

    dataset = load_experiment_dataset(cfg)
    features = propagate(normalized_adjacency(dataset.graph), dataset.features, k_steps=cfg.prop_steps)

    grouped: Dict[tuple, Dict[str, List[int]]] = OrderedDict()
    for seed in cfg.seeds:
        for budget in cfg.budgets:
            for strategy, by_seed in pools.items():
                pool = by_seed.get(seed, {}).get(budget)
                if pool is not None:
                    grouped.setdefault((seed, budget), OrderedDict())[strategy] = pool

    out_path = Path(str(out_path)).expanduser() if out_path is not None else in_dir / 'bound_report.csv'
    n_best, n_compared = 0, 0
    with open(str(out_path), 'w') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(BOUND_HEADER)
        for (seed, budget), group in grouped.items():
            report = bound_report(features, group)
            if report.featprop_is_best is not None:
                n_compared += 1
                n_best += int(report.featprop_is_best)
            flag = '' if report.featprop_is_best is None else str(report.featprop_is_best).lower()
            for row in report.rows:
                writer.writerow([seed, budget, row.strategy, row.pool_size, format_value(row.kmedoids_obj),
                                 format_value(row.kcenter_obj), flag])

    if n_compared:
        logger.info(f"featprop attains the smallest K-Medoids objective in {n_best}/{n_compared} (seed, budget) groups")
    logger.info(f"Wrote bound report to {out_path}")
    return out_path
