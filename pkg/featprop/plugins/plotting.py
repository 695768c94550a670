"""
Render plot-data files as metric-vs-budget curves, one line per strategy with a mean +- stddev band.
matplotlib is an optional dependency (`pip install featprop[plot]`), imported on first use.
"""
import csv
import logging
from collections import OrderedDict
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
from smart_open import open

logger = logging.getLogger(__name__)

FIGURE_SIZE = (6.0, 4.0)


def read_plot_data(path: Union[str, Path]) -> Dict[str, Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """
    :return: strategy -> (budgets, means, stddevs), strategies in file order
    """
    series: Dict[str, List[Tuple[int, float, float]]] = OrderedDict()
    with open(str(Path(str(path)).expanduser()), 'r') as f:
        for row in csv.DictReader(f):
            series.setdefault(row['strategy'], []).append((int(row['budget']), float(row['mean']), float(row['stddev'])))
    return {strategy: tuple(np.array(column) for column in zip(*sorted(points)))
            for strategy, points in series.items()}


def render_plot(plot_data_path: Union[str, Path], image_path: Union[str, Path], metric: str = 'Macro-F1',
                title: str = None) -> Path:

    import matplotlib
    matplotlib.use('Agg')
    import matplotlib.pyplot as plt

    series = read_plot_data(plot_data_path)
    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    for strategy, (budgets, means, stddevs) in series.items():
        ax.plot(budgets, 100 * means, marker='o', label=strategy)
        ax.fill_between(budgets, 100 * (means - stddevs), 100 * (means + stddevs), alpha=0.15)
    if _supports_base_kwarg(matplotlib):
        ax.set_xscale('log', base=2)
    else:
        ax.set_xscale('log', basex=2)
    ax.set_xlabel('labeled nodes')
    ax.set_ylabel(f'{metric} (%)')
    ax.set_title(title or Path(str(plot_data_path)).stem)
    ax.legend(fontsize=8)
    fig.tight_layout()

    image_path = Path(str(image_path)).expanduser()
    image_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(str(image_path))
    plt.close(fig)
    logger.info(f"Saved plot to {image_path}")
    return image_path


def _supports_base_kwarg(matplotlib) -> bool:
    major, minor = (int(v) for v in matplotlib.__version__.split('.')[:2])
    return (major, minor) >= (3, 3)
