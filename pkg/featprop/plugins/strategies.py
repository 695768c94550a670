"""
Active learning selection strategies.

Every strategy is registered under its command line name and answers the same question: given the labeled pool
and the budget b, which unlabeled nodes should be labeled next. The size of the answer is always

    b + |initial pool| - |current pool|

Incremental strategies (random, degree, uncertainty, coreset) grow the previous pool; clustering strategies
(featprop, featprop-kcenter, netrep-kmedoids) are handed the initial pool as current pool and select b nodes from
scratch at every budget. Ties are always broken by the lowest node index.

New scorers (e.g. AGE or ANRMAB) plug in by subclassing `SelectionStrategy` and registering the class:

    @register_as('my-strategy')
    class MyStrategy(SelectionStrategy):
        def select(self, ctx): ...
"""
import logging
from abc import ABC, abstractmethod
from typing import Dict, Iterable, List, Optional

import numpy as np

from featprop.clustering.clustering import kcenter_greedy, kcenter_objective, kmedoids_approx, kmedoids_objective
from featprop.common.exceptions import NotEnoughNodesError
from featprop.loaders.graph import Dataset, NormalizedAdjacency
from featprop.plugins.config import REPRESENTATIONS, register_as
from featprop.plugins.models import GcnModel, GraphInputs
from featprop.plugins.predictors import GcnPredictor
from featprop.propagation.propagation import PropagatedFeatures

logger = logging.getLogger(__name__)


class SelectionContext:
    """
    Everything a strategy may look at. `previous_model` was trained on `current_pool` (or on the initial pool for
    clustering strategies) and is None before the first model exists.
    """

    def __init__(self, dataset: Dataset, adjacency: NormalizedAdjacency, propagated: PropagatedFeatures,
                 current_pool: Iterable[int], budget_total: int, seed: int, initial_pool: Iterable[int] = None,
                 previous_model: Optional[GcnModel] = None, inputs: Optional[GraphInputs] = None):

        self.dataset: Dataset = dataset
        self.adjacency: NormalizedAdjacency = adjacency
        self.propagated: PropagatedFeatures = propagated
        self.current_pool: List[int] = sorted(set(int(v) for v in current_pool))
        self.initial_pool: List[int] = sorted(set(int(v) for v in (initial_pool if initial_pool is not None else current_pool)))
        self.budget_total: int = int(budget_total)
        self.seed: int = int(seed)
        self.previous_model: Optional[GcnModel] = previous_model
        self.inputs: Optional[GraphInputs] = inputs

        if any(not 0 <= v < dataset.n_nodes for v in self.current_pool):
            raise ValueError(f"pool nodes must lie in [0, {dataset.n_nodes})")

    @property
    def request_size(self) -> int:
        return max(self.budget_total + len(self.initial_pool) - len(self.current_pool), 0)

    def unlabeled(self) -> np.ndarray:
        mask = np.ones(self.dataset.n_nodes, dtype=bool)
        mask[self.current_pool] = False
        return np.flatnonzero(mask)

    def check_request(self, k: int) -> int:
        available = self.dataset.n_nodes - len(self.current_pool)
        if k > available:
            raise NotEnoughNodesError(requested=k, available=available)
        return k

    def predictor(self) -> GcnPredictor:
        inputs = self.inputs if self.inputs is not None else GraphInputs(self.adjacency, self.dataset.features)
        return GcnPredictor(self.previous_model, inputs)


class Selection:

    def __init__(self, new_nodes: Iterable[int], strategy_name: str, diagnostics: Dict[str, float] = None):
        self.new_nodes: List[int] = [int(v) for v in new_nodes]
        self.strategy_name: str = strategy_name
        self.diagnostics: Dict[str, float] = diagnostics or {}

    def __repr__(self) -> str:
        return f"Selection(strategy={self.strategy_name}, new_nodes={len(self.new_nodes)}, diagnostics={self.diagnostics})"


def _selection(ctx: SelectionContext, name: str, new_nodes: Iterable[int], fallback: bool = False) -> Selection:

    new_nodes = [int(v) for v in new_nodes]
    assert len(set(new_nodes)) == len(new_nodes) and not set(new_nodes) & set(ctx.current_pool), \
        f"{name} selected labeled or duplicate nodes"

    pool = sorted(set(ctx.current_pool) | set(new_nodes))
    diagnostics = {'fallback': float(fallback)}
    if pool:
        diagnostics['kmedoids_objective'] = kmedoids_objective(ctx.propagated, pool)
        diagnostics['kcenter_objective'] = kcenter_objective(ctx.propagated, pool)
    logger.debug(f"{name}: selected {len(new_nodes)} nodes, pool size {len(pool)}")
    return Selection(new_nodes=new_nodes, strategy_name=name, diagnostics=diagnostics)


def _top_scores(candidates: np.ndarray, scores: np.ndarray, k: int) -> List[int]:
    """
    The k candidates with the largest score, ties to the lowest index. `candidates` must be sorted.
    """
    order = np.argsort(-scores[candidates], kind='stable')
    return candidates[order[:k]].tolist()


def select_random(ctx: SelectionContext) -> Selection:
    k = ctx.check_request(ctx.request_size)
    rng = np.random.default_rng(ctx.seed)
    chosen = rng.choice(ctx.unlabeled(), size=k, replace=False) if k else []
    return _selection(ctx, 'random', sorted(int(v) for v in chosen))


def select_degree(ctx: SelectionContext) -> Selection:
    k = ctx.check_request(ctx.request_size)
    degrees = ctx.dataset.graph.degrees.astype(np.float64)
    return _selection(ctx, 'degree', _top_scores(ctx.unlabeled(), degrees, k))


def select_uncertainty(ctx: SelectionContext) -> Selection:
    if ctx.previous_model is None:
        logger.debug("uncertainty: no previous model, falling back to random")
        selection = select_random(ctx)
        return _selection(ctx, 'uncertainty', selection.new_nodes, fallback=True)

    k = ctx.check_request(ctx.request_size)
    entropies = ctx.predictor().entropies()
    return _selection(ctx, 'uncertainty', _top_scores(ctx.unlabeled(), entropies, k))


def select_coreset_greedy(ctx: SelectionContext, representation: str = 'final') -> Selection:
    k = ctx.check_request(ctx.request_size)
    if k == 0:
        return _selection(ctx, 'coreset', [])

    fallback = ctx.previous_model is None
    if fallback:
        logger.debug("coreset: no previous model, running K-Center over the raw features")
        points = ctx.dataset.features.values
    else:
        points = ctx.predictor().representations(representation)

    result = kcenter_greedy(points, initial=ctx.current_pool, b=k, seed=ctx.seed)
    return _selection(ctx, 'coreset', result.added, fallback=fallback)


def select_featprop(ctx: SelectionContext) -> Selection:
    k = ctx.check_request(ctx.request_size)
    if k == 0:
        return _selection(ctx, 'featprop', [])
    result = kmedoids_approx(ctx.propagated, b=k, seed=ctx.seed, exclude=ctx.current_pool)
    return _selection(ctx, 'featprop', result.added)


def select_featprop_kcenter(ctx: SelectionContext) -> Selection:
    k = ctx.check_request(ctx.request_size)
    if k == 0:
        return _selection(ctx, 'featprop-kcenter', [])
    result = kcenter_greedy(ctx.propagated, initial=ctx.current_pool, b=k, seed=ctx.seed)
    return _selection(ctx, 'featprop-kcenter', result.added)


def select_netrep_kmedoids(ctx: SelectionContext, representation: str = 'final') -> Selection:
    k = ctx.check_request(ctx.request_size)
    if k == 0:
        return _selection(ctx, 'netrep-kmedoids', [])

    fallback = ctx.previous_model is None
    if fallback:
        logger.debug("netrep-kmedoids: no previous model, clustering the raw features")
        points = PropagatedFeatures(ctx.dataset.features.values, k_steps=0)
    else:
        points = PropagatedFeatures(ctx.predictor().representations(representation))

    result = kmedoids_approx(points, b=k, seed=ctx.seed, exclude=ctx.current_pool)
    return _selection(ctx, 'netrep-kmedoids', result.added, fallback=fallback)


class SelectionStrategy(ABC):
    """
    :cvar incremental: grow the previous pool (True) or reselect from the initial pool at every budget (False)
    :cvar requires_model: uses the model trained at the previous budget when there is one
    """

    name: str = None
    incremental: bool = True
    requires_model: bool = False

    @abstractmethod
    def select(self, ctx: SelectionContext) -> Selection:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}()"


@register_as('random')
class RandomStrategy(SelectionStrategy):
    name = 'random'

    def select(self, ctx: SelectionContext) -> Selection:
        return select_random(ctx)


@register_as('degree')
class DegreeStrategy(SelectionStrategy):
    name = 'degree'

    def select(self, ctx: SelectionContext) -> Selection:
        return select_degree(ctx)


@register_as('uncertainty')
class UncertaintyStrategy(SelectionStrategy):
    name = 'uncertainty'
    requires_model = True

    def select(self, ctx: SelectionContext) -> Selection:
        return select_uncertainty(ctx)


class RepresentationStrategy(SelectionStrategy, ABC):

    def __init__(self, representation: str = 'final'):
        if representation not in REPRESENTATIONS:
            raise ValueError(f"Unknown representation `{representation}`, expected one of {', '.join(REPRESENTATIONS)}")
        self.representation: str = representation

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(representation={self.representation})"


@register_as('coreset')
class CoresetGreedyStrategy(RepresentationStrategy):
    name = 'coreset'
    requires_model = True

    def select(self, ctx: SelectionContext) -> Selection:
        return select_coreset_greedy(ctx, self.representation)


@register_as('featprop')
class FeatPropStrategy(SelectionStrategy):
    name = 'featprop'
    incremental = False

    def select(self, ctx: SelectionContext) -> Selection:
        return select_featprop(ctx)


@register_as('featprop-kcenter')
class FeatPropKCenterStrategy(SelectionStrategy):
    name = 'featprop-kcenter'
    incremental = False

    def select(self, ctx: SelectionContext) -> Selection:
        return select_featprop_kcenter(ctx)


@register_as('netrep-kmedoids')
class NetRepKMedoidsStrategy(RepresentationStrategy):
    name = 'netrep-kmedoids'
    incremental = False
    requires_model = True

    def select(self, ctx: SelectionContext) -> Selection:
        return select_netrep_kmedoids(ctx, self.representation)
