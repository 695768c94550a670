"""
Clustering over node representations: Lloyd's K-Means with k-means++ seeding, the approximate K-Medoids obtained
by snapping K-Means centroids to real nodes, farthest-first K-Center, and the two objectives they are judged by.

All ties are broken by the lowest index (node index for candidates, center rank for assignments).
"""
import logging
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np
from scipy.spatial.distance import cdist

from featprop.common.exceptions import EmptySelectionError, InfeasibleClusteringError
from featprop.common.utils import derive_seed
from featprop.propagation.propagation import PropagatedFeatures, min_distances_to_set

logger = logging.getLogger(__name__)

MAX_ITER = 300
TOL = 1e-6
# K-Means restarts of the approximate K-Medoids, the best medoid set is kept
N_INIT = 3


class ClusterResult:
    """
    Outcome of a clustering run.

    `centers` holds node indices for medoid/center methods and a (b, d) centroid matrix for K-Means.
    `added` lists the centers chosen by this run, i.e. `centers` minus any initial centers.
    `inertia_history` is the K-Means sum of squared distances after every assignment step.
    """

    def __init__(self, centers: Union[List[int], np.ndarray], assignment: np.ndarray, objective: float,
                 added: Optional[List[int]] = None, inertia_history: Optional[List[float]] = None, n_iter: int = 0):
        self.centers: Union[List[int], np.ndarray] = centers
        self.assignment: np.ndarray = assignment
        self.objective: float = float(objective)
        self.added: List[int] = list(added) if added is not None else []
        self.inertia_history: List[float] = inertia_history or []
        self.n_iter: int = n_iter

    def __repr__(self) -> str:
        return f"ClusterResult(n_centers={len(self.centers)}, objective={self.objective:.6g}, n_iter={self.n_iter})"


def _as_points(points: Union[PropagatedFeatures, np.ndarray]) -> np.ndarray:
    matrix = points.matrix if isinstance(points, PropagatedFeatures) else np.asarray(points, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix.reshape(-1, 1)
    return matrix


def _n_distinct(points: np.ndarray) -> int:
    return len(np.unique(points, axis=0)) if len(points) else 0


def _assign(points: np.ndarray, centroids: np.ndarray):
    sq = cdist(points, centroids, metric='sqeuclidean')
    assignment = np.argmin(sq, axis=1)
    return assignment, sq[np.arange(len(points)), assignment]


def _kmeans_plus_plus(points: np.ndarray, b: int, rng: np.random.Generator) -> np.ndarray:

    n = len(points)
    chosen = [int(rng.integers(n))]
    d2 = ((points - points[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, b):
        total = d2.sum()
        idx = int(rng.choice(n, p=d2 / total))
        chosen.append(idx)
        d2 = np.minimum(d2, ((points - points[idx]) ** 2).sum(axis=1))
    return points[chosen].copy()


def kmeans(points: Union[PropagatedFeatures, np.ndarray], b: int, seed: int = 0, max_iter: int = MAX_ITER,
           tol: float = TOL) -> ClusterResult:
    """
    Lloyd's algorithm with k-means++ seeding

    :param points: (n, d) points
    :param b: number of clusters, at most the number of distinct points
    :param seed: drives the k-means++ draws
    :param max_iter: maximum number of Lloyd iterations
    :param tol: stop when the Frobenius norm of the centroid shift is below `tol` times the norm of the centroids
        taken from the mean point, so that translating the points does not change the stopping step
    :return: centroids in `centers`; `objective` is the mean point-to-assigned-centroid distance
    """
    points = _as_points(points)
    if b < 1:
        raise ValueError(f"b must be positive, got {b}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be positive, got {max_iter}")
    n_distinct = _n_distinct(points)
    if b > n_distinct:
        raise InfeasibleClusteringError(requested=b, available=n_distinct)

    center_of_mass = points.mean(axis=0)
    rng = np.random.default_rng(seed)
    centroids = _kmeans_plus_plus(points, b, rng)
    assignment, sq = _assign(points, centroids)
    history = [float(sq.sum())]

    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        updated = centroids.copy()
        counts = np.bincount(assignment, minlength=b)
        for c in np.flatnonzero(counts):
            updated[c] = points[assignment == c].mean(axis=0)

        # empty cluster: move its centroid onto the point farthest from its own centroid
        for c in np.flatnonzero(counts == 0):
            far = int(np.argmax(sq))
            logger.debug(f"k-means: reseeding empty cluster {c} at point {far}")
            updated[c] = points[far]
            sq[far] = 0.0

        shift = np.linalg.norm(updated - centroids)
        scale = max(np.linalg.norm(centroids - center_of_mass), np.finfo(np.float64).tiny)
        centroids = updated
        assignment, sq = _assign(points, centroids)

        inertia = float(sq.sum())
        assert inertia <= history[-1] * (1.0 + 1e-9) + 1e-12, \
            f"k-means inertia increased from {history[-1]} to {inertia} at iteration {n_iter}"
        history.append(inertia)

        if shift <= tol * scale:
            break

    objective = float(np.linalg.norm(points - centroids[assignment], axis=1).mean())
    logger.debug(f"k-means: b={b} converged after {n_iter} iterations, objective={objective:.6g}")
    return ClusterResult(centers=centroids, assignment=assignment, objective=objective,
                         inertia_history=history, n_iter=n_iter)


def _assign_to_nodes(points: np.ndarray, centers: Sequence[int]) -> np.ndarray:
    return np.argmin(cdist(points, points[list(centers)], metric='euclidean'), axis=1)


def _snap_to_nodes(points: np.ndarray, centroids: np.ndarray, b: int, excluded: set) -> List[int]:
    """
    Nearest free node of every centroid, round-robin over the centroids until b nodes are taken
    """
    orders = np.argsort(cdist(centroids, points, metric='euclidean'), axis=1, kind='stable')
    used = set(excluded)
    pointers = [0] * len(orders)
    medoids: List[int] = []
    rank = 0
    while len(medoids) < b:
        c = rank % len(orders)
        while int(orders[c, pointers[c]]) in used:
            pointers[c] += 1
        node = int(orders[c, pointers[c]])
        used.add(node)
        medoids.append(node)
        rank += 1
    return medoids


def kmedoids_approx(features: Union[PropagatedFeatures, np.ndarray], b: int, seed: int = 0,
                    exclude: Iterable[int] = (), max_iter: int = MAX_ITER, tol: float = TOL,
                    n_init: int = N_INIT) -> ClusterResult:
    """
    Approximate K-Medoids: run K-Means, then replace every centroid by its nearest node.

    Nodes in `exclude` (e.g. already labeled ones) and nodes already taken by a lower-ranked centroid are skipped,
    the next-nearest node is used instead. When there are fewer distinct points than `b`, K-Means runs with as many
    clusters as distinct points and the remaining medoids are taken round-robin over the centroids.

    :param features: node representations
    :param b: number of medoids
    :param seed: K-Means seed of the first run, later runs use seeds derived from it
    :param exclude: nodes that cannot become medoids
    :param n_init: number of K-Means runs; the medoids with the smallest objective win, ties to the earliest run
    :return: medoid node indices in `centers` (centroid rank order); objective = kmedoids_objective(centers)
    """
    points = _as_points(features)
    n = len(points)
    excluded = set(int(v) for v in exclude)
    if b < 1:
        raise ValueError(f"b must be positive, got {b}")
    if n_init < 1:
        raise ValueError(f"n_init must be positive, got {n_init}")
    if b > n - len(excluded):
        raise InfeasibleClusteringError(requested=b, available=n - len(excluded))

    wrapped = features if isinstance(features, PropagatedFeatures) else PropagatedFeatures(points)
    n_clusters = min(b, _n_distinct(points))
    best = None
    for run in range(n_init):
        run_seed = seed if run == 0 else derive_seed(seed, run)
        clustering = kmeans(points, n_clusters, seed=run_seed, max_iter=max_iter, tol=tol)
        medoids = _snap_to_nodes(points, clustering.centers, b, excluded)
        objective = kmedoids_objective(wrapped, medoids)
        if best is None or objective < best[0]:
            best = (objective, medoids, clustering)

    objective, medoids, clustering = best
    return ClusterResult(centers=medoids,
                         assignment=_assign_to_nodes(points, medoids),
                         objective=objective,
                         added=medoids,
                         inertia_history=clustering.inertia_history,
                         n_iter=clustering.n_iter)


def kcenter_greedy(features: Union[PropagatedFeatures, np.ndarray], initial: Iterable[int], b: int,
                   seed: int = 0) -> ClusterResult:
    """
    Farthest-first traversal: starting from `initial`, repeatedly add the node farthest from its nearest center.
    With an empty `initial` the first center is drawn uniformly at random and counts towards `b`.

    :return: `centers` = initial centers followed by the added ones; objective = cover radius max_i min_j d(i, j)
    """
    points = _as_points(features)
    n = len(points)
    initial = sorted(set(int(v) for v in initial))
    if b < 0:
        raise ValueError(f"b must be non-negative, got {b}")
    if b + len(initial) > n:
        raise InfeasibleClusteringError(requested=b + len(initial), available=n)
    if b == 0 and not initial:
        raise EmptySelectionError('kcenter_greedy')

    centers = list(initial)
    added: List[int] = []
    chosen = np.zeros(n, dtype=bool)
    if initial:
        chosen[initial] = True
        min_distance = min_distances_to_set(PropagatedFeatures(points), initial)
    else:
        first = int(np.random.default_rng(seed).integers(n))
        centers.append(first)
        added.append(first)
        chosen[first] = True
        min_distance = np.linalg.norm(points - points[first], axis=1)

    while len(added) < b:
        candidate = int(np.argmax(np.where(chosen, -np.inf, min_distance)))
        centers.append(candidate)
        added.append(candidate)
        chosen[candidate] = True
        min_distance = np.minimum(min_distance, np.linalg.norm(points - points[candidate], axis=1))
        min_distance[candidate] = 0.0

    return ClusterResult(centers=centers,
                         assignment=_assign_to_nodes(points, centers),
                         objective=float(min_distance.max()),
                         added=added)


def kmedoids_objective(features: PropagatedFeatures, nodes: Iterable[int]) -> float:
    """
    Mean over all nodes of the distance to the nearest node of `nodes`
    """
    nodes = list(nodes)
    if not nodes:
        raise EmptySelectionError('kmedoids_objective')
    return float(min_distances_to_set(features, nodes).mean())


def kcenter_objective(features: PropagatedFeatures, nodes: Iterable[int]) -> float:
    """
    Max over all nodes of the distance to the nearest node of `nodes` (the cover radius)
    """
    nodes = list(nodes)
    if not nodes:
        raise EmptySelectionError('kcenter_objective')
    return float(min_distances_to_set(features, nodes).max())
