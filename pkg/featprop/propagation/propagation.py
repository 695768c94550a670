"""
K-step feature propagation S^K X and the distance between propagated node features.

Distances are computed on demand against a subset of nodes; the full n x n distance matrix is never materialized.
"""
import logging
from typing import Iterable, Union

import numpy as np
from scipy.spatial.distance import cdist

from featprop.common.exceptions import EmptySelectionError, NodeIndexError, check_shape
from featprop.loaders.graph import FeatureMatrix, NormalizedAdjacency, spmm

logger = logging.getLogger(__name__)

# rows of the query block handed to cdist at once
ROW_CHUNK = 4096


class PropagatedFeatures:
    """
    Dense n x d matrix S^K X. With k_steps == 0 the matrix is X itself.
    Also used to wrap any point cloud over the nodes (e.g. learned representations) with k_steps = 0.
    """

    def __init__(self, matrix: np.ndarray, k_steps: int = 0):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim == 1:
            matrix = matrix.reshape(-1, 1)
        if k_steps < 0:
            raise ValueError(f"k_steps must be non-negative, got {k_steps}")
        if not np.isfinite(matrix).all():
            raise ValueError("propagated features contain non-finite entries")
        self.matrix: np.ndarray = matrix
        self.k_steps: int = int(k_steps)

    @property
    def n_nodes(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self) -> str:
        return f"PropagatedFeatures(n_nodes={self.n_nodes}, dim={self.matrix.shape[1]}, k_steps={self.k_steps})"


def propagate(adjacency: NormalizedAdjacency, features: Union[FeatureMatrix, np.ndarray], k_steps: int = 2) -> PropagatedFeatures:
    """
    Apply S to X `k_steps` times, without any intermediate normalization
    """
    if k_steps < 0:
        raise ValueError(f"k_steps must be non-negative, got {k_steps}")
    values = features.values if isinstance(features, FeatureMatrix) else np.asarray(features, dtype=np.float64)
    check_shape('propagate', (adjacency.n_nodes, None), values.shape)

    matrix = np.array(values, dtype=np.float64, copy=True)
    for _ in range(k_steps):
        matrix = spmm(adjacency, matrix)
    logger.debug(f"propagated features over {k_steps} steps")
    return PropagatedFeatures(matrix, k_steps=k_steps)


def _check_index(features: PropagatedFeatures, index: int) -> int:
    if not 0 <= index < features.n_nodes:
        raise NodeIndexError(index=index, n_nodes=features.n_nodes)
    return int(index)


def pair_distance(features: PropagatedFeatures, i: int, j: int) -> float:
    """
    ||(S^K X)_i - (S^K X)_j||_2
    """
    i, j = _check_index(features, i), _check_index(features, j)
    return float(np.linalg.norm(features.matrix[i] - features.matrix[j]))


def min_distances_to_set(features: PropagatedFeatures, nodes: Iterable[int]) -> np.ndarray:
    """
    For every node, the distance to the closest node of `nodes`
    """
    nodes = np.array(sorted(set(int(v) for v in nodes)), dtype=np.int64)
    if len(nodes) == 0:
        raise EmptySelectionError('min_distances_to_set')
    for v in nodes:
        _check_index(features, v)

    centers = features.matrix[nodes]
    result = np.empty(features.n_nodes, dtype=np.float64)
    for start in range(0, features.n_nodes, ROW_CHUNK):
        block = features.matrix[start:start + ROW_CHUNK]
        result[start:start + ROW_CHUNK] = cdist(block, centers, metric='euclidean').min(axis=1)
    result[nodes] = 0.0
    return result
