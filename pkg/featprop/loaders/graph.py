"""
Graph data model: the undirected graph, its node features and labels, and the normalized adjacency S used by both
feature propagation and the GCN.
"""
import logging
from typing import Iterable, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from featprop.common.exceptions import DatasetIntegrityError, check_shape
from featprop.loaders.vocabulary import Vocabulary

logger = logging.getLogger(__name__)


class Graph:
    """
    Immutable undirected graph stored in CSR form. Edges are deduplicated, self-loops are dropped and the
    adjacency is symmetric with strictly increasing column indices in every row.
    """

    def __init__(self, n_nodes: int, edges: Iterable[Tuple[int, int]] = ()):

        if n_nodes < 0:
            raise DatasetIntegrityError(f"negative node count {n_nodes}")

        pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if pairs.size and (pairs.min() < 0 or pairs.max() >= n_nodes):
            raise DatasetIntegrityError(f"edge endpoint outside [0, {n_nodes})")

        loops = pairs[:, 0] == pairs[:, 1]
        if loops.any():
            logger.debug(f"dropping {int(loops.sum())} self-loops")
        pairs = pairs[~loops]
        pairs = np.sort(pairs, axis=1)
        pairs = np.unique(pairs, axis=0) if pairs.size else pairs

        self.n_nodes: int = int(n_nodes)
        self.edges: np.ndarray = pairs
        self.edges.setflags(write=False)

        rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
        cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
        adjacency = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n_nodes, n_nodes))
        adjacency.sum_duplicates()
        adjacency.sort_indices()
        self.adjacency: sp.csr_matrix = adjacency

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def row_offsets(self) -> np.ndarray:
        return self.adjacency.indptr

    @property
    def column_indices(self) -> np.ndarray:
        return self.adjacency.indices

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr).astype(np.int64)

    def neighbors(self, node: int) -> np.ndarray:
        start, end = self.adjacency.indptr[node], self.adjacency.indptr[node + 1]
        return self.adjacency.indices[start:end]

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n_nodes == other.n_nodes and np.array_equal(self.edges, other.edges)

    def __repr__(self) -> str:
        return f"Graph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"


class FeatureMatrix:
    """
    Dense n x d node features, row i is x_i
    """

    def __init__(self, values: np.ndarray):
        values = np.array(values, dtype=np.float64, copy=True)
        if values.ndim != 2:
            raise DatasetIntegrityError(f"features must be a 2-d matrix, got {values.ndim} dimensions")
        if not np.isfinite(values).all():
            raise DatasetIntegrityError("features contain non-finite entries")
        values.setflags(write=False)
        self.values: np.ndarray = values

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    def row_normalized(self) -> "FeatureMatrix":
        """
        Scale each row to unit L1 norm; all-zero rows are kept as is
        """
        norms = np.abs(self.values).sum(axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        return FeatureMatrix(self.values / norms)

    def __eq__(self, other) -> bool:
        return isinstance(other, FeatureMatrix) and np.array_equal(self.values, other.values)


class LabelVector:

    def __init__(self, labels: Iterable[int], n_classes: int):
        labels = np.array(list(labels) if not isinstance(labels, np.ndarray) else labels, dtype=np.int64)
        if n_classes < 2:
            raise DatasetIntegrityError(f"at least 2 classes are required, got {n_classes}")
        if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
            raise DatasetIntegrityError(f"labels must lie in [0, {n_classes})")
        labels.setflags(write=False)
        self.labels: np.ndarray = labels
        self.n_classes: int = int(n_classes)

    def __len__(self) -> int:
        return len(self.labels)

    def __eq__(self, other) -> bool:
        return isinstance(other, LabelVector) and self.n_classes == other.n_classes and np.array_equal(self.labels, other.labels)


class Dataset:

    def __init__(self, graph: Graph, features: FeatureMatrix, labels: LabelVector, name: str = "dataset",
                 node_vocab: Optional[Vocabulary] = None, label_vocab: Optional[Vocabulary] = None,
                 row_normalized: bool = False):

        if features.rows != graph.n_nodes:
            raise DatasetIntegrityError(f"{features.rows} feature rows for {graph.n_nodes} nodes")
        if len(labels) != graph.n_nodes:
            raise DatasetIntegrityError(f"{len(labels)} labels for {graph.n_nodes} nodes")

        self.graph: Graph = graph
        self.features: FeatureMatrix = features
        self.labels: LabelVector = labels
        self.name: str = name
        self.node_vocab: Optional[Vocabulary] = node_vocab
        self.label_vocab: Optional[Vocabulary] = label_vocab
        self.row_normalized: bool = row_normalized

    @property
    def n_nodes(self) -> int:
        return self.graph.n_nodes

    @property
    def n_classes(self) -> int:
        return self.labels.n_classes

    def __eq__(self, other) -> bool:
        return (isinstance(other, Dataset) and self.graph == other.graph and self.features == other.features
                and self.labels == other.labels)

    def __repr__(self) -> str:
        return (f"Dataset(name={self.name}, n_nodes={self.n_nodes}, n_edges={self.graph.n_edges}, "
                f"n_classes={self.n_classes}, n_features={self.features.cols})")


class NormalizedAdjacency:
    """
    S = (I+D)^{-1/2} (A+I) (I+D)^{-1/2}, stored in CSR with sorted column indices
    """

    def __init__(self, matrix: sp.csr_matrix):
        matrix = sp.csr_matrix(matrix, dtype=np.float64)
        matrix.sort_indices()
        self.matrix: sp.csr_matrix = matrix

    @property
    def n_nodes(self) -> int:
        return self.matrix.shape[0]

    def spmm(self, dense: np.ndarray) -> np.ndarray:
        return spmm(self, dense)

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()


def normalized_adjacency(graph: Graph) -> NormalizedAdjacency:

    with_loops = (graph.adjacency + sp.identity(graph.n_nodes, format='csr')).tocsr()
    with_loops.sort_indices()

    inv_sqrt = 1.0 / np.sqrt(graph.degrees + 1.0)
    rows = np.repeat(np.arange(graph.n_nodes), np.diff(with_loops.indptr))
    data = inv_sqrt[rows] * inv_sqrt[with_loops.indices]

    matrix = sp.csr_matrix((data, with_loops.indices.copy(), with_loops.indptr.copy()),
                           shape=(graph.n_nodes, graph.n_nodes))
    return NormalizedAdjacency(matrix)


def spmm(adjacency: NormalizedAdjacency, dense: np.ndarray) -> np.ndarray:
    """
    Sparse-dense product S.M. Each output row is summed in ascending column order.
    """
    dense = np.asarray(dense, dtype=np.float64)
    if dense.ndim == 1:
        check_shape('spmm', (adjacency.n_nodes,), dense.shape)
    else:
        check_shape('spmm', (adjacency.n_nodes, None), dense.shape)
    return np.asarray(adjacency.matrix @ dense)
