import itertools
import unittest

import numpy as np

from featprop.common.exceptions import DatasetIntegrityError, DimensionMismatchError
from featprop.loaders.graph import Dataset, FeatureMatrix, Graph, LabelVector, normalized_adjacency, spmm
from featprop.loaders.synthetic import generate_sbm


def path_graph(n: int) -> Graph:
    return Graph(n_nodes=n, edges=[(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph(n_nodes=n, edges=[(i, (i + 1) % n) for i in range(n)])


class GraphTest(unittest.TestCase):

    def test_edges_are_symmetrized_and_deduplicated(self):
        graph = Graph(n_nodes=4, edges=[(1, 0), (0, 1), (2, 3), (3, 3), (2, 3)])
        self.assertEqual(graph.n_edges, 2)
        self.assertEqual(graph.edges.tolist(), [[0, 1], [2, 3]])
        dense = graph.adjacency.toarray()
        np.testing.assert_array_equal(dense, dense.T)
        np.testing.assert_array_equal(np.diag(dense), np.zeros(4))
        np.testing.assert_array_equal(graph.degrees, [1, 1, 1, 1])
        np.testing.assert_array_equal(graph.neighbors(2), [3])

    def test_column_indices_are_strictly_increasing(self):
        graph = Graph(n_nodes=5, edges=[(4, 0), (2, 0), (0, 1), (3, 0)])
        for node in range(graph.n_nodes):
            neighbors = graph.neighbors(node)
            self.assertTrue(np.all(np.diff(neighbors) > 0))
        np.testing.assert_array_equal(graph.neighbors(0), [1, 2, 3, 4])

    def test_invalid_edges(self):
        with self.assertRaises(DatasetIntegrityError):
            Graph(n_nodes=2, edges=[(0, 2)])
        with self.assertRaises(DatasetIntegrityError):
            Graph(n_nodes=2, edges=[(-1, 0)])

    def test_dataset_consistency(self):
        graph = path_graph(3)
        with self.assertRaises(DatasetIntegrityError):
            Dataset(graph, FeatureMatrix(np.ones((2, 2))), LabelVector([0, 1, 0], n_classes=2))
        with self.assertRaises(DatasetIntegrityError):
            Dataset(graph, FeatureMatrix(np.ones((3, 2))), LabelVector([0, 1], n_classes=2))
        with self.assertRaises(DatasetIntegrityError):
            LabelVector([0, 2], n_classes=2)
        with self.assertRaises(DatasetIntegrityError):
            LabelVector([0, 0], n_classes=1)
        with self.assertRaises(DatasetIntegrityError):
            FeatureMatrix(np.array([[1.0, np.nan]]))

    def test_row_normalized(self):
        features = FeatureMatrix(np.array([[1.0, 3.0], [0.0, 0.0], [-2.0, 2.0]]))
        normalized = features.row_normalized().values
        np.testing.assert_allclose(normalized, [[0.25, 0.75], [0.0, 0.0], [-0.5, 0.5]])


class NormalizedAdjacencyTest(unittest.TestCase):

    def test_single_isolated_node(self):
        adjacency = normalized_adjacency(Graph(n_nodes=1))
        np.testing.assert_array_equal(adjacency.to_dense(), [[1.0]])

    def test_single_edge(self):
        adjacency = normalized_adjacency(Graph(n_nodes=2, edges=[(0, 1)]))
        np.testing.assert_allclose(adjacency.to_dense(), [[0.5, 0.5], [0.5, 0.5]], atol=1e-15)

    def test_path(self):
        dense = normalized_adjacency(path_graph(3)).to_dense()
        self.assertAlmostEqual(dense[0, 0], 0.5, places=15)
        self.assertAlmostEqual(dense[0, 1], 1.0 / np.sqrt(6.0), places=15)
        self.assertAlmostEqual(dense[1, 1], 1.0 / 3.0, places=15)
        self.assertAlmostEqual(dense[2, 2], 0.5, places=15)
        self.assertEqual(dense[0, 2], 0.0)

    def test_closed_form_on_random_graphs(self):
        for seed in range(5):
            dataset = generate_sbm([10, 15], p_in=0.3, p_out=0.05, seed=seed)
            graph = dataset.graph
            dense = normalized_adjacency(graph).to_dense()
            np.testing.assert_allclose(dense, dense.T, atol=1e-12)
            self.assertTrue(np.all(np.diag(dense) > 0))

            degrees = graph.degrees
            pattern = graph.adjacency.toarray() + np.eye(graph.n_nodes)
            expected = pattern / np.sqrt(np.outer(degrees + 1.0, degrees + 1.0))
            np.testing.assert_allclose(dense, expected, atol=1e-12)

    def test_regular_graph_rows_sum_to_one(self):
        for graph in (cycle_graph(7), Graph(n_nodes=5, edges=itertools.combinations(range(5), 2))):
            adjacency = normalized_adjacency(graph)
            np.testing.assert_allclose(adjacency.to_dense().sum(axis=1), np.ones(graph.n_nodes), atol=1e-12)
            constant = np.full((graph.n_nodes, 1), 3.5)
            np.testing.assert_allclose(spmm(adjacency, constant), constant, atol=1e-12)


class SpmmTest(unittest.TestCase):

    def test_identity_pattern(self):
        adjacency = normalized_adjacency(Graph(n_nodes=3))
        matrix = np.arange(6, dtype=np.float64).reshape(3, 2)
        np.testing.assert_array_equal(spmm(adjacency, matrix), matrix)

    def test_single_edge(self):
        adjacency = normalized_adjacency(Graph(n_nodes=2, edges=[(0, 1)]))
        np.testing.assert_allclose(spmm(adjacency, np.eye(2)), [[0.5, 0.5], [0.5, 0.5]], atol=1e-15)

    def test_zeros(self):
        adjacency = normalized_adjacency(path_graph(4))
        np.testing.assert_array_equal(adjacency.spmm(np.zeros((4, 3))), np.zeros((4, 3)))

    def test_matches_dense_product(self):
        dataset = generate_sbm([8, 8], p_in=0.5, p_out=0.1, seed=3)
        adjacency = normalized_adjacency(dataset.graph)
        matrix = np.random.default_rng(0).normal(size=(16, 4))
        np.testing.assert_allclose(spmm(adjacency, matrix), adjacency.to_dense() @ matrix, atol=1e-12)

    def test_dimension_mismatch(self):
        adjacency = normalized_adjacency(path_graph(3))
        with self.assertRaises(DimensionMismatchError):
            spmm(adjacency, np.ones((4, 2)))


if __name__ == '__main__':
    unittest.main()
