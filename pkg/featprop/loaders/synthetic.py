import logging
from typing import Sequence

import numpy as np

from featprop.loaders.graph import Dataset, FeatureMatrix, Graph, LabelVector

logger = logging.getLogger(__name__)


def generate_sbm(blocks: Sequence[int], p_in: float, p_out: float, feature_noise: float = 0.0, seed: int = 0,
                 name: str = None) -> Dataset:
    """
    Sample a stochastic block model graph. Node labels are block ids, features are one-hot(block) plus
    gaussian noise of stddev `feature_noise`.

    :param blocks: block sizes, at least 2 blocks
    :param p_in: probability of an edge between two nodes of the same block
    :param p_out: probability of an edge across blocks
    :param feature_noise: stddev of the gaussian noise added to the features
    :param seed: the dataset is a pure function of the arguments
    :param name: dataset name
    :return: the dataset, nodes numbered block by block
    """
    if len(blocks) < 2:
        raise ValueError(f"At least 2 blocks are needed, got {len(blocks)}")
    if any(size < 1 for size in blocks):
        raise ValueError(f"Block sizes must be positive, got {list(blocks)}")
    for p_name, p in (('p_in', p_in), ('p_out', p_out)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{p_name} must be a probability, got {p}")
    if feature_noise < 0:
        raise ValueError(f"feature_noise must be non-negative, got {feature_noise}")

    rng = np.random.default_rng(seed)
    membership = np.repeat(np.arange(len(blocks)), blocks)
    n_nodes = len(membership)

    rows, cols = np.triu_indices(n_nodes, k=1)
    probabilities = np.where(membership[rows] == membership[cols], p_in, p_out)
    keep = rng.random(len(rows)) < probabilities
    edges = np.stack([rows[keep], cols[keep]], axis=1)

    features = np.eye(len(blocks))[membership] + rng.normal(0.0, feature_noise, size=(n_nodes, len(blocks)))

    dataset = Dataset(graph=Graph(n_nodes=n_nodes, edges=edges),
                      features=FeatureMatrix(features),
                      labels=LabelVector(membership, n_classes=len(blocks)),
                      name=name or f"sbm-{'x'.join(str(b) for b in blocks)}-seed{seed}")
    logger.debug(f"Generated {dataset}")
    return dataset
