import logging
from typing import Any, Dict, List

import numpy as np
import torch

from featprop.loaders.graph import Dataset
from featprop.plugins.config import REPRESENTATIONS
from featprop.plugins.models import ForwardCache, GcnModel, GraphInputs

logger = logging.getLogger(__name__)


class GcnPredictor:
    """
    Inference on a trained model: probabilities, labels, entropies and node representations for every node.
    The forward pass runs once, on first use.
    """

    def __init__(self, model: GcnModel, inputs: GraphInputs):

        self.model: GcnModel = model
        self.model.eval()
        self.inputs: GraphInputs = inputs
        self._cache: ForwardCache = None

    def forward(self) -> ForwardCache:
        """
        Do the forward pass
        """
        if self._cache is None:
            with torch.no_grad():
                self._cache = self.model.run(self.inputs)
        return self._cache

    def probabilities(self) -> np.ndarray:
        return self.forward().probabilities.numpy()

    def predict(self) -> np.ndarray:
        """
        Most probable class per node, ties to the lowest class index
        """
        return self.probabilities().argmax(axis=1)

    def entropies(self) -> np.ndarray:
        """
        -sum_c p_c ln p_c per node, with 0 ln 0 = 0
        """
        p = self.probabilities()
        logs = np.zeros_like(p)
        np.log(p, out=logs, where=p > 0)
        return -(p * logs).sum(axis=1)

    def representations(self, kind: str = 'final') -> np.ndarray:
        """
        :param kind: `final` is the input of the last linear layer (S H for gcn), `hidden` is the first layer output H;
               both are (S^2 X) theta_0 for sgc
        """
        if kind not in REPRESENTATIONS:
            raise ValueError(f"Unknown representation `{kind}`, expected one of {', '.join(REPRESENTATIONS)}")
        cache = self.forward()
        return (cache.final if kind == 'final' else cache.hidden).numpy()

    def output_to_json(self, dataset: Dataset = None) -> List[Dict[str, Any]]:
        """
        One entry per node, with the original node ids and label names when `dataset` has vocabularies
        """
        node_vocab = dataset.node_vocab if dataset is not None else None
        label_vocab = dataset.label_vocab if dataset is not None else None
        output = []
        for node, (label, probabilities) in enumerate(zip(self.predict(), self.probabilities())):
            output.append({
                'node': node_vocab.lookup_index(node) if node_vocab else node,
                'label': label_vocab.lookup_index(int(label)) if label_vocab and label < len(label_vocab) else int(label),
                'probability': float(probabilities[label])})
        return output
