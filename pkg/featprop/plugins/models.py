"""
Two-layer GCN and SGC with a hand-written backward pass, in double precision.

    gcn:  H = ReLU(S X theta_0),  logits = (S H) theta_1
    sgc:  logits = (S^2 X) theta_0 theta_1

Products with S always go through the sparse kernel of `featprop.loaders.graph`, and S X / S^2 X are computed once per
dataset (`GraphInputs`) and shared by every model trained on it.
"""
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, NamedTuple, Tuple, Union

import numpy as np
import torch
import torch.nn as nn
from smart_open import open

from featprop.common.exceptions import DatasetIntegrityError, DimensionMismatchError, EmptySelectionError, TrainingError
from featprop.loaders.graph import FeatureMatrix, LabelVector, NormalizedAdjacency, spmm
from featprop.plugins.config import MODEL_VARIANTS, register_plugin
from featprop.plugins.regularizers import L2, RegularizerABC

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = 'featprop-gcn'
CHECKPOINT_VERSION = 1


class GraphInputs:
    """
    S, S X and S^2 X for one dataset
    """

    def __init__(self, adjacency: NormalizedAdjacency, features: Union[FeatureMatrix, np.ndarray]):

        values = features.values if isinstance(features, FeatureMatrix) else np.asarray(features, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != adjacency.n_nodes:
            raise DimensionMismatchError(operation='forward', expected=(adjacency.n_nodes, 'd'), actual=values.shape)

        self.adjacency: NormalizedAdjacency = adjacency
        sx = spmm(adjacency, values)
        self.sx: torch.Tensor = torch.from_numpy(sx)
        self.ssx: torch.Tensor = torch.from_numpy(spmm(adjacency, sx))

    @property
    def n_nodes(self) -> int:
        return self.sx.shape[0]

    @property
    def n_features(self) -> int:
        return self.sx.shape[1]

    def propagate(self, dense: torch.Tensor) -> torch.Tensor:
        """
        S . dense
        """
        return torch.from_numpy(spmm(self.adjacency, dense.detach().numpy()))


class ForwardCache(NamedTuple):
    pre_activation: torch.Tensor
    hidden: torch.Tensor
    final: torch.Tensor
    logits: torch.Tensor
    probabilities: torch.Tensor


def softmax(logits: torch.Tensor) -> torch.Tensor:
    shifted = logits - logits.max(dim=1, keepdim=True).values
    exp = torch.exp(shifted)
    return exp / exp.sum(dim=1, keepdim=True)


def log_softmax(logits: torch.Tensor) -> torch.Tensor:
    shifted = logits - logits.max(dim=1, keepdim=True).values
    return shifted - torch.log(torch.exp(shifted).sum(dim=1, keepdim=True))


def glorot_uniform(fan_in: int, fan_out: int, generator: torch.Generator) -> torch.Tensor:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return (torch.rand(fan_in, fan_out, generator=generator, dtype=torch.float64) * 2.0 - 1.0) * bound


@register_plugin
class GcnModel(nn.Module):
    """
    Parameters are plain tensors updated by `featprop.plugins.optimizers.adam_step`; autograd is never used.

    :param linear: replace the ReLU by the identity; a linear gcn computes exactly what sgc computes
    """

    def __init__(self, n_features: int, n_classes: int, hidden_size: int = 16, variant: str = 'gcn',
                 linear: bool = False, seed: int = 0):

        super().__init__()
        if variant not in MODEL_VARIANTS:
            raise ValueError(f"Unknown model variant `{variant}`, expected one of {', '.join(MODEL_VARIANTS)}")
        if n_features < 1 or hidden_size < 1 or n_classes < 2:
            raise ValueError(f"Invalid model shape d={n_features}, h={hidden_size}, C={n_classes}")

        self.variant: str = variant
        self.linear: bool = linear
        self.hidden_size: int = hidden_size
        self.theta_0 = nn.Parameter(torch.zeros(n_features, hidden_size, dtype=torch.float64), requires_grad=False)
        self.theta_1 = nn.Parameter(torch.zeros(hidden_size, n_classes, dtype=torch.float64), requires_grad=False)
        self.reset_parameters(seed)

    @property
    def n_features(self) -> int:
        return self.theta_0.shape[0]

    @property
    def n_classes(self) -> int:
        return self.theta_1.shape[1]

    def reset_parameters(self, seed: int):
        generator = torch.Generator()
        generator.manual_seed(int(seed))
        self.theta_0.data = glorot_uniform(self.n_features, self.hidden_size, generator)
        self.theta_1.data = glorot_uniform(self.hidden_size, self.n_classes, generator)

    def parameter_dict(self) -> Dict[str, torch.Tensor]:
        return {name: parameter.data for name, parameter in self.named_parameters()}

    def load_parameter_dict(self, values: Dict[str, torch.Tensor]):
        for name, parameter in self.named_parameters():
            if tuple(values[name].shape) != tuple(parameter.shape):
                raise DimensionMismatchError(operation=f'load {name}', expected=tuple(parameter.shape),
                                             actual=tuple(values[name].shape))
            parameter.data = values[name].to(torch.float64)

    def check_finite(self, epoch: int = None):
        for name, parameter in self.named_parameters():
            if not torch.isfinite(parameter.data).all():
                raise TrainingError(epoch=epoch, reason=f"non-finite values in {name}")

    def run(self, inputs: GraphInputs) -> ForwardCache:

        if inputs.n_features != self.n_features:
            raise DimensionMismatchError(operation='forward', expected=(inputs.n_nodes, self.n_features),
                                         actual=(inputs.n_nodes, inputs.n_features))
        self.check_finite()

        if self.variant == 'sgc':
            pre_activation = inputs.ssx @ self.theta_0
            hidden = final = pre_activation
        else:
            pre_activation = inputs.sx @ self.theta_0
            hidden = pre_activation if self.linear else torch.relu(pre_activation)
            final = inputs.propagate(hidden)

        logits = final @ self.theta_1
        return ForwardCache(pre_activation=pre_activation, hidden=hidden, final=final, logits=logits,
                            probabilities=softmax(logits))

    def forward(self, inputs: GraphInputs) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """
        :return: (probabilities n x C, hidden n x h, logits n x C)
        """
        cache = self.run(inputs)
        return cache.probabilities, cache.hidden, cache.logits


def _train_index(train_idx: Iterable[int], n_nodes: int) -> torch.Tensor:
    index = sorted(set(int(v) for v in train_idx))
    if not index:
        raise EmptySelectionError('loss_and_gradients')
    if index[0] < 0 or index[-1] >= n_nodes:
        raise DatasetIntegrityError(f"training nodes outside [0, {n_nodes})")
    return torch.tensor(index, dtype=torch.long)


def loss_gradients_and_cache(model: GcnModel, inputs: GraphInputs, labels: LabelVector, train_idx: Iterable[int],
                             regularizer: RegularizerABC) -> Tuple[float, Dict[str, torch.Tensor], ForwardCache]:

    if len(labels) != inputs.n_nodes:
        raise DimensionMismatchError(operation='loss_and_gradients', expected=(inputs.n_nodes,), actual=(len(labels),))
    index = _train_index(train_idx, inputs.n_nodes)
    cache = model.run(inputs)

    targets = torch.from_numpy(np.array(labels.labels, dtype=np.int64))[index]
    m = len(index)
    rows = torch.arange(m)
    cross_entropy = -log_softmax(cache.logits[index])[rows, targets].mean()
    loss = float(cross_entropy) + regularizer.compute_penalty(model)

    d_logits = torch.zeros_like(cache.logits)
    residual = cache.probabilities[index].clone()
    residual[rows, targets] -= 1.0
    d_logits[index] = residual / m

    grad_theta_1 = cache.final.t() @ d_logits
    d_final = d_logits @ model.theta_1.data.t()
    if model.variant == 'sgc':
        grad_theta_0 = inputs.ssx.t() @ d_final
    else:
        # S is symmetric
        d_hidden = inputs.propagate(d_final)
        d_pre_activation = d_hidden if model.linear else d_hidden * (cache.pre_activation > 0).to(torch.float64)
        grad_theta_0 = inputs.sx.t() @ d_pre_activation

    grads = {'theta_0': grad_theta_0, 'theta_1': grad_theta_1}
    for name, gradient in regularizer.compute_gradients(model).items():
        grads[name] = grads[name] + gradient
    return loss, grads, cache


def loss_and_gradients(model: GcnModel, inputs: GraphInputs, labels: LabelVector, train_idx: Iterable[int],
                       weight_decay: float = 5e-4, decay_all_layers: bool = False) -> Tuple[float, Dict[str, torch.Tensor]]:
    """
    Mean softmax cross-entropy over `train_idx` plus (weight_decay / 2) * ||theta_0||_F^2, and its analytic gradient

    :return: (loss, {'theta_0': d loss / d theta_0, 'theta_1': d loss / d theta_1})
    """
    loss, grads, _ = loss_gradients_and_cache(model, inputs, labels, train_idx,
                                              L2(alpha=weight_decay / 2.0, all_layers=decay_all_layers))
    return loss, grads


def save_checkpoint(model: GcnModel, path: Union[str, Path]) -> Path:
    """
    json checkpoint: versioned header, model shape, then every parameter as a row-major list of values
    """
    path = Path(str(path)).expanduser()
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        'format': CHECKPOINT_FORMAT,
        'version': CHECKPOINT_VERSION,
        'variant': model.variant,
        'linear': model.linear,
        'hidden_size': model.hidden_size,
        'n_features': model.n_features,
        'n_classes': model.n_classes,
        'parameters': {name: {'shape': list(value.shape), 'values': value.reshape(-1).tolist()}
                       for name, value in model.parameter_dict().items()}}
    with open(str(path), 'w') as f:
        json.dump(payload, f)
    logger.info(f"Saved {model.variant} checkpoint to {path}")
    return path


def load_checkpoint(path: Union[str, Path]) -> GcnModel:

    with open(str(Path(str(path)).expanduser()), 'r') as f:
        payload = json.load(f)
    if payload.get('format') != CHECKPOINT_FORMAT or payload.get('version') != CHECKPOINT_VERSION:
        raise ValueError(f"{path} is not a {CHECKPOINT_FORMAT} v{CHECKPOINT_VERSION} checkpoint")

    model = GcnModel(n_features=payload['n_features'], n_classes=payload['n_classes'],
                     hidden_size=payload['hidden_size'], variant=payload['variant'], linear=payload['linear'])
    model.load_parameter_dict({
        name: torch.tensor(entry['values'], dtype=torch.float64).reshape(entry['shape'])
        for name, entry in payload['parameters'].items()})
    return model
