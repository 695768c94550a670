from typing import Dict, Iterator, Tuple

import torch

from featprop.plugins.config import register_plugin


class RegularizerABC:

    def __call__(self, parameter: torch.Tensor) -> torch.Tensor:
        raise NotImplementedError

    def __str__(self):
        raise NotImplementedError

    def gradient(self, parameter: torch.Tensor) -> torch.Tensor:
        raise NotImplementedError

    def compute_penalty(self, model: torch.nn.Module) -> float:
        raise NotImplementedError

    def compute_gradients(self, model: torch.nn.Module) -> Dict[str, torch.Tensor]:
        raise NotImplementedError


@register_plugin
class L2(RegularizerABC):
    """
    alpha * ||theta||_F^2 on the first layer (GCN recipe) or on every layer.
    Weight decay `wd` corresponds to alpha = wd / 2, so that the gradient is wd * theta.
    """

    def __init__(self, alpha: float = 0.01, all_layers: bool = False) -> None:
        self.alpha = alpha
        self.all_layers = all_layers

    def __str__(self):
        return f"L2(alpha={self.alpha}, all_layers={self.all_layers})"

    def __call__(self, parameter: torch.Tensor) -> torch.Tensor:
        return self.alpha * torch.sum(torch.pow(parameter, 2))

    def gradient(self, parameter: torch.Tensor) -> torch.Tensor:
        return 2.0 * self.alpha * parameter

    def decayed_parameters(self, model: torch.nn.Module) -> Iterator[Tuple[str, torch.Tensor]]:
        """
        Parameters are registered layer by layer, the first one is the first layer weight
        """
        for k, (name, parameter) in enumerate(model.named_parameters()):
            if k == 0 or self.all_layers:
                yield name, parameter

    def compute_penalty(self, model: torch.nn.Module) -> float:

        penalty = 0.0

        for name, parameter in self.decayed_parameters(model):
            penalty += float(self(parameter))

        return penalty

    def compute_gradients(self, model: torch.nn.Module) -> Dict[str, torch.Tensor]:
        return {name: self.gradient(parameter) for name, parameter in self.decayed_parameters(model)}
