"""
Adam written out explicitly so that every update is reproducible bit for bit:

    m_t = beta1 m_{t-1} + (1 - beta1) g
    v_t = beta2 v_{t-1} + (1 - beta2) g^2
    theta_t = theta_{t-1} - lr * (m_t / (1 - beta1^t)) / (sqrt(v_t / (1 - beta2^t)) + eps)
"""
import logging
from typing import Dict, Mapping

import torch

from featprop.common.exceptions import DimensionMismatchError, TrainingError
from featprop.plugins.helpers import TrainConfig

logger = logging.getLogger(__name__)


class AdamState:
    """
    First and second moment accumulators per parameter, and the step counter
    """

    def __init__(self, params: Mapping[str, torch.Tensor]):
        self.first_moments: Dict[str, torch.Tensor] = {name: torch.zeros_like(value) for name, value in params.items()}
        self.second_moments: Dict[str, torch.Tensor] = {name: torch.zeros_like(value) for name, value in params.items()}
        self.t: int = 0

    def __repr__(self) -> str:
        return f"AdamState(t={self.t}, parameters={sorted(self.first_moments)})"


def adam_step(state: AdamState, params: Mapping[str, torch.Tensor], grads: Mapping[str, torch.Tensor],
              cfg: TrainConfig, epoch: int = None) -> Dict[str, torch.Tensor]:
    """
    One bias-corrected Adam update. The state is updated in place, new parameter tensors are returned.

    :raise TrainingError: a gradient has non-finite entries (the state is left untouched)
    """
    for name, value in params.items():
        if name not in grads or tuple(grads[name].shape) != tuple(value.shape):
            raise DimensionMismatchError(operation=f'adam_step {name}', expected=tuple(value.shape),
                                         actual=tuple(grads[name].shape) if name in grads else None)
        if not torch.isfinite(grads[name]).all():
            raise TrainingError(epoch=epoch, reason=f"non-finite gradient for {name}")

    state.t += 1
    first_correction = 1.0 - cfg.beta1 ** state.t
    second_correction = 1.0 - cfg.beta2 ** state.t

    updated = {}
    for name, value in params.items():
        g = grads[name]
        state.first_moments[name] = cfg.beta1 * state.first_moments[name] + (1.0 - cfg.beta1) * g
        state.second_moments[name] = cfg.beta2 * state.second_moments[name] + (1.0 - cfg.beta2) * g * g
        m_hat = state.first_moments[name] / first_correction
        v_hat = state.second_moments[name] / second_correction
        updated[name] = value - cfg.learning_rate * m_hat / (torch.sqrt(v_hat) + cfg.epsilon)
    return updated
