"""
Full-batch training of the GCN / SGC on a labeled pool.
For the training loop, we use the engine logic from pytorch-ignite: one engine iteration = one epoch over the whole
graph, the gradient is the analytic one from `featprop.plugins.models` and the update is `adam_step`.
"""
import logging
from abc import ABC, abstractmethod
from typing import Dict, Iterable, List

import numpy as np
from ignite.engine import Events
from ignite.engine.engine import Engine

from featprop.common.exceptions import EmptySelectionError, TrainingError
from featprop.loaders.graph import Dataset, NormalizedAdjacency
from featprop.plugins.config import register_plugin
from featprop.plugins.helpers import TrainConfig
from featprop.plugins.models import GcnModel, GraphInputs, loss_gradients_and_cache
from featprop.plugins.optimizers import AdamState, adam_step
from featprop.plugins.regularizers import L2

logger = logging.getLogger(__name__)


class TrainerABC(ABC):

    @abstractmethod
    def train(self) -> GcnModel:
        pass


@register_plugin
class GcnTrainer(TrainerABC):
    """
    Train a freshly initialized model (Glorot uniform, seeded by `config.seed`) for exactly `config.epochs` epochs.
    No early stopping, no validation split: the model of the last epoch is returned.
    """

    def __init__(self,
                 dataset: Dataset,
                 inputs: GraphInputs,
                 pool: Iterable[int],
                 config: TrainConfig,
                 variant: str = 'gcn',
                 hidden_size: int = 16,
                 decay_all_layers: bool = False,
                 linear: bool = False,
                 log_every: int = 50):

        self.dataset: Dataset = dataset
        self.inputs: GraphInputs = inputs
        self.pool: List[int] = sorted(set(int(v) for v in pool))
        if not self.pool:
            raise EmptySelectionError('train')
        self.config: TrainConfig = config
        self.log_every: int = log_every

        self.model: GcnModel = GcnModel(n_features=inputs.n_features, n_classes=dataset.n_classes,
                                        hidden_size=hidden_size, variant=variant, linear=linear, seed=config.seed)
        self.regularizer: L2 = L2(alpha=config.weight_decay / 2.0, all_layers=decay_all_layers)
        self.state: AdamState = AdamState(self.model.parameter_dict())
        self.history: Dict[str, List[float]] = {'loss': [], 'accuracy': []}

        self.engine: Engine = Engine(self.update_engine)
        self.engine.logger.setLevel(logging.WARNING)
        self.setup()

    def setup(self):

        @self.engine.on(Events.EPOCH_COMPLETED)
        def log_training_results(engine):
            epoch = engine.state.epoch
            if epoch % self.log_every == 0 or epoch == self.config.epochs:
                logger.debug(f"Training Results - Epoch: {epoch} loss: {self.history['loss'][-1]:.4f} | "
                             f"acc: {self.history['accuracy'][-1]:.3} | ")

    def update_engine(self, engine, batch):

        epoch = engine.state.epoch
        loss, grads, cache = loss_gradients_and_cache(self.model, self.inputs, self.dataset.labels, self.pool,
                                                      self.regularizer)
        if not np.isfinite(loss):
            raise TrainingError(epoch=epoch, reason=f"non-finite loss {loss}")

        predicted = cache.probabilities[self.pool].numpy().argmax(axis=1)
        self.history['loss'].append(loss)
        self.history['accuracy'].append(float(np.mean(predicted == self.dataset.labels.labels[self.pool])))

        updated = adam_step(self.state, self.model.parameter_dict(), grads, self.config, epoch=epoch)
        self.model.load_parameter_dict(updated)
        self.model.check_finite(epoch=epoch)
        return loss

    def train(self) -> GcnModel:
        """
        :return: the model after the last epoch (the initialization itself when epochs == 0)
        """
        if self.config.epochs > 0:
            self.engine.run([None], max_epochs=self.config.epochs)
        return self.model


def train(dataset: Dataset, adjacency: NormalizedAdjacency, pool: Iterable[int], cfg: TrainConfig,
          variant: str = 'gcn', hidden_size: int = 16, inputs: GraphInputs = None, decay_all_layers: bool = False,
          log_every: int = 50) -> GcnModel:
    """
    Train a model on the labels of `pool` only

    :param inputs: precomputed S X / S^2 X for `dataset`, computed here when missing
    """
    inputs = inputs if inputs is not None else GraphInputs(adjacency, dataset.features)
    trainer = GcnTrainer(dataset=dataset, inputs=inputs, pool=pool, config=cfg, variant=variant,
                         hidden_size=hidden_size, decay_all_layers=decay_all_layers, log_every=log_every)
    return trainer.train()
