"""
Plugin registry and experiment configuration.

Selection strategies (and any future scorer, e.g. AGE or ANRMAB) register themselves with `register_plugin` under a
stable name, and experiment files refer to them either by that name or by a mapping `{"_name": ..., **kwargs}`.
The Registry pattern used here is inspired from this post: https://realpython.com/primer-on-python-decorators/
"""
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Type, Union

import toml
import yaml
from smart_open import open

from featprop.common.exceptions import ConfigError

logger = logging.getLogger(__name__)
REGISTRY = {}

STRATEGY_NAMES = ('random', 'degree', 'uncertainty', 'coreset', 'featprop', 'featprop-kcenter', 'netrep-kmedoids')
MODEL_VARIANTS = ('gcn', 'sgc')
REPRESENTATIONS = ('final', 'hidden')
DATASET_FORMATS = ('content-cites', 'json')


def register_plugin(registrable: Any, alias: str = None):
    """
    Register a class, a function or a method to REGISTRY
    Args:
        registrable:
        alias:
    Returns:
    """
    alias = alias or registrable.__name__

    if alias in REGISTRY:
        raise ValueError(f"{alias} is already registered to registrable {REGISTRY[alias]}. Please select another name")

    REGISTRY[alias] = registrable
    return registrable


def register_as(alias: str) -> Callable:
    """
    Decorator form of `register_plugin` with an explicit alias
    """

    def decorator(registrable: Any) -> Any:
        return register_plugin(registrable, alias=alias)

    return decorator


class InstantiationError(Exception):
    """
    An error happened while instantiating a plugin
    """

    def __init__(self, obj_name: str):
        """
        :param obj_name: The name of the object that couldn't be instantiated
        """
        self.obj_name: str = obj_name

    def __str__(self) -> str:
        return f"Failed to instantiate `{self.obj_name}`"


class CallableInstantiationError(InstantiationError):
    """
    The registered callable raised when called
    """

    def __init__(self, obj_name: str, callable_name: str, arg_names: List[str]):
        """
        :param obj_name: The name of the object that couldn't be instantiated
        :param callable_name: The callable's name that failed when called
        :param arg_names: The names of the arguments that were passed to the callable
        """
        super().__init__(obj_name)
        self.callable_name: str = callable_name
        self.arg_names: List[str] = arg_names

    def __str__(self) -> str:
        return f"{super().__str__()} calling `{self.callable_name}` using the arguments " + ', '.join(self.arg_names) + '; see exception raised above'


class UnknownPluginException(InstantiationError):
    """
    A registrable has not been registred
    """

    def __init__(self, object_name: str, registrable: str):
        super().__init__(object_name)
        self.registrable: str = registrable

    def __str__(self) -> str:
        return f"{super().__str__()} because registrable `{self.registrable}` isn't registred"


def plugin_name(config: Union[str, Mapping[str, Any]]) -> str:
    """
    The registry name of a plugin given as a name or as a `{"_name": ...}` mapping
    """
    if isinstance(config, str):
        return config
    if isinstance(config, Mapping) and '_name' in config:
        return str(config['_name'])
    raise ConfigError('strategies', f"expected a name or a mapping with a `_name` key, got {config!r}")


def build_plugin(config: Union[str, Mapping[str, Any]], name: str) -> Any:
    """
    Instantiate a registered plugin

    :param config: the registry name, or a mapping with the registry name under `_name` and constructor kwargs
    :param name: the full name of the object, for error messages
    :return: the instance
    :raise UnknownPluginException: if the callable is not registered
    :raise CallableInstantiationError: if an error occurred while calling the callable
    """
    klass_name = plugin_name(config)
    if klass_name not in REGISTRY:
        raise UnknownPluginException(object_name=name, registrable=klass_name)

    klass: Union[Type, Callable] = REGISTRY[klass_name]
    kwargs: Dict[str, Any] = {key: value for key, value in config.items() if key != '_name'} if isinstance(config, Mapping) else {}

    logger.debug(f'instantiating "{name}" calling {klass_name}')
    try:
        return klass(**kwargs)
    except Exception:
        logger.exception(f"{klass_name}({', '.join(kwargs)}) raised")
        raise CallableInstantiationError(obj_name=name, callable_name=klass_name, arg_names=list(kwargs.keys()))


class ExperimentConfig:
    """
    Everything needed to run one experiment: dataset, strategies, budget sweep, seeds, model and training
    hyper-parameters, output directory. One attribute per command line flag.
    """

    DEFAULTS: Dict[str, Any] = {
        'dataset': None,
        'format': 'content-cites',
        'strategies': list(STRATEGY_NAMES),
        'budgets': [10, 20, 40, 80, 160],
        'seeds': [0, 1, 2, 3, 4],
        'initial_pool': 5,
        'model': 'gcn',
        'prop_steps': 2,
        'hidden': 16,
        'epochs': 200,
        'lr': 0.01,
        'weight_decay': 5e-4,
        'out': 'results',
        'row_normalize': True,
        'strict_edges': True,
        'decay_all_layers': False,
        'representation': 'final',
        'n_jobs': 1,
        'timings': True,
        'bootstrap_model': True,
        'log_every': 50,
        'name': None,
    }

    @staticmethod
    def load_experiment_config(experiment: Union[str, Path, Dict]) -> Dict:
        config = {}
        if isinstance(experiment, dict):
            config = dict(experiment)
        else:
            experiment_path = Path(str(experiment)).expanduser()
            with open(str(experiment_path), 'r') as f:
                if experiment_path.suffix in {'.json', '.yaml', '.yml'}:
                    config = yaml.safe_load(f)
                elif experiment_path.suffix in {'.toml'}:
                    config = toml.load(f)
                else:
                    raise ValueError("Only Dict, json, yaml and toml experiment files are supported")
        return config or {}

    def __init__(self, **values):

        unknown = sorted(set(values) - set(ExperimentConfig.DEFAULTS))
        if unknown:
            raise ConfigError(unknown[0], f"unknown configuration key (known keys: {', '.join(ExperimentConfig.DEFAULTS)})")

        settings = dict(ExperimentConfig.DEFAULTS)
        settings.update({key: value for key, value in values.items() if value is not None})

        self.dataset: Optional[str] = str(settings['dataset']) if settings['dataset'] is not None else None
        self.format: str = settings['format']
        strategies = settings['strategies']
        if isinstance(strategies, str):
            strategies = [name.strip() for name in strategies.split(',') if name.strip()]
        self.strategies: List[Union[str, Dict[str, Any]]] = list(strategies)
        self.budgets: List[int] = parse_int_list(settings['budgets'], 'budgets')
        self.seeds: List[int] = parse_seeds(settings['seeds'])
        self.initial_pool: int = int(settings['initial_pool'])
        self.model: str = settings['model']
        self.prop_steps: int = int(settings['prop_steps'])
        self.hidden: int = int(settings['hidden'])
        self.epochs: int = int(settings['epochs'])
        self.lr: float = float(settings['lr'])
        self.weight_decay: float = float(settings['weight_decay'])
        self.out: str = str(settings['out'])
        self.row_normalize: bool = bool(settings['row_normalize'])
        self.strict_edges: bool = bool(settings['strict_edges'])
        self.decay_all_layers: bool = bool(settings['decay_all_layers'])
        self.representation: str = settings['representation']
        self.n_jobs: int = int(settings['n_jobs'])
        self.timings: bool = bool(settings['timings'])
        self.bootstrap_model: bool = bool(settings['bootstrap_model'])
        self.log_every: int = int(settings['log_every'])
        self.name: Optional[str] = settings['name']

        self.validate()

    @classmethod
    def from_dict(cls, config: Mapping[str, Any], **overrides) -> "ExperimentConfig":
        """
        Build from a mapping; `overrides` (e.g. command line flags) win over the mapping, None values are ignored
        """
        values = {key.replace('-', '_'): value for key, value in config.items()}
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)

    @classmethod
    def from_file(cls, path: Union[str, Path], **overrides) -> "ExperimentConfig":
        return cls.from_dict(ExperimentConfig.load_experiment_config(path), **overrides)

    def validate(self):

        if self.format not in DATASET_FORMATS:
            raise ConfigError('format', f"`{self.format}` is not one of {', '.join(DATASET_FORMATS)}")
        if self.model not in MODEL_VARIANTS:
            raise ConfigError('model', f"`{self.model}` is not one of {', '.join(MODEL_VARIANTS)}")
        if self.representation not in REPRESENTATIONS:
            raise ConfigError('representation', f"`{self.representation}` is not one of {', '.join(REPRESENTATIONS)}")
        if not self.strategies:
            raise ConfigError('strategies', "at least one strategy is required")
        names = [plugin_name(strategy) for strategy in self.strategies]
        if len(set(names)) != len(names):
            raise ConfigError('strategies', f"duplicate strategies in {names}")
        if not self.budgets:
            raise ConfigError('budgets', "at least one budget is required")
        if self.budgets[0] < 1 or any(b <= a for a, b in zip(self.budgets, self.budgets[1:])):
            raise ConfigError('budgets', f"budgets must be positive and strictly increasing, got {self.budgets}")
        if not self.seeds:
            raise ConfigError('seeds', "at least one seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError('seeds', f"seeds must be distinct, got {self.seeds}")
        for key in ('initial_pool', 'prop_steps', 'epochs'):
            if getattr(self, key) < 0:
                raise ConfigError(key, f"must be non-negative, got {getattr(self, key)}")
        for key in ('hidden', 'n_jobs', 'log_every'):
            if getattr(self, key) < 1:
                raise ConfigError(key, f"must be positive, got {getattr(self, key)}")
        if self.lr <= 0:
            raise ConfigError('lr', f"must be positive, got {self.lr}")
        if self.weight_decay < 0:
            raise ConfigError('weight_decay', f"must be non-negative, got {self.weight_decay}")

    @property
    def strategy_names(self) -> List[str]:
        return [plugin_name(strategy) for strategy in self.strategies]

    def to_dict(self) -> Dict[str, Any]:
        """
        The configuration as a toml/json friendly mapping, None values dropped
        """
        strategies = self.strategies
        if not all(isinstance(strategy, str) for strategy in strategies):
            # toml arrays must be homogeneous
            strategies = [strategy if isinstance(strategy, Mapping) else {'_name': strategy} for strategy in strategies]
        values = {key: getattr(self, key) for key in ExperimentConfig.DEFAULTS}
        values['strategies'] = [dict(strategy) if isinstance(strategy, Mapping) else strategy for strategy in strategies]
        return {key: value for key, value in values.items() if value is not None}

    def replace(self, **changes) -> "ExperimentConfig":
        values = self.to_dict()
        values.update(changes)
        return ExperimentConfig(**values)

    def __eq__(self, other) -> bool:
        return isinstance(other, ExperimentConfig) and self.to_dict() == other.to_dict()

    def __repr__(self) -> str:
        return f"ExperimentConfig({', '.join(f'{k}={v!r}' for k, v in self.to_dict().items())})"


def parse_int_list(value: Union[str, int, List[int]], key: str) -> List[int]:
    """
    `"10,20,40"`, `[10, 20, 40]` or a single int
    """
    try:
        if isinstance(value, str):
            return [int(v) for v in value.split(',') if v.strip()]
        if isinstance(value, int):
            return [value]
        return [int(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected a list of integers, got {value!r}") from None


def parse_seeds(value: Union[str, int, List[int]]) -> List[int]:
    """
    A count N (seeds 0..N-1), or an explicit comma separated / list of seeds
    """
    if isinstance(value, str) and ',' not in value:
        try:
            value = int(value)
        except ValueError:
            raise ConfigError('seeds', f"expected a count or a list of seeds, got {value!r}") from None
    if isinstance(value, int) and not isinstance(value, bool):
        if value < 1:
            raise ConfigError('seeds', f"the seed count must be positive, got {value}")
        return list(range(value))
    return parse_int_list(value, 'seeds')
