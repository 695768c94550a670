"""
Errors raised by featprop. Every error keeps its context as attributes so callers (and the experiment runner)
can report where things went wrong without parsing messages.
"""
from typing import Any, Optional, Sequence


class FeatPropError(Exception):
    """
    Base class of every error raised by the library
    """
    pass


class DatasetParseError(FeatPropError):
    """
    A line of a dataset file could not be parsed
    """

    def __init__(self, path: str, line_number: int, reason: str):
        """
        :param path: the file being parsed
        :param line_number: 1-based line number of the offending line
        :param reason: what is wrong with the line
        """
        self.path: str = path
        self.line_number: int = line_number
        self.reason: str = reason

    def __str__(self) -> str:
        return f"Failed to parse `{self.path}` at line {self.line_number}: {self.reason}"


class DatasetIntegrityError(FeatPropError):
    """
    The dataset parses but is inconsistent (unknown node, duplicate node, bad dimensions...)
    """

    def __init__(self, reason: str):
        self.reason: str = reason

    def __str__(self) -> str:
        return f"Inconsistent dataset: {self.reason}"


class DimensionMismatchError(FeatPropError):

    def __init__(self, operation: str, expected: Any, actual: Any):
        self.operation: str = operation
        self.expected: Any = expected
        self.actual: Any = actual

    def __str__(self) -> str:
        return f"`{self.operation}` expected shape {self.expected}, got {self.actual}"


class NodeIndexError(FeatPropError):

    def __init__(self, index: int, n_nodes: int):
        self.index: int = index
        self.n_nodes: int = n_nodes

    def __str__(self) -> str:
        return f"Node index {self.index} is out of range for a graph of {self.n_nodes} nodes"


class EmptySelectionError(FeatPropError):

    def __init__(self, operation: str):
        self.operation: str = operation

    def __str__(self) -> str:
        return f"`{self.operation}` needs a non-empty node set"


class InfeasibleClusteringError(FeatPropError):
    """
    More centers were requested than the data can provide
    """

    def __init__(self, requested: int, available: int):
        self.requested: int = requested
        self.available: int = available

    def __str__(self) -> str:
        return f"Cannot place {self.requested} centers, only {self.available} candidates are available"


class NotEnoughNodesError(FeatPropError):

    def __init__(self, requested: int, available: int):
        self.requested: int = requested
        self.available: int = available

    def __str__(self) -> str:
        return f"Requested {self.requested} new nodes but only {self.available} unlabeled nodes remain"


class TrainingError(FeatPropError):
    """
    Non-finite loss, gradient or parameter. `epoch` is None outside of a training loop.
    """

    def __init__(self, epoch: Optional[int], reason: str):
        self.epoch: Optional[int] = epoch
        self.reason: str = reason

    def __str__(self) -> str:
        where = f" at epoch {self.epoch}" if self.epoch is not None else ""
        return f"Training failed{where}: {self.reason}"


class ConfigError(FeatPropError):

    def __init__(self, key: str, reason: str):
        self.key: str = key
        self.reason: str = reason

    def __str__(self) -> str:
        return f"Invalid configuration value for `{self.key}`: {self.reason}"


class CellError(FeatPropError):
    """
    One (strategy, seed, budget) cell of an experiment failed
    """

    def __init__(self, strategy: str, seed: int, budget: int, cause: BaseException):
        self.strategy: str = strategy
        self.seed: int = seed
        self.budget: int = budget
        self.cause: BaseException = cause

    def __str__(self) -> str:
        return f"Cell (strategy={self.strategy}, seed={self.seed}, budget={self.budget}) failed: {type(self.cause).__name__}: {self.cause}"


def check_shape(operation: str, expected: Sequence[int], actual: Sequence[int]) -> None:
    """
    Raise a DimensionMismatchError unless both shapes agree. A `None` in `expected` matches any size.
    """
    if len(expected) != len(actual) or any(e is not None and e != a for e, a in zip(expected, actual)):
        raise DimensionMismatchError(operation=operation, expected=tuple(expected), actual=tuple(actual))
