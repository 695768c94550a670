import logging
import time
from contextlib import contextmanager
from typing import Iterator, List

import numpy as np

logger = logging.getLogger(__name__)


def derive_seed(*keys: int) -> int:
    """
    Derive a 32 bits seed from a tuple of integers, e.g. (run seed, budget).
    Stable across processes and python versions.
    """
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


@contextmanager
def elapsed_ms(sink: List[float]) -> Iterator[None]:
    """
    Append the wall-clock duration (ms) of the with-block to `sink`
    """
    start = time.perf_counter()
    try:
        yield
    finally:
        sink.append((time.perf_counter() - start) * 1000.0)
