"""Reproducible positive parameter draws."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

DEFAULT_SEED = 42
LOG_LOW, LOG_HIGH = -2.0, 2.0


def positive_draws(names: Sequence[str], count: int, seed: int = DEFAULT_SEED,
                   low: float = LOG_LOW, high: float = LOG_HIGH) -> Iterator[dict[str, Fraction]]:
    """Yield ``count`` assignments, each value log-uniform on ``[10**low, 10**high]``.

    Values are exact binary fractions of the sampled floats so that exact
    and floating evaluations agree.
    """
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield {n: Fraction(float(10.0 ** rng.uniform(low, high))) for n in names}
