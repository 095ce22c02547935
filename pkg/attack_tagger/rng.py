from __future__ import annotations

from typing import Sequence, Union

import numpy as np

SeedLike = Union[int, Sequence[int]]


def make_rng(seed: SeedLike) -> np.random.Generator:
    """
    Every shuffle and draw in the package comes from PCG64 seeded through numpy's SeedSequence,
    so identical seeds give identical streams (see docs/FORMATS.md).
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
