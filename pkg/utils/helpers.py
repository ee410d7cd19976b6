"""
helpers.py
----------
Small shared utilities: seeded random streams, complex Gaussian draws and
parsing of the comma-separated integer lists used on the command line.
"""
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

SeedLike = Union[int, np.random.SeedSequence, None]


def seed_sequence(seed: SeedLike) -> np.random.SeedSequence:
    """Return ``seed`` as a SeedSequence (``None`` means entropy from the OS)."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def make_rng(seed: SeedLike) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(seed))


def spawn_rngs(seed: SeedLike, count: int) -> List[np.random.Generator]:
    """
    Independent generators derived from one seed.

    Substream ``i`` depends only on ``seed`` and ``i``, so work split across
    threads reproduces the sequential result exactly.
    """
    return [np.random.default_rng(s) for s in seed_sequence(seed).spawn(count)]


def spawn_seeds(seed: SeedLike, count: int) -> List[np.random.SeedSequence]:
    return list(seed_sequence(seed).spawn(count))


def complex_gaussian(
    rng: np.random.Generator, shape: Union[int, Tuple[int, ...]]
) -> np.ndarray:
    """Standard complex Gaussian entries (unit variance)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unit_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = complex_gaussian(rng, dim)
    return v / np.linalg.norm(v)


def parse_int_list(text: Optional[str], base: int = 0) -> List[int]:
    """
    Parse ``"2,3,4"`` into ``[2, 3, 4]``; blank input gives ``[]``.

    Args:
        text (str): Comma-separated integers.
        base (int): Amount subtracted from every entry (1 turns 1-based
            indices into 0-based ones).

    Raises:
        ValueError: If an entry is not an integer.
    """
    if text is None or not text.strip():
        return []
    values = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            raise ValueError(f"Empty entry in integer list: {text!r}")
        values.append(int(part) - base)
    return values


def format_int_list(values: Sequence[int], base: int = 0) -> str:
    return ",".join(str(v + base) for v in values)
