"""
Seeded random streams.

Integers seed a PCG64 generator; independent chains get children spawned
from one ``SeedSequence`` so runs are reproducible given the root seed.
"""

from typing import List, Optional, Union

import numpy as np

SeedLike = Union[None, int, np.random.Generator]


def make_rng(seed: SeedLike = None) -> np.random.Generator:
    """Return ``seed`` itself if it is a generator, else a fresh PCG64 stream."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def spawn_rngs(seed: SeedLike, count: int) -> List[np.random.Generator]:
    """Spawn ``count`` statistically independent child generators."""
    if isinstance(seed, np.random.Generator):
        root = np.random.SeedSequence(int(seed.integers(2**63)))
    else:
        root = np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.PCG64(child)) for child in root.spawn(count)]


def resolve_seed(seed: Optional[int]) -> int:
    """Turn a missing seed into a concrete one so it can be reported."""
    if seed is not None:
        return int(seed)
    return int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0] >> 1)
