"""
Seeded, splittable random stream used by every sampler

Generator: numpy PCG64 seeded through numpy SeedSequence with a 64-bit
integer. split(seed, i) seeds shard i from SeedSequence(entropy=seed,
spawn_key=(i,)), whose documented hash mixing gives each shard an
independent stream. Gaussians come from Box-Muller and exponentials from
-log(1 - u), both consuming the uniform stream, so the stream layout depends
only on the order of calls made by the samplers.
"""
from typing import Optional, Tuple, Union

import numpy as np

from entanglement.errors import ConfigInvalid

SEED_MAX = 2 ** 64 - 1

Shape = Union[int, Tuple[int, ...]]


def validate_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise ConfigInvalid(f"seed must be an integer, got {seed!r}")
    if not 0 <= int(seed) <= SEED_MAX:
        raise ConfigInvalid("seed must be in [0, 2^64 - 1]")
    return int(seed)


class SeededRng:
    """
    Deterministic random stream. Single owner: parallel work must use split streams.
    """

    def __init__(self, seed: int, shard: Optional[int] = None):
        self._seed = validate_seed(seed)
        self._shard = shard
        if shard is None:
            sequence = np.random.SeedSequence(entropy=self._seed)
        else:
            sequence = np.random.SeedSequence(entropy=self._seed, spawn_key=(int(shard),))
        self._gen = np.random.Generator(np.random.PCG64(sequence))

    @classmethod
    def split(cls, seed: int, index: int) -> "SeededRng":
        """Independent stream for shard (or restart) ``index`` of a run seeded with ``seed``"""
        if index < 0:
            raise ConfigInvalid(f"split index must be non-negative, got {index}")
        return cls(seed, shard=index)

    @property
    def seed(self) -> int:
        return self._seed

    @property
    def shard(self) -> Optional[int]:
        return self._shard

    def uniform(self, size: Shape) -> np.ndarray:
        """Uniform variates on [0, 1)"""
        return self._gen.random(size)

    def normal(self, size: Shape) -> np.ndarray:
        """
        Standard normal variates by Box-Muller

        Uniforms are drawn in pairs (u1, u2); each pair yields
        r*cos(2 pi u2), r*sin(2 pi u2) with r = sqrt(-2 ln(1 - u1)),
        interleaved in that order.
        """
        shape = (size,) if isinstance(size, (int, np.integer)) else tuple(size)
        count = int(np.prod(shape))
        pairs = self._gen.random(((count + 1) // 2, 2))
        radius = np.sqrt(-2.0 * np.log1p(-pairs[:, 0]))
        angle = 2.0 * np.pi * pairs[:, 1]
        z = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=-1).reshape(-1)
        return z[:count].reshape(shape)

    def complex_normal(self, size: Shape) -> np.ndarray:
        """Standard complex Gaussians (real and imaginary parts with variance 1/2)"""
        shape = (size,) if isinstance(size, (int, np.integer)) else tuple(size)
        z = self.normal(shape + (2,))
        return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)

    def exponential(self, size: Shape) -> np.ndarray:
        """Unit-rate exponential variates"""
        return -np.log1p(-self._gen.random(size))
