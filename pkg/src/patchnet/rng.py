"""Portable pseudo-random numbers for reproducible simulations.

Every stochastic component of the package draws from :class:`SplitMix64`,
a 64-bit counter-based generator with a published reference algorithm.
Identical seeds therefore give identical streams on every platform and
Python build, which is what makes traces and sweep outputs byte-stable.

The generator state advances by the 64-bit golden-gamma constant and each
output is the finalizer hash of the new state:

    state   = (state + 0x9E3779B97F4A7C15) mod 2**64
    output  = mix64(state)

``uniform`` maps the top 53 bits to [0, 1).  Exponential variates use the
inverse CDF ``-mean * ln(1 - u)`` with ``u`` drawn from the open interval
(0, 1) (the 53-bit integer is centered by +0.5), so waits are strictly
positive and never infinite.
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15
_INV53 = 2.0 ** -53


def mix64(z: int) -> int:
    """SplitMix64 finalizer: avalanche a 64-bit value."""
    z = (z + _GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, index: int) -> int:
    """Derive the seed of stream ``index`` from a base seed.

    This is the documented mixing function used for sweep runs and
    percolation trials: streams are independent of scheduling order because
    each one is keyed only by (base_seed, index).
    """
    return mix64((base_seed ^ mix64(index & _MASK64)) & _MASK64)


class SplitMix64:
    """Seeded SplitMix64 stream."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        if not 0 <= seed <= _MASK64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
        self._state = seed

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * _INV53

    def uniform_open(self) -> float:
        """Uniform double in the open interval (0, 1)."""
        return ((self.next_u64() >> 11) + 0.5) * _INV53

    def exponential(self, mean: float) -> float:
        """Exponential variate with the given mean; strictly positive."""
        if mean <= 0.0:
            raise ValueError(f"mean must be positive, got {mean}")
        return -mean * math.log1p(-self.uniform_open())

    def uniforms(self, count: int) -> np.ndarray:
        """Vectorized batch of ``count`` uniforms in [0, 1).

        Bit-identical to ``count`` successive :meth:`uniform` calls; the
        counter-based state update makes the whole batch one numpy pass.
        """
        if count < 0:
            raise ValueError("count must be non-negative")
        with np.errstate(over="ignore"):
            steps = np.arange(1, count + 1, dtype=np.uint64)
            z = np.uint64(self._state) + np.uint64(_GAMMA) * steps
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            z = z ^ (z >> np.uint64(31))
        self._state = (self._state + count * _GAMMA) & _MASK64
        return (z >> np.uint64(11)).astype(np.float64) * _INV53
