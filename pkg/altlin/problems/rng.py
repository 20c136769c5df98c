"""
Deterministic, implementation-independent random numbers for instance generation

The generator is a 64-bit linear congruential sequence

    state <- state * 6364136223846793005 + 1442695040888963407   (mod 2**64)

Uniforms take the top 53 bits of the new state, normals use the Box-Muller
transform (the second value of each pair is cached), and sampling without
replacement is a partial Fisher-Yates shuffle. Arrays are filled in
column-major order.
"""

import math
from typing import Optional, Tuple

import numpy as np

MULTIPLIER = 6364136223846793005
INCREMENT = 1442695040888963407
MASK64 = (1 << 64) - 1


class Lcg64:
    """64-bit LCG with uniform, normal and sampling helpers"""

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64
        self._spare: Optional[float] = None

    def next_u64(self) -> int:
        self.state = (self.state * MULTIPLIER + INCREMENT) & MASK64
        return self.state

    def uniform(self) -> float:
        """Uniform on [0, 1)"""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def normal(self) -> float:
        if self._spare is not None:
            value, self._spare = self._spare, None
            return value
        u1 = 1.0 - self.uniform()  # (0, 1]
        u2 = self.uniform()
        radius = math.sqrt(-2.0 * math.log(u1))
        angle = 2.0 * math.pi * u2
        self._spare = radius * math.sin(angle)
        return radius * math.cos(angle)

    def uniform_array(self, shape: Tuple[int, ...], low: float = 0.0, high: float = 1.0) -> np.ndarray:
        count = int(np.prod(shape))
        values = [low + (high - low) * self.uniform() for _ in range(count)]
        return np.asfortranarray(np.array(values, dtype=np.float64).reshape(shape, order="F"))

    def normal_array(self, shape: Tuple[int, ...], scale: float = 1.0) -> np.ndarray:
        count = int(np.prod(shape))
        values = [scale * self.normal() for _ in range(count)]
        return np.asfortranarray(np.array(values, dtype=np.float64).reshape(shape, order="F"))

    def choice(self, n: int, k: int) -> np.ndarray:
        """``k`` distinct indices from ``range(n)`` in draw order"""
        if not 0 <= k <= n:
            raise ValueError(f"cannot draw {k} distinct values from {n}")
        pool = list(range(n))
        for i in range(k):
            j = i + int(self.uniform() * (n - i))
            pool[i], pool[j] = pool[j], pool[i]
        return np.array(pool[:k], dtype=np.int64)
