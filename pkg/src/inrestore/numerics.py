"""Dense float64 linear algebra and seeded random sampling.

All numeric state in this package is a plain ``numpy.ndarray`` of dtype
float64 (row-major).  Randomness always flows through an explicit
:class:`Rng` instance; there is no hidden global generator.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Rng", "matmul"]


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product of two 2-D float arrays.

    Raises ``ValueError`` naming both shapes when the inner dimensions
    do not agree.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError(f"matmul expects 2-D arrays, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ValueError(
            f"matmul dimension mismatch: {a.shape[0]}x{a.shape[1]} times "
            f"{b.shape[0]}x{b.shape[1]}"
        )
    return a @ b


class Rng:
    """Seeded pseudorandom generator.

    Wraps numpy's PCG64 (128-bit permuted congruential generator); a fixed
    seed yields the identical sample sequence across runs and platforms.
    Normal deviates come from numpy's ziggurat sampler.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, n: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        """n i.i.d. samples from the half-open interval [lo, hi)."""
        if not lo < hi:
            raise ValueError(f"uniform requires lo < hi, got lo={lo}, hi={hi}")
        return self._gen.uniform(lo, hi, size=int(n))

    def normal(self, n: int, mean: float = 0.0, sigma: float = 1.0) -> np.ndarray:
        """n i.i.d. Gaussian samples with the given mean and standard deviation."""
        if sigma < 0:
            raise ValueError(f"normal requires sigma >= 0, got {sigma}")
        return self._gen.normal(loc=mean, scale=sigma, size=int(n))
