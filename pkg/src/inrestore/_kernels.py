"""Internal compute kernels for the hot fitting loop.

Inputs and outputs are float64 numpy arrays.  When torch is importable its
CPU kernels are used (SIMD-vectorized sin/cos and a faster single-core
GEMM); otherwise everything falls back to numpy.  Both paths compute the
same quantities in double precision; results agree to ~1 ulp, and a given
installation always takes the same path, so runs stay reproducible.
"""

from __future__ import annotations

import numpy as np

try:
    import torch as _torch
except ImportError:  # pragma: no cover - exercised only without torch
    _torch = None

TORCH_AVAILABLE = _torch is not None


def _as_t(a: np.ndarray):
    return _torch.from_numpy(a)


if TORCH_AVAILABLE:

    def sin(x: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        if out is None:
            out = np.empty_like(x)
        _torch.sin(_as_t(x), out=_as_t(out))
        return out

    def cos(x: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        if out is None:
            out = np.empty_like(x)
        _torch.cos(_as_t(x), out=_as_t(out))
        return out

    def mm(a: np.ndarray, b: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        if out is None:
            out = np.empty((a.shape[0], b.shape[1]), dtype=np.float64)
        _torch.mm(_as_t(a), _as_t(b), out=_as_t(out))
        return out

    def linear(
        x: np.ndarray,
        weights: np.ndarray,
        bias: np.ndarray,
        out: np.ndarray | None = None,
    ) -> np.ndarray:
        """x @ weights.T + bias in one fused pass."""
        if out is None:
            out = np.empty((x.shape[0], weights.shape[0]), dtype=np.float64)
        _torch.addmm(_as_t(bias), _as_t(x), _as_t(weights).T, out=_as_t(out))
        return out

else:

    def sin(x: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        return np.sin(x, out=out)

    def cos(x: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        return np.cos(x, out=out)

    def mm(a: np.ndarray, b: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        return np.matmul(a, b, out=out)

    def linear(
        x: np.ndarray,
        weights: np.ndarray,
        bias: np.ndarray,
        out: np.ndarray | None = None,
    ) -> np.ndarray:
        out = np.matmul(x, weights.T, out=out)
        out += bias
        return out
