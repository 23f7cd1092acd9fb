"""PSNR and SSIM on H x W x C images.

Both metrics clamp their inputs to the dynamic range first, matching what a
reader would measure on exported files.  PSNR of identical images is +inf.
"""

from __future__ import annotations

import numpy as np

__all__ = ["psnr", "ssim"]

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03


def _check_pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def psnr(a: np.ndarray, b: np.ndarray, peak: float = 1.0) -> float:
    """10 log10(peak^2 / MSE) in dB over all pixels and channels."""
    if peak <= 0:
        raise ValueError(f"peak must be > 0, got {peak}")
    a, b = _check_pair(a, b)
    a = np.clip(a, 0.0, peak)
    b = np.clip(b, 0.0, peak)
    mse = np.mean((a - b) ** 2)
    if mse == 0.0:
        return float("inf")
    return float(10.0 * np.log10(peak**2 / mse))


def _window_matrix(n: int) -> np.ndarray:
    """(n-10) x n valid-mode correlation matrix of the 11-tap Gaussian window."""
    t = np.arange(_SSIM_WINDOW) - (_SSIM_WINDOW - 1) / 2.0
    g = np.exp(-(t**2) / (2.0 * _SSIM_SIGMA**2))
    g /= g.sum()
    rows = n - _SSIM_WINDOW + 1
    mat = np.zeros((rows, n), dtype=np.float64)
    for i in range(rows):
        mat[i, i : i + _SSIM_WINDOW] = g
    return mat


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean local SSIM, 11x11 Gaussian window (sigma 1.5), unit dynamic range.

    Windows are valid-region only (no padding); channels are scored
    independently and averaged.
    """
    a, b = _check_pair(a, b)
    h, w = a.shape[:2]
    if h < _SSIM_WINDOW or w < _SSIM_WINDOW:
        raise ValueError(
            f"ssim needs at least {_SSIM_WINDOW}x{_SSIM_WINDOW} images, got {h}x{w}"
        )
    a = np.clip(a, 0.0, 1.0)
    b = np.clip(b, 0.0, 1.0)
    gy = _window_matrix(h)
    gx = _window_matrix(w)
    c1 = _SSIM_K1**2
    c2 = _SSIM_K2**2

    def win(x: np.ndarray) -> np.ndarray:
        return gy @ x @ gx.T

    scores = []
    for ch in range(a.shape[2]):
        x, y = a[:, :, ch], b[:, :, ch]
        mx, my = win(x), win(y)
        sxx = win(x * x) - mx * mx
        syy = win(y * y) - my * my
        sxy = win(x * y) - mx * my
        s = ((2 * mx * my + c1) * (2 * sxy + c2)) / (
            (mx * mx + my * my + c1) * (sxx + syy + c2)
        )
        scores.append(s.mean())
    return float(np.mean(scores))
