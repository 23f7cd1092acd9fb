"""Shared helpers: synthetic test images and finite-difference oracles."""

from __future__ import annotations

import numpy as np

from inrestore import LayerParams, Rng
from inrestore.restoration import loss_and_grads


def piecewise_smooth_toy(h: int, w: int, seed: int) -> np.ndarray:
    """Seeded piecewise-smooth RGB image.

    A smoothly shaded background, two sharp-edged shapes and a diagonal
    sinusoidal texture band: smooth regions separated by clean
    discontinuities, with enough fine detail that fitting quality actually
    differentiates methods.
    """
    rng = Rng(seed)
    phases = rng.uniform(6, 0.0, 2.0 * np.pi)
    y, x = np.meshgrid(np.linspace(0, 1, h), np.linspace(0, 1, w), indexing="ij")
    img = np.empty((h, w, 3))
    for c in range(3):
        img[:, :, c] = (
            0.50
            + 0.18 * np.sin(2 * np.pi * (1.3 * x + 0.2 * y) + phases[c])
            + 0.13 * np.sin(2 * np.pi * (0.9 * y) + phases[3 + c])
        )
    disk = (y - 0.32) ** 2 + (x - 0.30) ** 2 < 0.20**2
    img[disk] = np.array([0.82, 0.30, 0.24])
    rect = (y > 0.55) & (y < 0.82) & (x > 0.52) & (x < 0.86)
    img[rect] = np.array([0.20, 0.55, 0.78])
    band = (y > 0.06) & (y < 0.30) & (x > 0.55)
    tex = 0.5 + 0.5 * np.sin(2 * np.pi * (4.5 * x + 3.5 * y))
    for c, s in enumerate((1.0, 0.8, 0.6)):
        img[:, :, c] = np.where(band, 0.25 + 0.5 * tex * s, img[:, :, c])
    return np.clip(img, 0.03, 0.97)


def fd_loss_gradients(net, grid, tasks, h: float = 1e-6) -> list[LayerParams]:
    """Central-difference gradients of the restoration loss.

    Perturbs every parameter in place and differences the loss; independent
    of the reverse-mode path it is used to check.
    """

    def loss() -> float:
        return loss_and_grads(net, grid, tasks).loss

    grads = []
    for layer in net.layers:
        gw = np.zeros_like(layer.weights)
        gb = np.zeros_like(layer.bias)
        for arr, g in ((layer.weights, gw), (layer.bias, gb)):
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = arr[idx]
                arr[idx] = orig + h
                lp = loss()
                arr[idx] = orig - h
                lm = loss()
                arr[idx] = orig
                g[idx] = (lp - lm) / (2.0 * h)
        grads.append(LayerParams(gw, gb))
    return grads


def max_rel_error(analytic: list[LayerParams], numeric: list[LayerParams]) -> float:
    """Largest |a - n| normalized by the largest gradient magnitude overall.

    Global-scale normalization keeps the check meaningful where individual
    entries are near zero (finite differences carry ~1e-11 absolute noise).
    """
    scale = 0.0
    err = 0.0
    for ga, gn in zip(analytic, numeric):
        for a, n in ((ga.weights, gn.weights), (ga.bias, gn.bias)):
            scale = max(scale, np.abs(a).max(), np.abs(n).max())
            err = max(err, np.abs(a - n).max())
    return err / max(scale, 1e-300)
