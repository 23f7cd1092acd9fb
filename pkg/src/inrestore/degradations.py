"""Coordinate grids, corruption synthesis, and linear degradation operators.

Images are H x W x C float64 arrays in nominal range [0, 1].  Every operator
is linear with an exact adjoint: the separable 1-D actions along each axis
are materialized as dense matrices (boundary handling folded in), so the
adjoint is literally the transposed matrix action and the inner-product
identity <A x, y> == <x, A^T y> holds to machine precision.

Boundary handling for blur and downsampling is half-sample symmetric
reflection (numpy's ``pad(mode="symmetric")`` convention).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import Rng

__all__ = [
    "CoordGrid",
    "make_coord_grid",
    "BlurKernel",
    "gaussian_kernel",
    "DegradationOp",
    "Identity",
    "Downsample",
    "Mask",
    "Blur",
    "sample_mask",
    "add_gaussian_noise",
]


@dataclass
class CoordGrid:
    """Normalized (y, x) coordinates for an H x W pixel grid.

    Row k of ``coords`` corresponds to pixel (k // width, k % width); each
    axis is sampled evenly from -1 to 1 inclusive (a single point maps to 0).
    """

    height: int
    width: int
    coords: np.ndarray  # (H*W, 2)


def make_coord_grid(h: int, w: int) -> CoordGrid:
    if h < 1 or w < 1:
        raise ValueError(f"grid dims must be >= 1, got {h}x{w}")
    ys = np.linspace(-1.0, 1.0, h) if h > 1 else np.zeros(1)
    xs = np.linspace(-1.0, 1.0, w) if w > 1 else np.zeros(1)
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    coords = np.ascontiguousarray(
        np.stack([yy, xx], axis=-1).reshape(h * w, 2)
    )
    return CoordGrid(h, w, coords)


def _reflect_indices(idx: np.ndarray, n: int) -> np.ndarray:
    """Fold arbitrary integer indices into [0, n) by symmetric reflection."""
    period = 2 * n
    m = np.mod(idx, period)
    return np.where(m >= n, period - 1 - m, m)


@dataclass
class BlurKernel:
    """Normalized symmetric 1-D Gaussian taps, applied separably (y then x)."""

    width: int
    sigma: float
    weights: np.ndarray


def gaussian_kernel(width: int, sigma: float) -> BlurKernel:
    if width < 1 or width % 2 == 0:
        raise ValueError(f"kernel width must be odd and >= 1, got {width}")
    if sigma <= 0:
        raise ValueError(f"kernel sigma must be > 0, got {sigma}")
    c = (width - 1) / 2.0
    t = np.arange(width) - c
    w = np.exp(-(t**2) / (2.0 * sigma**2))
    w /= w.sum()
    return BlurKernel(width, float(sigma), w)


def _blur_matrix(n: int, kernel: BlurKernel) -> np.ndarray:
    """n x n matrix of the reflect-padded 1-D convolution."""
    r = (kernel.width - 1) // 2
    mat = np.zeros((n, n), dtype=np.float64)
    taps = np.arange(-r, r + 1)
    for i in range(n):
        cols = _reflect_indices(i + taps, n)
        np.add.at(mat[i], cols, kernel.weights)
    return mat


def _lanczos2_weights(offsets: np.ndarray, s: int) -> np.ndarray:
    """Antialiased lanczos2 taps: L(u/s)/s with L(t) = sinc(t) sinc(t/2)."""
    t = offsets / s
    return np.sinc(t) * np.sinc(t / 2.0) / s


def _downsample_matrix(n: int, s: int) -> np.ndarray:
    """ceil(n/s) x n matrix of lanczos2 resampling by integer factor s.

    Output pixel i is centered at input position (i + 0.5)*s - 0.5; taps
    cover |u - center| < 2s, reflect at the boundary, and each row is
    renormalized to sum exactly 1 (a constant signal stays constant).
    """
    n_out = -(-n // s)
    mat = np.zeros((n_out, n), dtype=np.float64)
    for i in range(n_out):
        center = (i + 0.5) * s - 0.5
        lo = int(np.floor(center - 2 * s)) + 1
        hi = int(np.ceil(center + 2 * s)) - 1
        u = np.arange(lo, hi + 1)
        w = _lanczos2_weights(u - center, s)
        cols = _reflect_indices(u, n)
        np.add.at(mat[i], cols, w)
        mat[i] /= mat[i].sum()
    return mat


def _apply_separable(a_y: np.ndarray, a_x: np.ndarray, img: np.ndarray) -> np.ndarray:
    """Apply a_y along rows and a_x along columns of an H x W x C image."""
    h, w, c = img.shape
    t = (a_y @ img.reshape(h, w * c)).reshape(a_y.shape[0], w, c)
    t = t.transpose(1, 0, 2).reshape(w, -1)
    u = (a_x @ t).reshape(a_x.shape[0], a_y.shape[0], c)
    return np.ascontiguousarray(u.transpose(1, 0, 2))


class DegradationOp:
    """Linear map from render space (in_shape) to observation space (out_shape)."""

    in_shape: tuple[int, int]
    out_shape: tuple[int, int]

    def apply(self, img: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def adjoint(self, img: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check(self, img: np.ndarray, expected: tuple[int, int], name: str) -> np.ndarray:
        img = np.asarray(img, dtype=np.float64)
        if img.ndim != 3 or img.shape[:2] != expected:
            raise ValueError(
                f"{type(self).__name__}.{name} expects an image of size "
                f"{expected[0]}x{expected[1]}xC, got shape {img.shape}"
            )
        return img


class Identity(DegradationOp):
    def __init__(self, shape: tuple[int, int]):
        self.in_shape = self.out_shape = tuple(shape)

    def apply(self, img: np.ndarray) -> np.ndarray:
        return self._check(img, self.in_shape, "apply")

    def adjoint(self, img: np.ndarray) -> np.ndarray:
        return self._check(img, self.out_shape, "adjoint")


class Downsample(DegradationOp):
    """Antialiased lanczos2 downsampling by an integer factor."""

    def __init__(self, factor: int, in_shape: tuple[int, int]):
        if factor < 1:
            raise ValueError(f"downsample factor must be >= 1, got {factor}")
        self.factor = int(factor)
        self.in_shape = tuple(in_shape)
        h, w = self.in_shape
        self._dy = _downsample_matrix(h, self.factor)
        self._dx = _downsample_matrix(w, self.factor)
        self.out_shape = (self._dy.shape[0], self._dx.shape[0])

    def apply(self, img: np.ndarray) -> np.ndarray:
        img = self._check(img, self.in_shape, "apply")
        return _apply_separable(self._dy, self._dx, img)

    def adjoint(self, img: np.ndarray) -> np.ndarray:
        img = self._check(img, self.out_shape, "adjoint")
        return _apply_separable(self._dy.T, self._dx.T, img)


class Mask(DegradationOp):
    """Per-pixel keep/drop mask, shared across channels; self-adjoint."""

    def __init__(self, keep: np.ndarray):
        keep = np.asarray(keep, dtype=bool)
        if keep.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {keep.shape}")
        self.keep = keep
        self.in_shape = self.out_shape = keep.shape
        self.kept_pixels = int(keep.sum())

    def apply(self, img: np.ndarray) -> np.ndarray:
        img = self._check(img, self.in_shape, "apply")
        return img * self.keep[:, :, None]

    def adjoint(self, img: np.ndarray) -> np.ndarray:
        return self.apply(img)


class Blur(DegradationOp):
    """Separable Gaussian blur with symmetric-reflection boundary.

    The adjoint is the exact transpose of the forward matrix action.
    """

    def __init__(self, kernel: BlurKernel, shape: tuple[int, int]):
        self.kernel = kernel
        self.in_shape = self.out_shape = tuple(shape)
        h, w = self.in_shape
        self._by = _blur_matrix(h, kernel)
        self._bx = _blur_matrix(w, kernel)

    def apply(self, img: np.ndarray) -> np.ndarray:
        img = self._check(img, self.in_shape, "apply")
        return _apply_separable(self._by, self._bx, img)

    def adjoint(self, img: np.ndarray) -> np.ndarray:
        img = self._check(img, self.out_shape, "adjoint")
        return _apply_separable(self._by.T, self._bx.T, img)


def sample_mask(rng: Rng, h: int, w: int, sparsity: float) -> np.ndarray:
    """Bernoulli keep-mask: each pixel kept independently with p = sparsity."""
    if not 0.0 < sparsity <= 1.0:
        raise ValueError(f"sparsity must be in (0, 1], got {sparsity}")
    return (rng.uniform(h * w, 0.0, 1.0) < sparsity).reshape(h, w)


def add_gaussian_noise(rng: Rng, img: np.ndarray, sigma255: float) -> np.ndarray:
    """Add i.i.d. Gaussian noise with sigma given on the 0-255 scale.

    The result is not clamped; clamping happens only at image export.
    """
    if sigma255 < 0:
        raise ValueError(f"noise sigma must be >= 0, got {sigma255}")
    img = np.asarray(img, dtype=np.float64)
    noise = rng.normal(img.size, 0.0, sigma255 / 255.0).reshape(img.shape)
    return img + noise
