"""Image and trace file I/O.

Images travel as 8-bit PNG or binary PPM/PGM; in memory they are H x W x C
float64 arrays with values byte/255.  Saving clamps to [0, 1] and quantizes
with round-half-away-from-zero.  Masks are exchanged as 8-bit grayscale
images where byte >= 128 means "keep".
"""

from __future__ import annotations

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError

from .restoration import TrainTrace

__all__ = [
    "ImageFormatError",
    "UnsupportedBitDepthError",
    "load_image",
    "save_image",
    "load_mask",
    "save_mask",
    "write_trace",
]

_FORMATS = {"PNG", "PPM"}  # Pillow reports binary PGM under "PPM"


class ImageFormatError(ValueError):
    """Unreadable, truncated, or unsupported image file."""


class UnsupportedBitDepthError(ImageFormatError):
    """Image uses a sample depth other than 8 bits."""


def load_image(path) -> np.ndarray:
    """Load an 8-bit PNG or binary PPM/PGM as an H x W x C array in [0, 1]."""
    try:
        with PILImage.open(path) as im:
            if im.format not in _FORMATS:
                raise ImageFormatError(
                    f"{path}: unsupported format {im.format!r} (need PNG or PPM/PGM)"
                )
            if im.mode.startswith("I") or im.mode == "F":
                raise UnsupportedBitDepthError(
                    f"{path}: only 8-bit samples are supported (mode {im.mode!r})"
                )
            if im.mode == "P":
                im = im.convert("RGB")
            if im.mode not in ("L", "RGB"):
                raise ImageFormatError(
                    f"{path}: unsupported channel layout {im.mode!r} "
                    "(need 1- or 3-channel 8-bit)"
                )
            data = np.asarray(im, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"{path}: not a recognizable image file") from exc
    except OSError as exc:
        if isinstance(exc, FileNotFoundError):
            raise
        raise ImageFormatError(f"{path}: truncated or corrupt image ({exc})") from exc
    out = data.astype(np.float64) / 255.0
    if out.ndim == 2:
        out = out[:, :, None]
    return out


def quantize(img: np.ndarray) -> np.ndarray:
    """Clamp to [0, 1] and quantize to bytes, rounding half away from zero."""
    img = np.asarray(img, dtype=np.float64)
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains NaN or Inf; refusing to quantize")
    clamped = np.clip(img, 0.0, 1.0)
    return np.floor(clamped * 255.0 + 0.5).astype(np.uint8)


def save_image(img: np.ndarray, path) -> None:
    """Write an H x W x C array as PNG or binary PPM/PGM (by extension)."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    if img.ndim != 3 or img.shape[2] not in (1, 3):
        raise ValueError(f"image must be H x W x 1 or H x W x 3, got {img.shape}")
    data = quantize(img)
    suffix = str(path).lower().rsplit(".", 1)
    ext = suffix[1] if len(suffix) == 2 else ""
    if ext == "png":
        fmt = "PNG"
    elif ext in ("ppm", "pgm"):
        fmt = "PPM"
        if ext == "pgm" and img.shape[2] != 1:
            raise ValueError("PGM holds a single channel; image has 3")
        if ext == "ppm" and img.shape[2] != 3:
            raise ValueError("PPM holds three channels; image has 1")
    else:
        raise ValueError(f"{path}: unknown image extension (use .png/.ppm/.pgm)")
    if data.shape[2] == 1:
        pil = PILImage.fromarray(data[:, :, 0], mode="L")
    else:
        pil = PILImage.fromarray(data, mode="RGB")
    pil.save(path, format=fmt)


def load_mask(path) -> np.ndarray:
    """Load a keep-mask from an 8-bit grayscale image (byte >= 128 keeps)."""
    img = load_image(path)
    if img.shape[2] == 3:
        if not (img[:, :, 0] == img[:, :, 1]).all() or not (
            img[:, :, 0] == img[:, :, 2]
        ).all():
            raise ImageFormatError(
                f"{path}: mask must be grayscale (channels differ)"
            )
        img = img[:, :, :1]
    return img[:, :, 0] >= (128.0 / 255.0)


def save_mask(keep: np.ndarray, path) -> None:
    """Write a boolean keep-mask as an 8-bit grayscale image (255 = keep)."""
    keep = np.asarray(keep, dtype=bool)
    save_image(keep.astype(np.float64)[:, :, None], path)


def write_trace(trace: TrainTrace, path, n_tasks: int | None = None) -> None:
    """Write a training trace as CSV: ``iter,loss,psnr_ref,psnr_obs_k...``.

    Floats are written with full round-trip precision; infinite PSNR
    serializes as ``inf`` and a missing reference leaves psnr_ref empty.
    ``n_tasks`` sets the psnr_obs column count for empty traces (default 1,
    or inferred from the rows).
    """
    if n_tasks is None:
        n_tasks = len(trace.rows[0].psnr_obs) if trace.rows else 1
    header = "iter,loss,psnr_ref" + "".join(f",psnr_obs_{k}" for k in range(n_tasks))
    lines = [header]
    for row in trace.rows:
        ref = "" if row.psnr_ref is None else repr(row.psnr_ref)
        obs = ",".join(repr(v) for v in row.psnr_obs)
        lines.append(f"{row.iteration},{row.loss!r},{ref},{obs}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
