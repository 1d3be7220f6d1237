"""Grayscale conversion, low-pass filtering, bicubic resampling and image pyramids."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .validation import check_gray_image, check_rgb_image

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def to_grayscale(rgb, weights=LUMA_WEIGHTS) -> np.ndarray:
    """Weighted channel sum; weights must be nonnegative and sum to 1."""
    arr = check_rgb_image(rgb)
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (3,):
        raise ValueError(f"expected 3 channel weights, got shape {w.shape}")
    if (w < 0).any() or abs(float(w.sum()) - 1.0) > 1e-9:
        raise ValueError("channel weights must be nonnegative and sum to 1")
    return arr @ w


def gaussian_kernel(sigma: float) -> np.ndarray:
    """1-D Gaussian taps over [-ceil(3*sigma), +ceil(3*sigma)], renormalized to sum 1."""
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(img, sigma: float) -> np.ndarray:
    """Separable Gaussian low-pass filter with edge replication at the borders.

    ``sigma == 0`` returns the image unchanged.
    """
    img = check_gray_image(img, unit_range=False)
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return img.copy()
    k = gaussian_kernel(sigma)
    out = correlate1d(img, k, axis=0, mode="nearest")
    return correlate1d(out, k, axis=1, mode="nearest")


def _cubic_weights(x: np.ndarray) -> np.ndarray:
    # Keys convolution kernel, a = -0.5
    ax = np.abs(x)
    near = (1.5 * ax - 2.5) * ax * ax + 1.0
    far = ((-0.5 * ax + 2.5) * ax - 4.0) * ax + 2.0
    return np.where(ax <= 1.0, near, np.where(ax < 2.0, far, 0.0))


def _resize_axis(img: np.ndarray, out_len: int, axis: int) -> np.ndarray:
    in_len = img.shape[axis]
    if out_len == in_len:
        return img
    # half-pixel-center convention: output pixel i samples (i + 0.5) * in/out - 0.5
    src = (np.arange(out_len, dtype=np.float64) + 0.5) * (in_len / out_len) - 0.5
    base = np.floor(src).astype(np.int64)
    t = src - base
    shape = [1, 1]
    shape[axis] = out_len
    total = None
    for k in (-1, 0, 1, 2):
        idx = np.clip(base + k, 0, in_len - 1)  # clamp = edge replication
        w = _cubic_weights(t - k).reshape(shape)
        part = w * np.take(img, idx, axis=axis)
        total = part if total is None else total + part
    return total


def resize_bicubic(img, out_shape) -> np.ndarray:
    """Separable bicubic (Keys) resampling to ``out_shape`` = (height, width)."""
    img = check_gray_image(img, unit_range=False)
    oh, ow = int(out_shape[0]), int(out_shape[1])
    if oh < 1 or ow < 1:
        raise ValueError(f"output shape must be positive, got {(oh, ow)}")
    return _resize_axis(_resize_axis(img, oh, 0), ow, 1)


@dataclass(frozen=True, eq=False)
class Pyramid:
    """Ordered image levels; ``levels[0]`` is the input-sized base (level 1)."""

    levels: list
    scale_factor: float

    def __len__(self) -> int:
        return len(self.levels)

    def level(self, number: int) -> np.ndarray:
        """Level image by 1-based level number."""
        if number < 1:
            raise ValueError(f"levels are numbered from 1, got {number}")
        return self.levels[number - 1]


def build_pyramid(img, sf: float, n: int) -> Pyramid:
    """Repeatedly resample by ``sf`` (round-half-up dims) while min(dims) stays >= ``n``.

    Each level is produced from the previous one by bicubic resampling; the
    base level is the input image itself.
    """
    img = check_gray_image(img, unit_range=False)
    if not 0.0 < sf < 1.0:
        raise ValueError(f"scale factor must lie in (0, 1), got {sf}")
    if min(img.shape) < n:
        raise ValueError(
            f"image {img.shape} is smaller than the block size {n}"
        )
    levels = [img]
    h, w = img.shape
    while True:
        nh, nw = round_half_up(h * sf), round_half_up(w * sf)
        if min(nh, nw) < n:
            break
        levels.append(resize_bicubic(levels[-1], (nh, nw)))
        h, w = nh, nw
    return Pyramid(levels=levels, scale_factor=float(sf))
