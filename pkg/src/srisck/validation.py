"""Input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np


def check_gray_image(img, name: str = "image", unit_range: bool = True) -> np.ndarray:
    """Validate a 2-D floating-point intensity image and return it as float64."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    if unit_range and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError(f"{name} intensities must lie in [0, 1]")
    return arr


def check_rgb_image(img, name: str = "image") -> np.ndarray:
    """Validate a 3-channel image given as an (H, W, 3) array or three equal-shape planes."""
    if isinstance(img, (list, tuple)):
        planes = [np.asarray(p, dtype=np.float64) for p in img]
        if len(planes) != 3:
            raise ValueError(f"{name} needs exactly 3 channels, got {len(planes)}")
        if planes[0].ndim != 2 or any(p.shape != planes[0].shape for p in planes):
            raise ValueError(f"{name} channel dimensions do not match")
        arr = np.stack(planes, axis=-1)
    else:
        arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"{name} must have shape (H, W, 3), got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_positive(value, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be finite and > 0, got {value}")
    return value


def check_odd_block_size(n, minimum: int = 5) -> int:
    n = int(n)
    if n < minimum or n % 2 == 0:
        raise ValueError(f"block size must be odd and >= {minimum}, got {n}")
    return n
