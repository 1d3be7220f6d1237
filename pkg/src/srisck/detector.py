"""The SRI-SCK detection pipeline: per-level complexity/strength maps,
non-max suppression, sub-pixel refinement, size assignment and cross-scale
selection, plus a functional ``detect`` entry point."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.ndimage import maximum_filter

from .dictionary import ExtendedDictionary, ext_dct2_dictionary
from .geometry import circle_intersection_area
from .imaging import LUMA_WEIGHTS, build_pyramid, gaussian_blur, to_grayscale
from .sparse_solver import (
    DEFAULT_MAX_SWEEPS,
    DEFAULT_NONZERO_EPSILON,
    DEFAULT_TOL,
    FLAT_NORM_FLOOR,
    _cd_batch,
)
from .validation import check_gray_image, check_odd_block_size, check_positive

SQRT2 = math.sqrt(2.0)

# blocks per unit of scan work; fixed so results never depend on worker count
_SCAN_CHUNK = 4096

SM_NORMALIZATIONS = ("identity", "multiply_by_size")
SIZE_RULES = ("sqrt2over4", "eq3")


@dataclass
class DetectorConfig:
    """Detector parameters.

    The named presets reproduce the two reference configurations; everything
    else carries the documented defaults.
    """

    n: int = 21
    lambda1: float = 0.125
    lambda2: float = 0.375
    sf: float = 0.8
    cm_lower: int | None = None
    cm_upper: int | None = None
    max_keypoints: int = 1000
    nms_radius: int = 5
    overlap_suppress_threshold: float = 0.3
    sm_normalization: str = "identity"
    s1_factor: str = "sqrt2over4"
    blur_sigma: float = 0.8
    sm_presmooth: bool = False
    sm_presmooth_sigma: float = 1.0
    atom_p: int = 3
    atom_q: int = 3
    beta: float = 10.0
    symmetry_period: float = 90.0
    grayscale_weights: tuple = LUMA_WEIGHTS
    nonzero_epsilon: float = DEFAULT_NONZERO_EPSILON
    workers: int | None = None

    def validate(self) -> "DetectorConfig":
        check_odd_block_size(self.n)
        check_positive(self.lambda1, "lambda1")
        check_positive(self.lambda2, "lambda2")
        if not 0.0 < self.sf < 1.0:
            raise ValueError(f"scale factor must lie in (0, 1), got {self.sf}")
        for name in ("cm_lower", "cm_upper"):
            v = getattr(self, name)
            if v is not None and int(v) < 0:
                raise ValueError(f"{name} must be >= 0, got {v}")
        if (
            self.cm_lower is not None
            and self.cm_upper is not None
            and self.cm_lower > self.cm_upper
        ):
            raise ValueError("cm_lower must not exceed cm_upper")
        if int(self.max_keypoints) < 1:
            raise ValueError(f"max_keypoints must be >= 1, got {self.max_keypoints}")
        if int(self.nms_radius) < 1:
            raise ValueError(f"nms_radius must be >= 1, got {self.nms_radius}")
        if not 0.0 <= self.overlap_suppress_threshold <= 1.0:
            raise ValueError(
                "overlap_suppress_threshold must lie in [0, 1], "
                f"got {self.overlap_suppress_threshold}"
            )
        if self.sm_normalization not in SM_NORMALIZATIONS:
            raise ValueError(
                f"sm_normalization must be one of {SM_NORMALIZATIONS}, "
                f"got {self.sm_normalization!r}"
            )
        if self._size_rule() not in SIZE_RULES:
            raise ValueError(
                f"s1_factor must be one of {SIZE_RULES}, got {self.s1_factor!r}"
            )
        if self.blur_sigma < 0:
            raise ValueError(f"blur_sigma must be >= 0, got {self.blur_sigma}")
        check_positive(self.nonzero_epsilon, "nonzero_epsilon")
        if self.workers is not None and int(self.workers) < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        return self

    def _size_rule(self) -> str:
        return str(self.s1_factor).replace("_", "")

    def replace(self, **changes) -> "DetectorConfig":
        return replace(self, **changes)


PRESETS = {
    "sri-sck-1": {"n": 21, "lambda1": 0.125, "lambda2": 0.375},
    "sri-sck-2": {"n": 25, "lambda1": 0.0625, "lambda2": 0.1875},
}


def preset_config(name: str, **overrides) -> DetectorConfig:
    """DetectorConfig for a named preset, optionally with field overrides."""
    try:
        params = dict(PRESETS[name])
    except KeyError:
        raise ValueError(
            f"unknown preset {name!r}; available: {sorted(PRESETS)}"
        ) from None
    params.update(overrides)
    return DetectorConfig(**params)


def build_dictionary(cfg: DetectorConfig) -> ExtendedDictionary:
    """Extended dictionary matching the configured block size and atom choice."""
    return ext_dct2_dictionary(
        cfg.n, p=cfg.atom_p, q=cfg.atom_q,
        beta=cfg.beta, symmetry_period=cfg.symmetry_period,
    )


@dataclass(frozen=True)
class KeyPoint:
    """Detected key-point in level-1 (input image) coordinates.

    ``x`` is the column and ``y`` the row, both sub-pixel. ``size`` is the
    disk radius in level-1 pixels and ``sigma`` the descriptor scale
    size / sqrt(2).
    """

    x: float
    y: float
    level: int
    size: float
    sigma: float
    sm: float
    cm: int


@dataclass(frozen=True, eq=False)
class SMMap:
    """Per-level strength and complexity maps aligned with the level image.

    Values inside the border ``margin`` (where a block would not fit) are
    undefined and stored as zero.
    """

    sm: np.ndarray
    cm: np.ndarray
    margin: int


def _resolve_workers(requested: int | None) -> int:
    workers = 1 if requested is None else int(requested)
    cap = os.environ.get("SRISCK_THREADS")
    if cap:
        workers = min(workers, max(1, int(cap)))
    return max(1, workers)


def scan_level(img, ed: ExtendedDictionary, cfg: DetectorConfig) -> SMMap:
    """Dense scan of one pyramid level.

    Every pixel whose n-by-n block fits inside the image gets the block
    circularly masked, normalized and elastic-net coded; flat blocks and
    positions outside the configured complexity range get strength 0.
    """
    img = check_gray_image(img, unit_range=False)
    n = cfg.n
    if ed.mask.n != n:
        raise ValueError(f"dictionary block size {ed.mask.n} != config n {n}")
    if img.shape[0] < n or img.shape[1] < n:
        raise ValueError(f"image {img.shape} is smaller than the block size {n}")
    half = n // 2
    windows = sliding_window_view(img, (n, n))
    n_rows, n_cols = windows.shape[:2]
    flat_idx = ed.mask.flat_indices()
    sm = np.zeros(img.shape)
    cm = np.zeros(img.shape, dtype=np.int64)
    rows_per_job = max(1, _SCAN_CHUNK // n_cols)

    def run(r0: int) -> None:
        r1 = min(r0 + rows_per_job, n_rows)
        x = windows[r0:r1].reshape((r1 - r0) * n_cols, n * n)[:, flat_idx]
        mu = x.mean(axis=1)
        x = x - mu[:, None]
        norms = np.sqrt(np.einsum("ij,ij->i", x, x))
        coded = norms >= FLAT_NORM_FLOOR
        alpha = np.zeros((x.shape[0], ed.n_columns))
        if coded.any():
            yn = x[coded] / norms[coded, None]
            alpha[coded] = _cd_batch(
                yn @ ed.columns, ed.gram, cfg.lambda1, cfg.lambda2,
                DEFAULT_TOL, DEFAULT_MAX_SWEEPS,
            )
        mag = np.abs(alpha)
        nz = mag > cfg.nonzero_epsilon
        cm_v = nz.sum(axis=1)
        sm_v = cm_v * np.where(nz, mag, 0.0).sum(axis=1)
        if cfg.cm_lower is not None:
            sm_v[cm_v < cfg.cm_lower] = 0.0
        if cfg.cm_upper is not None:
            sm_v[cm_v > cfg.cm_upper] = 0.0
        sm[half + r0:half + r1, half:half + n_cols] = sm_v.reshape(r1 - r0, n_cols)
        cm[half + r0:half + r1, half:half + n_cols] = cm_v.reshape(r1 - r0, n_cols)

    jobs = list(range(0, n_rows, rows_per_job))
    workers = _resolve_workers(cfg.workers)
    if workers <= 1 or len(jobs) <= 1:
        for r0 in jobs:
            run(r0)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, jobs))
    return SMMap(sm=sm, cm=cm, margin=half)


def non_max_suppression(sm_map, radius: int) -> list[tuple[int, int]]:
    """Pixel-accurate peaks of a strength map.

    A pixel survives iff its strength is positive and not exceeded anywhere
    within the Chebyshev ``radius``; equal-valued contenders are resolved by
    scan order (row, then column), keeping the first.
    """
    sm = sm_map.sm if isinstance(sm_map, SMMap) else np.asarray(sm_map, dtype=np.float64)
    radius = int(radius)
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    window_max = maximum_filter(sm, size=2 * radius + 1, mode="constant", cval=0.0)
    peaks = []
    for i, j in np.argwhere((sm > 0.0) & (sm >= window_max)):
        r0, c0 = max(0, i - radius), max(0, j - radius)
        win = sm[r0:i + radius + 1, c0:j + radius + 1]
        first = np.argwhere(win == sm[i, j])[0]
        if first[0] + r0 == i and first[1] + c0 == j:
            peaks.append((int(i), int(j)))
    return peaks


def subpixel_offset(sm_minus: float, sm_0: float, sm_plus: float) -> float:
    """Vertex offset of the parabola through (-1, 0, +1) strength samples.

    Degenerate fits (flat triple, or a vertex outside [-0.5, 0.5]) fall back
    to 0.
    """
    denom = 4.0 * sm_0 - 2.0 * (sm_plus + sm_minus)
    if abs(denom) < 1e-12:
        return 0.0
    offset = (sm_plus - sm_minus) / denom
    if not -0.5 <= offset <= 0.5:
        return 0.0
    return offset


def base_size(cfg: DetectorConfig) -> float:
    """Key-point radius at level 1 under the configured size rule."""
    if cfg._size_rule() == "eq3":
        return (cfg.n / 2.0) * SQRT2
    return (SQRT2 / 4.0) * cfg.n


def assign_size_scale(level: int, cfg: DetectorConfig) -> tuple[float, float]:
    """(size, descriptor scale) for a key-point detected at a pyramid level."""
    if level < 1:
        raise ValueError(f"levels are numbered from 1, got {level}")
    size = base_size(cfg) / cfg.sf ** (level - 1)
    return size, size / SQRT2


def normalized_strength(kp: KeyPoint, cfg: DetectorConfig) -> float:
    """Strength used for cross-scale comparison under the configured hook."""
    if cfg.sm_normalization == "multiply_by_size":
        return kp.sm * kp.size
    return kp.sm


def cross_scale_suppress(candidates: list[KeyPoint], cfg: DetectorConfig) -> list[KeyPoint]:
    """Keep only key-points not dominated by a stronger overlapping one.

    Key-points are disks of radius ``size``; a candidate is removed when some
    strictly stronger candidate (by normalized strength) overlaps it by at
    least ``overlap_suppress_threshold`` of the smaller disk. Survivors come
    back sorted by normalized strength (ties: level, row, column) and capped
    at ``max_keypoints``.
    """
    if not candidates:
        return []
    nsm = np.array([normalized_strength(kp, cfg) for kp in candidates])
    xs = np.array([kp.x for kp in candidates])
    ys = np.array([kp.y for kp in candidates])
    radii = np.array([kp.size for kp in candidates])
    order = sorted(
        range(len(candidates)),
        key=lambda i: (-nsm[i], candidates[i].level, candidates[i].y, candidates[i].x),
    )
    survivors = []
    for i in order:
        stronger = nsm > nsm[i]
        if stronger.any():
            dist = np.hypot(xs[stronger] - xs[i], ys[stronger] - ys[i])
            other = radii[stronger]
            inter = circle_intersection_area(dist, radii[i], other)
            smaller = np.pi * np.minimum(radii[i], other) ** 2
            if (inter / smaller >= cfg.overlap_suppress_threshold).any():
                continue
        survivors.append(candidates[i])
        if len(survivors) >= cfg.max_keypoints:
            break
    return survivors


def detect(image, ed: ExtendedDictionary | None = None,
           cfg: DetectorConfig | None = None) -> list[KeyPoint]:
    """Run the full pipeline on a grayscale or RGB image.

    Grayscale conversion (if needed), pyramid construction, per-level blur,
    dense coding, non-max suppression, sub-pixel refinement, size assignment,
    mapping to level-1 coordinates and cross-scale suppression. Output order
    is deterministic: normalized strength descending, ties by level then row
    then column.
    """
    cfg = (cfg or DetectorConfig()).validate()
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim == 3:
        gray = check_gray_image(to_grayscale(arr, cfg.grayscale_weights))
    else:
        gray = check_gray_image(arr)
    if ed is None:
        ed = build_dictionary(cfg)
    elif ed.mask.n != cfg.n:
        raise ValueError(f"dictionary block size {ed.mask.n} != config n {cfg.n}")

    pyramid = build_pyramid(gray, cfg.sf, cfg.n)
    base_h, base_w = pyramid.levels[0].shape
    candidates: list[KeyPoint] = []
    for level, level_img in enumerate(pyramid.levels, start=1):
        level_map = scan_level(gaussian_blur(level_img, cfg.blur_sigma), ed, cfg)
        sm = level_map.sm
        if cfg.sm_presmooth:
            sm = gaussian_blur(sm, cfg.sm_presmooth_sigma)
            # smoothing bleeds into the undefined border; keep it undefined
            m = level_map.margin
            sm[:m, :] = 0.0
            sm[-m:, :] = 0.0
            sm[:, :m] = 0.0
            sm[:, -m:] = 0.0
        size, sigma = assign_size_scale(level, cfg)
        # pixel-center mapping of the resampling chain; telescopes exactly
        # through all levels, so corresponding content keeps one base position
        lh, lw = level_img.shape
        sy, sx = base_h / lh, base_w / lw
        for i, j in non_max_suppression(sm, cfg.nms_radius):
            dr = subpixel_offset(sm[i - 1, j], sm[i, j], sm[i + 1, j])
            dc = subpixel_offset(sm[i, j - 1], sm[i, j], sm[i, j + 1])
            candidates.append(
                KeyPoint(
                    x=(j + dc + 0.5) * sx - 0.5,
                    y=(i + dr + 0.5) * sy - 0.5,
                    level=level,
                    size=size,
                    sigma=sigma,
                    sm=float(sm[i, j]),
                    cm=int(level_map.cm[i, j]),
                )
            )
    return cross_scale_suppress(candidates, cfg)
