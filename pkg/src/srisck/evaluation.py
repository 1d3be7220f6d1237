"""Repeatability evaluation under known homographies, plus deterministic
synthetic image pairs for self-contained benchmarking."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import circle_intersection_area
from .imaging import resize_bicubic, round_half_up


@dataclass(frozen=True, eq=False)
class Homography:
    """3x3 projective transform mapping image-A coordinates to image-B.

    Stored with the bottom-right entry normalized to 1.
    """

    matrix: np.ndarray

    @classmethod
    def from_matrix(cls, m) -> "Homography":
        m = np.asarray(m, dtype=np.float64)
        if m.shape != (3, 3):
            raise ValueError(f"homography must be 3x3, got shape {m.shape}")
        if abs(np.linalg.det(m)) <= 1e-12:
            raise ValueError("homography is not invertible")
        if abs(m[2, 2]) <= 1e-12:
            raise ValueError("cannot normalize: bottom-right entry is ~0")
        return cls(matrix=m / m[2, 2])

    @classmethod
    def identity(cls) -> "Homography":
        return cls.from_matrix(np.eye(3))

    def inverse(self) -> "Homography":
        return Homography.from_matrix(np.linalg.inv(self.matrix))

    def apply(self, points) -> np.ndarray:
        """Map (N, 2) points (x, y) through the transform."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        ones = np.ones((pts.shape[0], 1))
        hom = np.hstack([pts, ones]) @ self.matrix.T
        w = hom[:, 2]
        if (np.abs(w) < 1e-12).any():
            raise ValueError("point maps to infinity under the homography")
        return hom[:, :2] / w[:, None]


@dataclass(frozen=True)
class RegionMatch:
    index_a: int
    index_b: int
    overlap_error: float


@dataclass(frozen=True, eq=False)
class RepeatabilityResult:
    """Score in percent (None when the shared part is empty), the accepted
    matches, and the shared-region counts that form the denominator."""

    score: float | None
    matches: list
    count_a: int
    count_b: int

    @property
    def no_overlap(self) -> bool:
        return self.score is None


def _as_disk(region) -> tuple[float, float, float]:
    if hasattr(region, "x"):
        return float(region.x), float(region.y), float(region.size)
    cx, cy, r = region
    return float(cx), float(cy), float(r)


def project_region(region, h: Homography) -> tuple[float, float, float]:
    """Project a key-point disk through a homography.

    The center maps exactly; the radius scales by sqrt(|det J|) of the local
    affine approximation at the center (isotropic approximation of the true
    projected ellipse).
    """
    cx, cy, r = _as_disk(region)
    m = h.matrix
    w = m[2, 0] * cx + m[2, 1] * cy + m[2, 2]
    if abs(w) < 1e-12:
        raise ValueError("region center maps to infinity under the homography")
    u = (m[0, 0] * cx + m[0, 1] * cy + m[0, 2]) / w
    v = (m[1, 0] * cx + m[1, 1] * cy + m[1, 2]) / w
    j00 = (m[0, 0] - m[2, 0] * u) / w
    j01 = (m[0, 1] - m[2, 1] * u) / w
    j10 = (m[1, 0] - m[2, 0] * v) / w
    j11 = (m[1, 1] - m[2, 1] * v) / w
    det = j00 * j11 - j01 * j10
    return u, v, r * float(np.sqrt(abs(det)))


def overlap_error(disk_a, disk_b) -> float:
    """1 - intersection/union of two disks; 0 for identical, 1 for disjoint."""
    ax, ay, ar = _as_disk(disk_a)
    bx, by, br = _as_disk(disk_b)
    if ar <= 0 or br <= 0:
        raise ValueError("disk radii must be positive")
    d = float(np.hypot(bx - ax, by - ay))
    inter = circle_intersection_area(d, ar, br)
    union = np.pi * ar * ar + np.pi * br * br - inter
    return float(1.0 - inter / union)


def _inside(points: np.ndarray, shape) -> np.ndarray:
    if shape is None:
        return np.ones(points.shape[0], dtype=bool)
    h, w = shape
    x, y = points[:, 0], points[:, 1]
    return (x >= 0) & (x <= w - 1) & (y >= 0) & (y <= h - 1)


def repeatability(kps_a, kps_b, h: Homography, threshold: float = 0.4,
                  shape_a=None, shape_b=None) -> RepeatabilityResult:
    """Repeatability of two key-point sets related by a known homography.

    Key-points are restricted to the shared part (their projected centers
    must land inside the other image when shapes are given as (height,
    width)). Projected A-regions are matched one-to-one against B-regions
    greedily in ascending overlap-error order; pairs with error below
    ``threshold`` count as correspondences. The score is
    100 * matches / min(shared counts).
    """
    kps_a, kps_b = list(kps_a), list(kps_b)
    if not kps_a or not kps_b:
        raise ValueError("both key-point lists must be nonempty")
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")

    disks_a = [_as_disk(kp) for kp in kps_a]
    disks_b = [_as_disk(kp) for kp in kps_b]
    centers_a = np.array([(d[0], d[1]) for d in disks_a])
    centers_b = np.array([(d[0], d[1]) for d in disks_b])

    idx_a = np.nonzero(_inside(h.apply(centers_a), shape_b))[0]
    idx_b = np.nonzero(_inside(h.inverse().apply(centers_b), shape_a))[0]
    if idx_a.size == 0 or idx_b.size == 0:
        return RepeatabilityResult(score=None, matches=[], count_a=int(idx_a.size),
                                   count_b=int(idx_b.size))

    projected = [project_region(disks_a[i], h) for i in idx_a]
    pairs = []
    for pi, ia in enumerate(idx_a):
        for ib in idx_b:
            err = overlap_error(projected[pi], disks_b[ib])
            if err < threshold:
                pairs.append((err, int(ia), int(ib)))
    pairs.sort()

    used_a: set[int] = set()
    used_b: set[int] = set()
    matches = []
    for err, ia, ib in pairs:
        if ia in used_a or ib in used_b:
            continue
        used_a.add(ia)
        used_b.add(ib)
        matches.append(RegionMatch(index_a=ia, index_b=ib, overlap_error=err))

    score = 100.0 * len(matches) / min(idx_a.size, idx_b.size)
    return RepeatabilityResult(score=score, matches=matches,
                               count_a=int(idx_a.size), count_b=int(idx_b.size))


def synth_blobs(seed: int, shape=(200, 200), blob_count: int = 18) -> np.ndarray:
    """Deterministic textured test image: smooth gradients plus random
    Gaussian blobs, linearly rescaled into [0.1, 0.9] so gain/offset probes
    have headroom without clipping."""
    rng = np.random.default_rng(seed)
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    img = 0.2 * (xx / max(w - 1, 1)) + 0.15 * (yy / max(h - 1, 1))
    for _ in range(blob_count):
        cy = rng.uniform(0.12 * h, 0.88 * h)
        cx = rng.uniform(0.12 * w, 0.88 * w)
        radius = rng.uniform(0.03, 0.09) * min(h, w)
        amp = rng.uniform(0.5, 1.0) * rng.choice([-1.0, 1.0])
        img += amp * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2.0 * radius ** 2))
    lo, hi = img.min(), img.max()
    return 0.1 + 0.8 * (img - lo) / (hi - lo)


def synth_pair(seed: int, transform_kind: str, shape=(200, 200), scale: float = 0.8,
               gain: float = 0.7, offset: float = 0.1):
    """(image_a, image_b, homography) fixture for a known transform.

    ``rotation90`` rotates the square image by an exact quarter turn;
    ``scale`` resamples bicubically by ``scale``; ``gain_offset`` applies an
    intensity-only change (identity homography).
    """
    img_a = synth_blobs(seed, shape)
    if transform_kind == "rotation90":
        if shape[0] != shape[1]:
            raise ValueError("rotation90 fixture needs a square image")
        img_b = np.rot90(img_a, k=1).copy()
        n = shape[0]
        # quarter-turn about the image center: (x, y) -> (y, n - 1 - x)
        h = Homography.from_matrix([[0, 1, 0], [-1, 0, n - 1], [0, 0, 1]])
        return img_a, img_b, h
    if transform_kind == "scale":
        out = (round_half_up(shape[0] * scale), round_half_up(shape[1] * scale))
        img_b = resize_bicubic(img_a, out)
        sy = out[0] / shape[0]
        sx = out[1] / shape[1]
        # half-pixel-center resampling maps x to sx * x + (sx - 1) / 2
        h = Homography.from_matrix(
            [[sx, 0, (sx - 1) / 2], [0, sy, (sy - 1) / 2], [0, 0, 1]]
        )
        return img_a, img_b, h
    if transform_kind == "gain_offset":
        img_b = gain * img_a + offset
        if img_b.min() < 0.0 or img_b.max() > 1.0:
            raise ValueError("gain/offset pushes intensities outside [0, 1]")
        return img_a, img_b, Homography.identity()
    raise ValueError(
        f"unknown transform kind {transform_kind!r}; "
        "expected rotation90, scale or gain_offset"
    )
