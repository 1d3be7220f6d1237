"""Analytic block dictionaries: 2-D DCT-2 atoms, circular masking, rotation,
and assembly of the rotation-extended dictionary used by the sparse coder."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class CircularMask:
    """Pixels of an n-by-n block lying within n/2 of the block center.

    ``rows``/``cols`` list the in-circle coordinates in row-major order; this
    fixed order is shared by image blocks and dictionary atoms so that masked
    vectors are directly comparable.
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray

    @classmethod
    def for_block_size(cls, n: int) -> "CircularMask":
        n = int(n)
        if n < 2:
            raise ValueError(f"block size must be >= 2, got {n}")
        c = (n - 1) / 2.0
        yy, xx = np.mgrid[0:n, 0:n]
        inside = (yy - c) ** 2 + (xx - c) ** 2 <= (n / 2.0) ** 2
        rows, cols = np.nonzero(inside)
        return cls(n=n, rows=rows, cols=cols)

    @property
    def radius(self) -> float:
        return self.n / 2.0

    def __len__(self) -> int:
        return int(self.rows.size)

    def flat_indices(self) -> np.ndarray:
        return self.rows * self.n + self.cols

    def apply(self, block) -> np.ndarray:
        """Extract the in-circle elements of ``block`` as a vector (outside
        elements are dropped, not zeroed)."""
        block = np.asarray(block, dtype=np.float64)
        if block.shape != (self.n, self.n):
            raise ValueError(
                f"block shape {block.shape} does not match mask side {self.n}"
            )
        return block[self.rows, self.cols]

    def to_block(self, vector, fill: float = 0.0) -> np.ndarray:
        """Scatter a masked vector back into an n-by-n block (for inspection)."""
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (len(self),):
            raise ValueError(f"expected vector of length {len(self)}, got {vector.shape}")
        block = np.full((self.n, self.n), fill)
        block[self.rows, self.cols] = vector
        return block


def dct2_atom(n: int, p: int, q: int) -> np.ndarray:
    """Single 2-D DCT-2 basis block for 1-based frequency indices (p, q)."""
    if n < 2:
        raise ValueError(f"block size must be >= 2, got {n}")
    if not (1 <= p <= n and 1 <= q <= n):
        raise ValueError(f"atom indices must lie in [1, {n}], got ({p}, {q})")
    e = np.arange(1, n + 1, dtype=np.float64)
    ap = 1.0 / np.sqrt(n) if p == 1 else np.sqrt(2.0 / n)
    aq = 1.0 / np.sqrt(n) if q == 1 else np.sqrt(2.0 / n)
    ce = np.cos(np.pi * (2.0 * (e - 1.0) + 1.0) * (p - 1.0) / (2.0 * n))
    cf = np.cos(np.pi * (2.0 * (e - 1.0) + 1.0) * (q - 1.0) / (2.0 * n))
    return ap * aq * np.outer(ce, cf)


def dct2_basis(n: int) -> np.ndarray:
    """All n*n DCT-2 basis blocks; entry (p-1)*n + (q-1) holds the (p, q) atom."""
    atoms = np.empty((n * n, n, n))
    for p in range(1, n + 1):
        for q in range(1, n + 1):
            atoms[(p - 1) * n + (q - 1)] = dct2_atom(n, p, q)
    return atoms


def rotate_block(block, angle: float) -> np.ndarray:
    """Rotate a square block about its center by ``angle`` degrees.

    Multiples of 90 degrees use an exact grid permutation (no resampling);
    other angles use bilinear interpolation. Taps falling outside the source
    clamp to the nearest edge pixel: in-mask output pixels near the block
    boundary need taps just outside the square, and zero-filled taps would
    corrupt them.
    """
    block = np.asarray(block, dtype=np.float64)
    if block.ndim != 2 or block.shape[0] != block.shape[1]:
        raise ValueError(f"block must be square, got shape {block.shape}")
    ang = float(angle) % 360.0
    if ang % 90.0 == 0.0:
        return np.rot90(block, k=-int(round(ang / 90.0)) % 4).copy()

    n = block.shape[0]
    c = (n - 1) / 2.0
    yy, xx = np.mgrid[0:n, 0:n].astype(np.float64)
    th = np.deg2rad(ang)
    ys = c + (yy - c) * np.cos(th) - (xx - c) * np.sin(th)
    xs = c + (yy - c) * np.sin(th) + (xx - c) * np.cos(th)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    fy = ys - y0
    fx = xs - x0
    out = np.zeros_like(block)
    taps = (
        (0, 0, (1.0 - fy) * (1.0 - fx)),
        (0, 1, (1.0 - fy) * fx),
        (1, 0, fy * (1.0 - fx)),
        (1, 1, fy * fx),
    )
    for dy, dx, w in taps:
        yi = np.clip(y0 + dy, 0, n - 1)
        xi = np.clip(x0 + dx, 0, n - 1)
        out += w * block[yi, xi]
    return out


@dataclass(frozen=True, eq=False)
class ExtendedDictionary:
    """Rotation-extended dictionary of circularly-masked, unit-norm atom columns.

    Columns are ordered rotation-major: all base atoms at rotation 0, then all
    at one rotation step, and so on. ``blocks`` keeps the rotated source block
    behind each column for inspection and invariance checks.
    """

    columns: np.ndarray
    blocks: np.ndarray
    k: int
    beta: float
    symmetry_period: float
    mask: CircularMask
    gram: np.ndarray

    @property
    def n_columns(self) -> int:
        return int(self.columns.shape[1])

    @property
    def rotations(self) -> int:
        """Number of rotation slots actually stored after symmetry reduction."""
        return self.n_columns // self.k

    @property
    def v(self) -> int:
        """Conceptual rotation count for a full turn, 360 / beta."""
        return int(round(360.0 / self.beta))

    def circular_shift(self, alpha, steps: int) -> np.ndarray:
        """Coefficients re-indexed for content rotated by ``steps`` rotation
        slots; the shift is atom-wise and wraps within the stored rotation
        group (valid when atoms carry the declared rotational symmetry)."""
        alpha = np.asarray(alpha, dtype=np.float64)
        if alpha.shape != (self.n_columns,):
            raise ValueError(f"expected {self.n_columns} coefficients, got {alpha.shape}")
        grouped = alpha.reshape(self.rotations, self.k)
        return np.roll(grouped, int(steps) % self.rotations, axis=0).reshape(-1)


def build_extended_dictionary(base, beta: float, symmetry_period: float,
                              mask: CircularMask) -> ExtendedDictionary:
    """Assemble the extended dictionary from base atom blocks.

    Each base atom is rotated to 0, beta, ..., symmetry_period - beta degrees;
    rotations beyond the symmetry period would duplicate existing columns and
    are omitted. Every rotated block is masked, mean-centred and normalized to
    unit L2 norm. The declared ``symmetry_period`` is trusted, not detected.
    """
    beta = float(beta)
    symmetry_period = float(symmetry_period)
    if beta <= 0 or symmetry_period <= 0:
        raise ValueError("beta and symmetry_period must be > 0")
    ratio = symmetry_period / beta
    if abs(ratio - round(ratio)) > 1e-9:
        raise ValueError(
            f"beta ({beta}) must divide symmetry_period ({symmetry_period})"
        )
    turns = 360.0 / symmetry_period
    if abs(turns - round(turns)) > 1e-9:
        raise ValueError(f"symmetry_period ({symmetry_period}) must divide 360")

    base = [np.asarray(atom, dtype=np.float64) for atom in base]
    if not base:
        raise ValueError("need at least one base atom")
    rotations = int(round(ratio))
    cols = []
    blocks = []
    for u in range(rotations):
        angle = u * beta
        for atom in base:
            block = rotate_block(atom, angle)
            vec = mask.apply(block)
            vec = vec - vec.mean()
            norm = float(np.linalg.norm(vec))
            if norm < 1e-12:
                raise ValueError("atom is flat inside the circular mask")
            cols.append(vec / norm)
            blocks.append(block)
    columns = np.stack(cols, axis=1)
    return ExtendedDictionary(
        columns=columns,
        blocks=np.stack(blocks),
        k=len(base),
        beta=beta,
        symmetry_period=symmetry_period,
        mask=mask,
        gram=columns.T @ columns,
    )


def ext_dct2_dictionary(n: int, p: int = 3, q: int = 3, beta: float = 10.0,
                        symmetry_period: float = 90.0) -> ExtendedDictionary:
    """Extended dictionary seeded by a single diagonal DCT-2 atom.

    The default (p, q) = (3, 3) atom is exactly symmetric under 90-degree
    rotation inside the circular mask, so rotations covering one quarter turn
    suffice for full 360-degree coverage.
    """
    mask = CircularMask.for_block_size(n)
    return build_extended_dictionary(
        [dct2_atom(n, p, q)], beta=beta, symmetry_period=symmetry_period, mask=mask
    )
