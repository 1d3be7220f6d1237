"""Block normalization and the elastic-net sparse coder, plus the complexity
and strength measures derived from a code."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dictionary import ExtendedDictionary

DEFAULT_NONZERO_EPSILON = 1e-8
DEFAULT_TOL = 1e-10
DEFAULT_MAX_SWEEPS = 10_000
FLAT_NORM_FLOOR = 1e-12


class FlatBlockError(ValueError):
    """Masked block has (near-)zero variance and cannot be normalized.

    Callers scanning an image treat such positions as "no key-point here"
    (complexity 0) instead of failing the whole scan.
    """


class ConvergenceError(RuntimeError):
    """Coordinate descent hit the sweep cap before reaching tolerance."""

    def __init__(self, sweeps: int, unconverged: int = 1):
        self.sweeps = sweeps
        self.unconverged = unconverged
        super().__init__(
            f"elastic net failed to converge within {sweeps} sweeps "
            f"({unconverged} block(s) still active)"
        )


@dataclass(frozen=True, eq=False)
class SparseCode:
    """Elastic-net coefficients with the threshold that defines 'nonzero'."""

    alpha: np.ndarray
    nonzero_epsilon: float = DEFAULT_NONZERO_EPSILON


def normalize_block(masked) -> np.ndarray:
    """Zero-mean, unit-amplitude normalization of a masked block vector.

    Raises FlatBlockError when the centred vector has norm below 1e-12; gain
    and offset changes of the input (a * v + b, a > 0) leave the result
    unchanged, which is what makes the downstream measures illumination
    invariant.
    """
    v = np.asarray(masked, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a nonempty vector, got shape {v.shape}")
    centred = v - v.mean()
    norm = float(np.linalg.norm(centred))
    if norm < FLAT_NORM_FLOOR:
        raise FlatBlockError("block is flat inside the mask")
    return centred / norm


def _cd_batch(corr: np.ndarray, gram: np.ndarray, lambda1: float, lambda2: float,
              tol: float = DEFAULT_TOL, max_sweeps: int = DEFAULT_MAX_SWEEPS) -> np.ndarray:
    """Cyclic coordinate descent on the gram form, all rows at once.

    ``corr`` holds dictionary correlations (one row per block). Every update
    is elementwise per row, and each row freezes independently once its own
    largest coefficient change drops below ``tol``, so a row's result is
    bit-identical no matter how blocks are batched or chunked across workers.
    """
    n_rows, n_atoms = corr.shape
    alpha = np.zeros((n_rows, n_atoms))
    diag = np.diag(gram).copy()
    active = np.arange(n_rows)
    for _ in range(max_sweeps):
        if active.size == 0:
            return alpha
        a = alpha[active]
        c = corr[active]
        delta = np.zeros(active.size)
        for j in range(n_atoms):
            # fixed-order accumulation keeps per-row arithmetic reproducible
            r = c[:, j].copy()
            for k in range(n_atoms):
                if k != j:
                    r -= gram[k, j] * a[:, k]
            new = np.sign(r) * np.maximum(np.abs(r) - lambda1, 0.0) / (diag[j] + lambda2)
            np.maximum(delta, np.abs(new - a[:, j]), out=delta)
            a[:, j] = new
        alpha[active] = a
        active = active[delta >= tol]
    if active.size:
        raise ConvergenceError(max_sweeps, int(active.size))
    return alpha


def elastic_net(y, ed: ExtendedDictionary, lambda1: float, lambda2: float,
                tol: float = DEFAULT_TOL, max_sweeps: int = DEFAULT_MAX_SWEEPS,
                nonzero_epsilon: float = DEFAULT_NONZERO_EPSILON) -> SparseCode:
    """Solve min_a 0.5*||y - D a||^2 + lambda1*||a||_1 + (lambda2/2)*||a||^2.

    Both penalties must be strictly positive; the ridge term makes the
    objective strictly convex, so the minimizer is unique and independent of
    the zero initialization. Soft-thresholding produces exact zeros, so the
    nonzero threshold only guards accumulated drift.
    """
    y = np.asarray(y, dtype=np.float64)
    if lambda1 <= 0 or lambda2 <= 0:
        raise ValueError("lambda1 and lambda2 must be > 0")
    if y.ndim != 1 or y.shape[0] != ed.columns.shape[0]:
        raise ValueError(
            f"vector length {y.shape} does not match dictionary rows "
            f"{ed.columns.shape[0]}"
        )
    corr = (y @ ed.columns)[None, :]
    alpha = _cd_batch(corr, ed.gram, lambda1, lambda2, tol, max_sweeps)[0]
    return SparseCode(alpha=alpha, nonzero_epsilon=nonzero_epsilon)


def complexity_measure(code: SparseCode) -> int:
    """Count of coefficients whose magnitude exceeds the nonzero threshold."""
    return int(np.count_nonzero(np.abs(code.alpha) > code.nonzero_epsilon))


def strength_measure(code: SparseCode) -> float:
    """Complexity multiplied by the L1 mass of the above-threshold coefficients."""
    mag = np.abs(code.alpha)
    nz = mag > code.nonzero_epsilon
    return float(nz.sum() * mag[nz].sum())


def kkt_violation(y, ed: ExtendedDictionary, code: SparseCode,
                  lambda1: float, lambda2: float) -> float:
    """Largest optimality-condition violation of a solved code.

    For coefficients at zero the dictionary correlation of the residual must
    stay within lambda1; for active coefficients it must equal
    lambda1 * sign(alpha_j) after removing the ridge term. Returns the max
    absolute violation (0 for an exact solution).
    """
    y = np.asarray(y, dtype=np.float64)
    alpha = code.alpha
    grad = ed.columns.T @ (y - ed.columns @ alpha) - lambda2 * alpha
    nz = np.abs(alpha) > code.nonzero_epsilon
    worst = 0.0
    if (~nz).any():
        worst = max(worst, float(np.max(np.abs(grad[~nz]) - lambda1)))
    if nz.any():
        worst = max(worst, float(np.max(np.abs(grad[nz] - lambda1 * np.sign(alpha[nz])))))
    return max(worst, 0.0)
