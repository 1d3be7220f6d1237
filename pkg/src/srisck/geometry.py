"""Circle geometry used by cross-scale suppression and region-overlap scoring."""

from __future__ import annotations

import numpy as np


def circle_intersection_area(d, r1, r2):
    """Area of intersection of two circles with center distance ``d`` and radii ``r1``, ``r2``.

    Fully vectorized; scalar inputs give a scalar back. Uses the two-circle
    lens formula, with the containment and disjoint cases handled exactly.
    """
    d, r1, r2 = np.broadcast_arrays(
        np.asarray(d, dtype=np.float64),
        np.asarray(r1, dtype=np.float64),
        np.asarray(r2, dtype=np.float64),
    )
    rmin = np.minimum(r1, r2)
    rmax = np.maximum(r1, r2)
    out = np.zeros(d.shape)

    contained = d <= rmax - rmin
    out[contained] = np.pi * rmin[contained] ** 2

    lens = ~contained & (d < r1 + r2)
    if lens.any():
        dd, a, b = d[lens], r1[lens], r2[lens]
        # clip guards acos against rounding at tangency
        cos_a = np.clip((dd * dd + a * a - b * b) / (2.0 * dd * a), -1.0, 1.0)
        cos_b = np.clip((dd * dd + b * b - a * a) / (2.0 * dd * b), -1.0, 1.0)
        kite = 0.5 * np.sqrt(
            np.maximum(0.0, (-dd + a + b) * (dd + a - b) * (dd - a + b) * (dd + a + b))
        )
        out[lens] = a * a * np.arccos(cos_a) + b * b * np.arccos(cos_b) - kite

    if out.ndim == 0:
        return float(out)
    return out
