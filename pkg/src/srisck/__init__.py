"""SRI-SCK: scale- and rotation-invariant key-point detection by sparse coding."""

from __future__ import annotations

import importlib

from .detector import (
    PRESETS,
    DetectorConfig,
    KeyPoint,
    SMMap,
    assign_size_scale,
    base_size,
    build_dictionary,
    cross_scale_suppress,
    detect,
    non_max_suppression,
    normalized_strength,
    preset_config,
    scan_level,
    subpixel_offset,
)
from .dictionary import (
    CircularMask,
    ExtendedDictionary,
    build_extended_dictionary,
    dct2_atom,
    dct2_basis,
    ext_dct2_dictionary,
    rotate_block,
)
from .evaluation import (
    Homography,
    RegionMatch,
    RepeatabilityResult,
    overlap_error,
    project_region,
    repeatability,
    synth_blobs,
    synth_pair,
)
from .imaging import (
    LUMA_WEIGHTS,
    Pyramid,
    build_pyramid,
    gaussian_blur,
    gaussian_kernel,
    resize_bicubic,
    to_grayscale,
)
from .sparse_solver import (
    ConvergenceError,
    FlatBlockError,
    SparseCode,
    complexity_measure,
    elastic_net,
    kkt_violation,
    normalize_block,
    strength_measure,
)

__version__ = "0.1.0"

# the sklearn-backed estimator is imported lazily to keep CLI startup light
_LAZY = {"SRISCKDetector": "srisck.estimator"}


def __getattr__(name: str):
    if name in _LAZY:
        return getattr(importlib.import_module(_LAZY[name]), name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted(list(globals()) + list(_LAZY))
