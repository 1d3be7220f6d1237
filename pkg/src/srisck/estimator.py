"""Scikit-learn style wrapper so the detector composes with pipelines,
``get_params``/``set_params`` and ``clone``."""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .detector import PRESETS, DetectorConfig, build_dictionary, detect
from .imaging import LUMA_WEIGHTS
from .sparse_solver import DEFAULT_NONZERO_EPSILON


class SRISCKDetector(TransformerMixin, BaseEstimator):
    """Scale- and rotation-invariant sparse-coding key-point detector.

    The dictionary is analytic, so ``fit`` takes no data: it validates the
    parameters and builds the rotation-extended dictionary once. ``detect``
    runs the pipeline on a single image; ``transform`` maps it over an
    iterable of images.

    Parameters mirror :class:`srisck.detector.DetectorConfig` field for field.
    """

    def __init__(self, n=21, lambda1=0.125, lambda2=0.375, sf=0.8,
                 cm_lower=None, cm_upper=None, max_keypoints=1000, nms_radius=5,
                 overlap_suppress_threshold=0.3, sm_normalization="identity",
                 s1_factor="sqrt2over4", blur_sigma=0.8, sm_presmooth=False,
                 sm_presmooth_sigma=1.0, atom_p=3, atom_q=3, beta=10.0,
                 symmetry_period=90.0, grayscale_weights=LUMA_WEIGHTS,
                 nonzero_epsilon=DEFAULT_NONZERO_EPSILON, workers=None):
        self.n = n
        self.lambda1 = lambda1
        self.lambda2 = lambda2
        self.sf = sf
        self.cm_lower = cm_lower
        self.cm_upper = cm_upper
        self.max_keypoints = max_keypoints
        self.nms_radius = nms_radius
        self.overlap_suppress_threshold = overlap_suppress_threshold
        self.sm_normalization = sm_normalization
        self.s1_factor = s1_factor
        self.blur_sigma = blur_sigma
        self.sm_presmooth = sm_presmooth
        self.sm_presmooth_sigma = sm_presmooth_sigma
        self.atom_p = atom_p
        self.atom_q = atom_q
        self.beta = beta
        self.symmetry_period = symmetry_period
        self.grayscale_weights = grayscale_weights
        self.nonzero_epsilon = nonzero_epsilon
        self.workers = workers

    @classmethod
    def from_preset(cls, name: str, **overrides) -> "SRISCKDetector":
        """Detector preconfigured with one of the named presets."""
        try:
            params = dict(PRESETS[name])
        except KeyError:
            raise ValueError(
                f"unknown preset {name!r}; available: {sorted(PRESETS)}"
            ) from None
        params.update(overrides)
        return cls(**params)

    def fit(self, X=None, y=None):
        """Validate parameters and build the extended dictionary."""
        config = DetectorConfig(**self.get_params()).validate()
        self.config_ = config
        self.dictionary_ = build_dictionary(config)
        return self

    def detect(self, image):
        """Key-points of a single grayscale or RGB image."""
        check_is_fitted(self)
        return detect(image, self.dictionary_, self.config_)

    def transform(self, X):
        """Key-point lists for an iterable of images."""
        check_is_fitted(self)
        return [self.detect(image) for image in X]
