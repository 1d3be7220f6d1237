import pytest
from scipy.ndimage import gaussian_filter

from srisck.detector import DetectorConfig
from srisck.dictionary import ext_dct2_dictionary
from srisck.evaluation import synth_blobs


@pytest.fixture(scope="session")
def ed21():
    """Default 9-column extended dictionary for block size 21."""
    return ext_dct2_dictionary(21)


@pytest.fixture(scope="session")
def preset1():
    return DetectorConfig(n=21, lambda1=0.125, lambda2=0.375)


@pytest.fixture(scope="session")
def blob_image():
    """The frozen 200x200 synthetic fixture used by the pipeline-level checks."""
    return synth_blobs(7)


def smooth_random_block(rng, n=21, sigma=2.0):
    """Random low-pass block; correlates with the dictionary atoms so codes
    are usually nonzero (raw noise mostly codes to zero)."""
    return gaussian_filter(rng.random((n, n)), sigma, mode="nearest")
