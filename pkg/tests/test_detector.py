import math

import numpy as np
import pytest

from srisck.detector import (
    PRESETS,
    DetectorConfig,
    KeyPoint,
    SMMap,
    assign_size_scale,
    base_size,
    cross_scale_suppress,
    detect,
    non_max_suppression,
    preset_config,
    scan_level,
    subpixel_offset,
)
from srisck.evaluation import synth_blobs
from srisck.imaging import gaussian_blur

SQRT2 = math.sqrt(2.0)


def small_image(seed=0, shape=(48, 48)):
    return synth_blobs(seed, shape, blob_count=5)


class TestConfig:
    def test_presets_match_reference_table(self):
        assert PRESETS["sri-sck-1"] == {"n": 21, "lambda1": 0.125, "lambda2": 0.375}
        assert PRESETS["sri-sck-2"] == {"n": 25, "lambda1": 0.0625, "lambda2": 0.1875}
        cfg = preset_config("sri-sck-1")
        assert (cfg.n, cfg.lambda1, cfg.lambda2) == (21, 0.125, 0.375)
        assert cfg.sf == 0.8
        assert cfg.max_keypoints == 1000
        assert cfg.cm_lower is None and cfg.cm_upper is None

    def test_unknown_preset(self):
        with pytest.raises(ValueError, match="unknown preset"):
            preset_config("sri-sck-9")

    @pytest.mark.parametrize(
        "changes",
        [
            {"n": 20},
            {"n": 3},
            {"sf": 1.0},
            {"lambda1": 0.0},
            {"lambda2": -1.0},
            {"cm_lower": 5, "cm_upper": 2},
            {"nms_radius": 0},
            {"max_keypoints": 0},
            {"sm_normalization": "log"},
            {"s1_factor": "eq4"},
            {"overlap_suppress_threshold": 1.5},
            {"workers": 0},
        ],
    )
    def test_invalid_configs_rejected(self, changes):
        with pytest.raises(ValueError):
            DetectorConfig(**changes).validate()

    def test_s1_factor_accepts_underscore_spelling(self):
        DetectorConfig(s1_factor="sqrt2_over_4").validate()


class TestScanLevel:
    def test_constant_image_all_zero(self, ed21, preset1):
        m = scan_level(np.full((30, 30), 0.5), ed21, preset1)
        assert (m.sm == 0).all()
        assert (m.cm == 0).all()
        assert m.margin == 10

    def test_margins_are_zero(self, ed21, preset1):
        m = scan_level(small_image(), ed21, preset1)
        h = m.margin
        assert (m.sm[:h, :] == 0).all() and (m.sm[-h:, :] == 0).all()
        assert (m.sm[:, :h] == 0).all() and (m.sm[:, -h:] == 0).all()
        assert (m.sm >= 0).all()
        assert (m.sm[h:-h, h:-h] > 0).any()

    def test_rotation_equivariance(self, ed21, preset1):
        img = gaussian_blur(small_image(3), preset1.blur_sigma)
        m0 = scan_level(img, ed21, preset1)
        m1 = scan_level(np.rot90(img, k=-1).copy(), ed21, preset1)
        assert np.abs(np.rot90(m0.sm, k=-1) - m1.sm).max() < 1e-6
        np.testing.assert_array_equal(np.rot90(m0.cm, k=-1), m1.cm)

    def test_gain_offset_invariance(self, ed21, preset1):
        img = small_image(4)
        m0 = scan_level(img, ed21, preset1)
        m1 = scan_level(0.5 * img + 0.2, ed21, preset1)
        assert np.abs(m0.sm - m1.sm).max() < 1e-9
        np.testing.assert_array_equal(m0.cm, m1.cm)

    def test_cm_range_zeroes_sm_but_keeps_cm(self, ed21, preset1):
        img = small_image(5)
        plain = scan_level(img, ed21, preset1)
        limited = scan_level(img, ed21, preset1.replace(cm_lower=3, cm_upper=5))
        np.testing.assert_array_equal(plain.cm, limited.cm)
        outside = (plain.cm < 3) | (plain.cm > 5)
        assert (limited.sm[outside] == 0).all()
        inside = ~outside
        np.testing.assert_array_equal(limited.sm[inside], plain.sm[inside])

    def test_image_smaller_than_block_rejected(self, ed21, preset1):
        with pytest.raises(ValueError, match="smaller"):
            scan_level(np.zeros((20, 30)), ed21, preset1)

    def test_block_size_mismatch_rejected(self, ed21):
        with pytest.raises(ValueError, match="block size"):
            scan_level(np.zeros((30, 30)), ed21, DetectorConfig(n=25))

    def test_worker_count_does_not_change_results(self, ed21, preset1):
        img = small_image(6)
        m1 = scan_level(img, ed21, preset1.replace(workers=1))
        m4 = scan_level(img, ed21, preset1.replace(workers=4))
        np.testing.assert_array_equal(m1.sm, m4.sm)
        np.testing.assert_array_equal(m1.cm, m4.cm)

    def test_thread_env_var_caps_workers(self, monkeypatch):
        from srisck.detector import _resolve_workers

        monkeypatch.delenv("SRISCK_THREADS", raising=False)
        assert _resolve_workers(None) == 1
        assert _resolve_workers(6) == 6
        monkeypatch.setenv("SRISCK_THREADS", "2")
        assert _resolve_workers(6) == 2
        assert _resolve_workers(None) == 1
        assert _resolve_workers(1) == 1


class TestNonMaxSuppression:
    def test_single_positive_pixel(self):
        sm = np.zeros((9, 9))
        sm[4, 5] = 1.0
        assert non_max_suppression(sm, 2) == [(4, 5)]

    def test_equal_adjacent_keeps_scan_order_first(self):
        sm = np.zeros((7, 7))
        sm[3, 3] = sm[3, 4] = 2.0
        assert non_max_suppression(sm, 2) == [(3, 3)]

    def test_increasing_ramp_keeps_only_global_max(self):
        yy, xx = np.mgrid[0:8, 0:8].astype(float)
        sm = 1.0 + yy + xx
        assert non_max_suppression(sm, 1) == [(7, 7)]

    def test_accepts_smmap(self):
        sm = np.zeros((7, 7))
        sm[3, 3] = 1.0
        m = SMMap(sm=sm, cm=np.zeros((7, 7), dtype=int), margin=0)
        assert non_max_suppression(m, 1) == [(3, 3)]

    def test_radius_domain(self):
        with pytest.raises(ValueError):
            non_max_suppression(np.zeros((5, 5)), 0)

    def test_zero_map_yields_nothing(self):
        assert non_max_suppression(np.zeros((6, 6)), 2) == []


class TestSubpixelOffset:
    def test_symmetric_peak(self):
        assert subpixel_offset(1.0, 2.0, 1.0) == 0.0

    def test_known_asymmetric_example(self):
        assert subpixel_offset(0.0, 2.0, 1.0) == pytest.approx(1.0 / 6.0, abs=1e-15)

    def test_flat_triple_degenerates_to_zero(self):
        assert subpixel_offset(1.0, 1.0, 1.0) == 0.0

    def test_recovers_parabola_vertex(self):
        for delta in np.linspace(-0.45, 0.45, 19):
            samples = [1.0 - 0.3 * (x - delta) ** 2 for x in (-1.0, 0.0, 1.0)]
            assert subpixel_offset(*samples) == pytest.approx(delta, abs=1e-12)

    def test_offset_always_within_half_pixel(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            lo, hi = np.sort(rng.random(2))
            center = hi + rng.random()
            off = subpixel_offset(lo, center, hi)
            assert -0.5 <= off <= 0.5


class TestAssignSizeScale:
    def test_default_rule_level_one(self, preset1):
        s, sigma = assign_size_scale(1, preset1)
        assert s == pytest.approx(21.0 * SQRT2 / 4.0, abs=1e-12)
        assert s == pytest.approx(7.4246, abs=5e-5)
        assert sigma == pytest.approx(5.25, abs=1e-12)

    def test_level_three(self, preset1):
        s, _ = assign_size_scale(3, preset1)
        assert s == pytest.approx(assign_size_scale(1, preset1)[0] / 0.64, abs=1e-12)
        assert s == pytest.approx(11.601, abs=5e-4)

    def test_alternate_rule(self, preset1):
        s, _ = assign_size_scale(1, preset1.replace(s1_factor="eq3"))
        assert s == pytest.approx(10.5 * SQRT2, abs=1e-12)
        assert s == pytest.approx(14.849, abs=5e-4)

    def test_exact_relations(self, preset1):
        s1 = base_size(preset1)
        for level in (1, 2, 5):
            s, sigma = assign_size_scale(level, preset1)
            assert s == s1 / preset1.sf ** (level - 1)
            assert sigma == s / SQRT2

    def test_level_domain(self, preset1):
        with pytest.raises(ValueError):
            assign_size_scale(0, preset1)


def kp(x, y, size, sm, level=1, cm=3):
    return KeyPoint(x=x, y=y, level=level, size=size, sigma=size / SQRT2, sm=sm, cm=cm)


class TestCrossScaleSuppress:
    def test_contained_weaker_point_removed(self, preset1):
        a = kp(50.0, 50.0, 7.0, sm=5.0, level=1)
        b = kp(50.0, 50.0, 7.0 / 0.8, sm=3.0, level=2)
        out = cross_scale_suppress([a, b], preset1)
        assert out == [a]

    def test_disjoint_points_both_kept(self, preset1):
        a = kp(10.0, 10.0, 3.0, sm=5.0)
        b = kp(100.0, 100.0, 3.0, sm=1.0)
        assert cross_scale_suppress([a, b], preset1) == [a, b]

    def test_size_normalization_prefers_larger_scale(self, preset1):
        cfg = preset1.replace(sm_normalization="multiply_by_size")
        small = kp(50.0, 50.0, 7.42, sm=5.0, level=1)
        large = kp(50.0, 50.0, 11.60, sm=4.8, level=2)
        assert cross_scale_suppress([small, large], cfg) == [large]
        # identity keeps the raw-strength winner instead
        assert cross_scale_suppress([small, large], preset1) == [small]

    def test_equal_strength_overlapping_points_coexist(self, preset1):
        a = kp(50.0, 50.0, 7.0, sm=2.0, level=1)
        b = kp(51.0, 50.0, 7.0, sm=2.0, level=1)
        assert cross_scale_suppress([a, b], preset1) == [a, b]

    def test_truncation_to_max_keypoints(self, preset1):
        cfg = preset1.replace(max_keypoints=3)
        points = [kp(10.0 * i, 5.0, 2.0, sm=float(10 - i)) for i in range(8)]
        out = cross_scale_suppress(points, cfg)
        assert out == points[:3]

    def test_output_sorted_by_strength(self, preset1):
        points = [kp(10.0 * i, 5.0, 2.0, sm=float(i + 1)) for i in range(5)]
        out = cross_scale_suppress(points, preset1)
        assert [p.sm for p in out] == [5.0, 4.0, 3.0, 2.0, 1.0]


class TestDetect:
    def test_constant_image_yields_nothing(self, preset1):
        assert detect(np.full((60, 60), 0.5), cfg=preset1) == []

    def test_keypoint_exact_relations(self, ed21, preset1):
        img = small_image(7, (60, 60))
        kps = detect(img, ed21, preset1)
        assert kps
        s1 = base_size(preset1)
        for p in kps:
            assert p.sigma == p.size / SQRT2
            assert p.size == s1 / preset1.sf ** (p.level - 1)
            assert 0 <= p.x <= 59 and 0 <= p.y <= 59
            assert p.sm > 0 and p.cm > 0

    def test_output_order_is_strength_descending(self, ed21, preset1):
        kps = detect(small_image(8, (60, 60)), ed21, preset1)
        sms = [p.sm for p in kps]
        assert sms == sorted(sms, reverse=True)

    def test_rgb_input_matches_grayscale(self, ed21, preset1):
        gray = small_image(9, (48, 48))
        rgb = np.repeat(gray[:, :, None], 3, axis=2)
        a = detect(gray, ed21, preset1)
        b = detect(rgb, ed21, preset1)
        assert len(a) == len(b)
        for p, q in zip(a, b):
            assert p.level == q.level and p.cm == q.cm
            assert abs(p.x - q.x) < 1e-9 and abs(p.y - q.y) < 1e-9

    def test_out_of_range_input_rejected(self, preset1):
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            detect(np.full((30, 30), 1.5), cfg=preset1)

    def test_dictionary_config_mismatch_rejected(self, ed21):
        with pytest.raises(ValueError, match="block size"):
            detect(np.full((40, 40), 0.5), ed21, DetectorConfig(n=25))

    def test_presmooth_flag_runs(self, ed21, preset1):
        kps = detect(small_image(10, (48, 48)), ed21, preset1.replace(sm_presmooth=True))
        for p in kps:
            assert 0 <= p.x <= 47 and 0 <= p.y <= 47
