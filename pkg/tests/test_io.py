import numpy as np
import pytest

from srisck.detector import KeyPoint
from srisck.evaluation import Homography, synth_blobs
from srisck.io import (
    read_homography,
    read_image,
    read_keypoints,
    write_homography,
    write_image,
    write_keypoints,
    write_pgm,
    write_ppm,
)


class TestImages:
    def test_pgm_roundtrip(self, tmp_path):
        img = synth_blobs(0, (17, 23), blob_count=3)
        path = tmp_path / "img.pgm"
        write_pgm(path, img)
        back = read_image(path)
        assert back.shape == (17, 23)
        # 8-bit quantization bound
        assert np.abs(back - img).max() <= 0.5 / 255.0 + 1e-12

    def test_ppm_roundtrip(self, tmp_path):
        rng = np.random.default_rng(0)
        rgb = rng.random((9, 11, 3))
        path = tmp_path / "img.ppm"
        write_ppm(path, rgb)
        back = read_image(path)
        assert back.shape == (9, 11, 3)
        assert np.abs(back - rgb).max() <= 0.5 / 255.0 + 1e-12

    def test_pgm_with_comment_header(self, tmp_path):
        path = tmp_path / "c.pgm"
        path.write_bytes(b"P5\n# a comment\n2 2\n255\n" + bytes([0, 64, 128, 255]))
        img = read_image(path)
        np.testing.assert_allclose(img, np.array([[0, 64], [128, 255]]) / 255.0)

    def test_png_roundtrip_gray_and_rgb(self, tmp_path):
        gray = synth_blobs(1, (12, 14), blob_count=3)
        p1 = tmp_path / "g.png"
        write_image(p1, gray)
        assert np.abs(read_image(p1) - gray).max() <= 0.5 / 255.0 + 1e-12
        rgb = np.repeat(gray[:, :, None], 3, axis=2)
        p2 = tmp_path / "c.png"
        write_image(p2, rgb)
        assert read_image(p2).shape == (12, 14, 3)

    def test_unrecognized_format_rejected(self, tmp_path):
        path = tmp_path / "x.img"
        path.write_bytes(b"not an image at all")
        with pytest.raises(ValueError, match="unrecognized"):
            read_image(path)

    def test_truncated_pnm_rejected(self, tmp_path):
        path = tmp_path / "t.pgm"
        path.write_bytes(b"P5\n4 4\n255\n\x00\x01")
        with pytest.raises(ValueError, match="truncated"):
            read_image(path)

    def test_sixteen_bit_pnm_rejected(self, tmp_path):
        path = tmp_path / "deep.pgm"
        path.write_bytes(b"P5\n1 1\n65535\n\x00\x00")
        with pytest.raises(ValueError, match="8-bit"):
            read_image(path)


class TestKeypointFiles:
    def kps(self):
        return [
            KeyPoint(x=12.345678, y=9.0, level=1, size=7.42462, sigma=5.25, sm=3.25, cm=4),
            KeyPoint(x=0.5, y=199.125, level=3, size=11.60097, sigma=8.2031, sm=0.125, cm=9),
        ]

    def test_header_and_roundtrip(self, tmp_path):
        path = tmp_path / "kp.txt"
        write_keypoints(path, self.kps(), n=21, sf=0.8)
        first = path.read_text().splitlines()[0]
        assert first == "# sri-sck v1 n=21 sf=0.8"
        back, meta = read_keypoints(path)
        assert meta == {"n": 21, "sf": 0.8}
        assert len(back) == 2
        for orig, parsed in zip(self.kps(), back):
            assert parsed.level == orig.level and parsed.cm == orig.cm
            for field in ("x", "y", "size", "sigma", "sm"):
                assert abs(getattr(parsed, field) - getattr(orig, field)) <= 1e-6

    def test_empty_list_writes_header_only(self, tmp_path):
        path = tmp_path / "kp.txt"
        write_keypoints(path, [], n=25, sf=0.8)
        back, meta = read_keypoints(path)
        assert back == [] and meta["n"] == 25

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "kp.txt"
        path.write_text("# sri-sck v1 n=21 sf=0.8\n1.0 2.0 3.0\n")
        with pytest.raises(ValueError, match="7 fields"):
            read_keypoints(path)


class TestHomographyFiles:
    def test_roundtrip(self, tmp_path):
        h = Homography.from_matrix([[0.9, 0.1, 5], [-0.05, 1.1, -3], [1e-4, -2e-4, 1.0]])
        path = tmp_path / "H.txt"
        write_homography(path, h)
        back = read_homography(path)
        np.testing.assert_allclose(back.matrix, h.matrix, atol=1e-10)

    def test_wrong_count_rejected(self, tmp_path):
        path = tmp_path / "H.txt"
        path.write_text("1 0 0\n0 1 0\n")
        with pytest.raises(ValueError, match="9 numbers"):
            read_homography(path)

    def test_non_numeric_rejected(self, tmp_path):
        path = tmp_path / "H.txt"
        path.write_text("1 0 0\n0 one 0\n0 0 1\n")
        with pytest.raises(ValueError, match="malformed"):
            read_homography(path)
