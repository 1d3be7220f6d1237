"""File formats: 8-bit PGM/PPM/PNG images, key-point lists and homographies."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .detector import KeyPoint
from .evaluation import Homography

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
KEYPOINT_HEADER_VERSION = "sri-sck v1"


def _tokenize_pnm_header(data: bytes, count: int) -> tuple[list[int], int]:
    """Read ``count`` integer header tokens, honoring '#' comments; returns the
    tokens and the offset of the raster (one whitespace past the last token)."""
    tokens: list[int] = []
    pos = 0
    while len(tokens) < count:
        if pos >= len(data):
            raise ValueError("truncated PNM header")
        ch = data[pos:pos + 1]
        if ch in b" \t\r\n":
            pos += 1
        elif ch == b"#":
            pos = data.index(b"\n", pos) + 1
        elif ch.isdigit():
            end = pos
            while end < len(data) and data[end:end + 1].isdigit():
                end += 1
            tokens.append(int(data[pos:end]))
            pos = end
        else:
            raise ValueError(f"unexpected byte {ch!r} in PNM header")
    return tokens, pos + 1


def _read_pnm(data: bytes) -> np.ndarray:
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise ValueError(f"unsupported PNM magic {magic!r} (need binary P5/P6)")
    (width, height, maxval), offset = _tokenize_pnm_header(data[2:], 3)
    if maxval <= 0 or maxval > 255:
        raise ValueError(f"only 8-bit PNM supported, got maxval {maxval}")
    channels = 1 if magic == b"P5" else 3
    expected = width * height * channels
    if len(data) - (2 + offset) < expected:
        raise ValueError("truncated PNM raster")
    raster = np.frombuffer(data, dtype=np.uint8, count=expected, offset=2 + offset)
    img = raster.astype(np.float64) / 255.0
    if channels == 1:
        return img.reshape(height, width)
    return img.reshape(height, width, 3)


def _read_png(path: Path) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as im:
        if im.mode in ("1", "L"):
            arr = np.asarray(im.convert("L"), dtype=np.uint8)
        else:
            arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    return arr.astype(np.float64) / 255.0


def read_image(path) -> np.ndarray:
    """Load a PGM/PPM/PNG image as float64 in [0, 1] (2-D or (H, W, 3))."""
    path = Path(path)
    data = path.read_bytes()
    if data[:8] == _PNG_MAGIC:
        return _read_png(path)
    if data[:2] in (b"P5", b"P6"):
        return _read_pnm(data)
    raise ValueError(f"{path}: unrecognized image format (need PGM, PPM or PNG)")


def _to_uint8(arr: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(np.asarray(arr, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)


def write_pgm(path, img) -> None:
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"PGM needs a 2-D image, got shape {img.shape}")
    raster = _to_uint8(img)
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + raster.tobytes())


def write_ppm(path, img) -> None:
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"PPM needs an (H, W, 3) image, got shape {img.shape}")
    raster = _to_uint8(img)
    header = f"P6\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + raster.tobytes())


def write_image(path, img) -> None:
    """Write by extension: .pgm, .ppm or .png."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        write_pgm(path, img)
    elif suffix == ".ppm":
        write_ppm(path, img)
    elif suffix == ".png":
        from PIL import Image

        Image.fromarray(_to_uint8(np.asarray(img))).save(path)
    else:
        raise ValueError(f"unsupported image extension {suffix!r}")


def write_keypoints(path, keypoints, n: int, sf: float) -> None:
    """Text key-point format: header line then one `x y size sigma level cm sm`
    line per key-point, all fields with 6 decimals."""
    lines = [f"# {KEYPOINT_HEADER_VERSION} n={int(n)} sf={sf:g}"]
    for kp in keypoints:
        lines.append(
            f"{kp.x:.6f} {kp.y:.6f} {kp.size:.6f} {kp.sigma:.6f} "
            f"{kp.level:.6f} {kp.cm:.6f} {kp.sm:.6f}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_keypoints(path) -> tuple[list[KeyPoint], dict]:
    """Parse a key-point file; returns the key-points and the header metadata."""
    meta: dict = {}
    keypoints: list[KeyPoint] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="ascii").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = re.search(r"\bn=(\d+)", line)
            if m:
                meta["n"] = int(m.group(1))
            m = re.search(r"\bsf=([0-9.eE+-]+)", line)
            if m:
                meta["sf"] = float(m.group(1))
            continue
        fields = line.split()
        if len(fields) != 7:
            raise ValueError(f"{path}:{lineno}: expected 7 fields, got {len(fields)}")
        x, y, size, sigma, level, cm, sm = (float(f) for f in fields)
        keypoints.append(
            KeyPoint(x=x, y=y, level=int(round(level)), size=size, sigma=sigma,
                     sm=sm, cm=int(round(cm)))
        )
    return keypoints, meta


def read_homography(path) -> Homography:
    """3 lines of 3 whitespace-separated floats (the usual H-matrix layout)."""
    values = []
    for line in Path(path).read_text(encoding="ascii").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.extend(float(tok) for tok in line.split())
        except ValueError as exc:
            raise ValueError(f"{path}: malformed homography: {exc}") from None
    if len(values) != 9:
        raise ValueError(f"{path}: homography needs 9 numbers, got {len(values)}")
    return Homography.from_matrix(np.array(values).reshape(3, 3))


def write_homography(path, h: Homography) -> None:
    rows = [" ".join(f"{value:.12g}" for value in row) for row in h.matrix]
    Path(path).write_text("\n".join(rows) + "\n", encoding="ascii")
