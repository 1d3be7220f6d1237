"""Command-line surface: detect key-points, evaluate pairs, dump dictionaries,
render overlays."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io as sio
from .detector import (
    PRESETS,
    DetectorConfig,
    build_dictionary,
    detect,
    preset_config,
)
from .dictionary import ExtendedDictionary
from .evaluation import repeatability, synth_blobs
from .imaging import gaussian_blur, to_grayscale
from .sparse_solver import FlatBlockError, elastic_net, normalize_block

DEFAULT_MAX_PIXELS = 25_000_000

_SM_NORM_FLAGS = {"identity": "identity", "size": "multiply_by_size"}
_SIZE_RULE_FLAGS = {"eq3": "eq3", "sqrt2over4": "sqrt2over4"}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=sorted(PRESETS), help="named configuration")
    p.add_argument("--block-size", type=int, metavar="N", help="odd block size n")
    p.add_argument("--lambda1", type=float, help="L1 penalty weight")
    p.add_argument("--lambda2", type=float, help="L2 penalty weight")
    p.add_argument("--scale-factor", type=float, help="pyramid scale factor in (0,1)")
    p.add_argument("--max-keypoints", type=int, help="cap on returned key-points")
    p.add_argument("--nms-radius", type=int, help="non-max suppression radius, pixels")
    p.add_argument("--overlap-threshold", type=float,
                   help="cross-scale suppression overlap fraction")
    p.add_argument("--sm-normalization", choices=sorted(_SM_NORM_FLAGS),
                   help="strength normalization for cross-scale comparison")
    p.add_argument("--size-rule", choices=sorted(_SIZE_RULE_FLAGS),
                   help="base key-point size rule")


def _config_from_args(args) -> DetectorConfig:
    cfg = preset_config(args.preset) if args.preset else DetectorConfig()
    overrides = {
        "n": args.block_size,
        "lambda1": args.lambda1,
        "lambda2": args.lambda2,
        "sf": args.scale_factor,
        "max_keypoints": args.max_keypoints,
        "nms_radius": args.nms_radius,
        "overlap_suppress_threshold": args.overlap_threshold,
        "sm_normalization": _SM_NORM_FLAGS.get(args.sm_normalization),
        "s1_factor": _SIZE_RULE_FLAGS.get(args.size_rule),
    }
    return cfg.replace(**{k: v for k, v in overrides.items() if v is not None})


def _load_input(args) -> np.ndarray:
    if args.input == "synth:blobs":
        return synth_blobs(args.seed or 0)
    return sio.read_image(args.input)


def _render_overlay(gray: np.ndarray, keypoints) -> np.ndarray:
    rgb = np.repeat(gray[:, :, None], 3, axis=2)
    h, w = gray.shape
    for kp in keypoints:
        steps = max(16, int(round(8.0 * kp.size)))
        theta = np.linspace(0.0, 2.0 * np.pi, steps, endpoint=False)
        xs = np.rint(kp.x + kp.size * np.cos(theta)).astype(int)
        ys = np.rint(kp.y + kp.size * np.sin(theta)).astype(int)
        ok = (xs >= 0) & (xs < w) & (ys >= 0) & (ys < h)
        rgb[ys[ok], xs[ok]] = (1.0, 0.0, 0.0)
    return rgb


def _dump_alpha(gray: np.ndarray, cfg: DetectorConfig, ed: ExtendedDictionary,
                coords: str) -> None:
    try:
        x, y = (int(v) for v in coords.split(","))
    except ValueError:
        raise ValueError(f"--dump-alpha expects 'x,y', got {coords!r}") from None
    half = cfg.n // 2
    blurred = gaussian_blur(gray, cfg.blur_sigma)
    if not (half <= y < gray.shape[0] - half and half <= x < gray.shape[1] - half):
        raise ValueError(f"pixel ({x},{y}) has no fully interior block")
    block = blurred[y - half:y + half + 1, x - half:x + half + 1]
    try:
        normalized = normalize_block(ed.mask.apply(block))
    except FlatBlockError:
        print(f"alpha[{x},{y}] = flat block (complexity 0)")
        return
    code = elastic_net(normalized, ed, cfg.lambda1, cfg.lambda2)
    print(f"alpha[{x},{y}] = " + " ".join(f"{a:.9g}" for a in code.alpha))


def cmd_detect(args) -> int:
    cfg = _config_from_args(args)
    image = _load_input(args)
    pixel_count = image.shape[0] * image.shape[1]
    if pixel_count > args.max_pixels:
        raise ValueError(
            f"image has {pixel_count} pixels, over the --max-pixels "
            f"limit {args.max_pixels}"
        )
    gray = to_grayscale(image, cfg.grayscale_weights) if image.ndim == 3 else image
    ed = build_dictionary(cfg)
    if args.dump_alpha:
        _dump_alpha(gray, cfg, ed, args.dump_alpha)
    keypoints = detect(gray, ed, cfg)
    sio.write_keypoints(args.output, keypoints, n=cfg.n, sf=cfg.sf)
    if args.overlay:
        sio.write_image(args.overlay, _render_overlay(gray, keypoints))
    return 0


def cmd_eval(args) -> int:
    kps_a, _ = sio.read_keypoints(args.keypoints_a)
    kps_b, _ = sio.read_keypoints(args.keypoints_b)
    h = sio.read_homography(args.homography)
    result = repeatability(kps_a, kps_b, h, threshold=args.threshold,
                           shape_a=_parse_size(args.size_a),
                           shape_b=_parse_size(args.size_b))
    score = "undefined" if result.score is None else repr(result.score)
    print(f"repeatability={score} matches={len(result.matches)} "
          f"regions_a={result.count_a} regions_b={result.count_b}")
    if args.matches:
        lines = [f"{m.index_a} {m.index_b} {m.overlap_error:.6f}"
                 for m in result.matches]
        Path(args.matches).write_text("\n".join(lines) + ("\n" if lines else ""),
                                      encoding="ascii")
    return 0


def _parse_size(text):
    if text is None:
        return None
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise ValueError(f"size must look like WIDTHxHEIGHT, got {text!r}") from None
    return (h, w)


def cmd_dict(args) -> int:
    cfg = _config_from_args(args)
    ed = build_dictionary(cfg)
    lines = [" ".join(f"{v:.12g}" for v in ed.columns[:, j])
             for j in range(ed.n_columns)]
    Path(args.output).write_text("\n".join(lines) + "\n", encoding="ascii")
    if args.pgm_dir:
        out_dir = Path(args.pgm_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for j in range(ed.n_columns):
            block = ed.mask.to_block(ed.columns[:, j])
            lo, hi = block.min(), block.max()
            scaled = (block - lo) / (hi - lo) if hi > lo else np.zeros_like(block)
            sio.write_pgm(out_dir / f"atom_{j:03d}.pgm", scaled)
    return 0


def cmd_overlay(args) -> int:
    image = sio.read_image(args.input)
    gray = to_grayscale(image) if image.ndim == 3 else image
    keypoints, _ = sio.read_keypoints(args.keypoints)
    sio.write_image(args.output, _render_overlay(gray, keypoints))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srisck",
        description="Scale- and rotation-invariant sparse-coding key-point detector",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect key-points in an image")
    _add_config_flags(p)
    p.add_argument("input", help="image path (PGM/PPM/PNG) or 'synth:blobs'")
    p.add_argument("-o", "--output", required=True, help="key-point file to write")
    p.add_argument("--overlay", metavar="PATH", help="also render circles onto the image")
    p.add_argument("--max-pixels", type=int, default=DEFAULT_MAX_PIXELS,
                   help="refuse images with more pixels than this")
    p.add_argument("--seed", type=int, help="seed for the synth:blobs input")
    p.add_argument("--dump-alpha", metavar="X,Y",
                   help="print the sparse code of one level-1 pixel")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="repeatability of two key-point files")
    p.add_argument("keypoints_a")
    p.add_argument("keypoints_b")
    p.add_argument("homography", help="3x3 homography text file (A to B)")
    p.add_argument("--threshold", type=float, default=0.4,
                   help="overlap-error acceptance threshold")
    p.add_argument("--size-a", metavar="WxH",
                   help="image A size for the shared-part restriction")
    p.add_argument("--size-b", metavar="WxH",
                   help="image B size for the shared-part restriction")
    p.add_argument("--matches", metavar="PATH", help="write the accepted match list")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("dict", help="dump the extended dictionary")
    _add_config_flags(p)
    p.add_argument("-o", "--output", required=True,
                   help="text matrix output (one column per line)")
    p.add_argument("--pgm-dir", metavar="DIR", help="write per-atom PGM images here")
    p.set_defaults(func=cmd_dict)

    p = sub.add_parser("overlay", help="render a key-point file onto its image")
    p.add_argument("input", help="image path")
    p.add_argument("keypoints", help="key-point file")
    p.add_argument("-o", "--output", required=True, help="overlay image to write")
    p.set_defaults(func=cmd_overlay)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
