"""Command-line pipeline: train, segment, detect, eval, synth, compare.

Runs are driven by flags plus an optional flat key-value config file;
flags override config values. Exit codes are a stable contract for
scripting: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import kv
from .baselines import (
    _BASELINE_FLOAT_KEYS,
    BaselineParams,
    HsvParams,
    LogChromaticParams,
    RedEnhanceParams,
    default_baseline_params,
    load_baseline_params,
    segment_hsv,
    segment_log_chromatic,
    segment_red_enhance,
)
from .detection import GeometryFilters, detect_signs
from .evaluation import (
    EvalReport,
    EvalRow,
    MatchResult,
    compute_metrics,
    load_ground_truth,
    match_detections,
    pr_sweep,
    render_pr_curve,
    render_report_jsonl,
    render_report_text,
)
from .ppm import load_image, save_image, to_uint8
from .segmentation import (
    EPS_DIV,
    ClassLabel,
    SegmentationMask,
    dumps_model,
    load_model,
    segment_image,
    train_model,
    with_literal_offset,
    with_tau_scale,
)
from .spherical import RgbPixel
from .synth import generate_dataset

METHODS = ("hdsc", "hsv", "red_enhance", "log_chromatic")

_IMAGE_SUFFIXES = (".ppm", ".png")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


@dataclass
class RunConfig:
    images_dir: str | None = None
    ground_truth: str | None = None
    model_file: str | None = None
    baselines_file: str | None = None
    out_dir: str = "out"
    dataset_name: str | None = None
    method: str = "hdsc"
    decision_mode: str | None = None
    transfer_variant: str | None = None
    epsilon_div: float = EPS_DIV
    alpha_min: float = 0.1
    iou_min: float = 0.5
    connectivity: int = 8
    min_area: int = 64
    aspect_min: float = 0.5
    aspect_max: float = 2.0
    fill_min: float = 0.3
    threads: int = 0
    seed: int = 42
    synth_scenes: int = 6
    synth_width: int = 320
    synth_height: int = 200
    synth_red: int = 2
    synth_blue: int = 2
    synth_gray: int = 1
    synth_intensities: tuple[float, ...] = (0.25, 0.5, 1.0)
    synth_temperatures: tuple[float, ...] = (6500.0,)
    baseline_overrides: dict[str, float] = field(default_factory=dict)

    def filters(self) -> GeometryFilters:
        return GeometryFilters(
            min_area=self.min_area,
            aspect_min=self.aspect_min,
            aspect_max=self.aspect_max,
            fill_min=self.fill_min,
        )


_CONFIG_PARSERS = {
    "images_dir": str, "ground_truth": str, "model_file": str,
    "baselines_file": str, "out_dir": str, "dataset_name": str,
    "method": str, "decision_mode": str, "transfer_variant": str,
    "epsilon_div": float, "alpha_min": float,
    "iou_min": float, "connectivity": int,
    "min_area": int, "aspect_min": float, "aspect_max": float,
    "fill_min": float, "threads": int, "seed": int,
    "synth_scenes": int, "synth_width": int, "synth_height": int,
    "synth_red": int, "synth_blue": int, "synth_gray": int,
}
_CONFIG_FLOAT_LIST_KEYS = ("synth_intensities", "synth_temperatures")


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def load_config(path) -> RunConfig:
    """Build a RunConfig from a flat key-value file. Baseline parameter
    keys are collected as overrides applied on top of the baselines file
    or the shipped defaults."""
    fields_raw = kv.load_file(path)
    cfg = RunConfig()
    for key, raw in fields_raw.items():
        if key in _CONFIG_PARSERS:
            setattr(cfg, key, _CONFIG_PARSERS[key](raw))
        elif key in _CONFIG_FLOAT_LIST_KEYS:
            setattr(cfg, key, _parse_float_list(raw))
        elif key in _BASELINE_FLOAT_KEYS:
            cfg.baseline_overrides[key] = float(raw)
        else:
            raise ValueError(f"{path}: unknown config key {key!r}")
    return cfg


def resolve_baselines(cfg: RunConfig) -> BaselineParams:
    params = (load_baseline_params(cfg.baselines_file)
              if cfg.baselines_file else default_baseline_params())
    if not cfg.baseline_overrides:
        return params
    ov = cfg.baseline_overrides
    hsv = HsvParams(
        ov.get("hsv_red_hue_halfwidth", params.hsv.red_hue_halfwidth),
        ov.get("hsv_blue_hue_low", params.hsv.blue_hue_low),
        ov.get("hsv_blue_hue_high", params.hsv.blue_hue_high),
        ov.get("hsv_sat_min", params.hsv.sat_min),
        ov.get("hsv_val_min", params.hsv.val_min),
    )
    red_enh = RedEnhanceParams(
        ov.get("red_enhance_threshold", params.red_enhance.threshold)
    )
    rr, br = params.log_chromatic.red_region, params.log_chromatic.blue_region
    logc = LogChromaticParams(
        red_region=(
            ov.get("logc_red_u_min", rr[0]), ov.get("logc_red_u_max", rr[1]),
            ov.get("logc_red_v_min", rr[2]), ov.get("logc_red_v_max", rr[3]),
        ),
        blue_region=(
            ov.get("logc_blue_u_min", br[0]), ov.get("logc_blue_u_max", br[1]),
            ov.get("logc_blue_v_min", br[2]), ov.get("logc_blue_v_max", br[3]),
        ),
    )
    return BaselineParams(hsv=hsv, red_enhance=red_enh, log_chromatic=logc)


def run_method(img: np.ndarray, method: str, model, baselines: BaselineParams) -> SegmentationMask:
    if method == "hdsc":
        if model is None:
            raise UsageError("method hdsc requires a model file")
        return segment_image(img, model)
    if method == "hsv":
        return segment_hsv(img, baselines.hsv)
    if method == "red_enhance":
        return segment_red_enhance(img, baselines.red_enhance)
    if method == "log_chromatic":
        return segment_log_chromatic(img, baselines.log_chromatic)
    raise UsageError(f"unknown method {method!r} (choose from {', '.join(METHODS)})")


def _load_model_with_overrides(cfg: RunConfig):
    if not cfg.model_file:
        return None
    model = load_model(cfg.model_file)
    if cfg.decision_mode:
        model = replace(model, decision_mode=cfg.decision_mode)
    if cfg.transfer_variant:
        model = replace(model, transfer_variant=cfg.transfer_variant)
    return model


def mask_to_image(mask: SegmentationMask) -> np.ndarray:
    lut = np.zeros((3, 3), dtype=np.uint8)
    lut[ClassLabel.RED] = (255, 0, 0)
    lut[ClassLabel.BLUE] = (0, 0, 255)
    return lut[mask.labels]


def draw_boxes(image8: np.ndarray, boxes, color=(0, 255, 0)) -> np.ndarray:
    out = image8.copy()
    col = np.array(color, dtype=np.uint8)
    for left, top, right, bottom in boxes:
        out[top, left:right] = col
        out[bottom - 1, left:right] = col
        out[top:bottom, left] = col
        out[top:bottom, right - 1] = col
    return out


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _parse_annotations(path) -> list[tuple[str, int, int, str]]:
    """Training pixel annotations: image_id;x;y;class per line."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(";")
            if len(parts) != 4:
                raise DataError(
                    f"{path}: line {lineno}: expected image_id;x;y;class"
                )
            image_id, xs, ys, cls = (p.strip() for p in parts)
            if cls not in ("red", "blue", "background"):
                raise DataError(f"{path}: line {lineno}: unknown class {cls!r}")
            try:
                x, y = int(xs), int(ys)
            except ValueError:
                raise DataError(f"{path}: line {lineno}: bad coordinates") from None
            rows.append((image_id, x, y, cls))
    return rows


def collect_training_pixels(images_dir, annotations_path):
    """Load annotated pixels grouped into red/blue/background lists."""
    rows = _parse_annotations(annotations_path)
    by_image: dict[str, list[tuple[int, int, str]]] = {}
    for image_id, x, y, cls in rows:
        by_image.setdefault(image_id, []).append((x, y, cls))
    pixels: dict[str, list[RgbPixel]] = {"red": [], "blue": [], "background": []}
    for image_id in sorted(by_image):
        img = load_image(Path(images_dir) / image_id)
        height, width = img.shape[:2]
        for x, y, cls in by_image[image_id]:
            if not (0 <= x < width and 0 <= y < height):
                raise DataError(
                    f"annotation ({x}, {y}) outside {image_id} ({width}x{height})"
                )
            pixels[cls].append(RgbPixel(*img[y, x]))
    return pixels["red"], pixels["blue"], pixels["background"]


def cmd_train(cfg: RunConfig, args) -> int:
    if not cfg.images_dir or not args.annotations:
        raise UsageError("train requires --images and --annotations")
    red, blue, bg = collect_training_pixels(cfg.images_dir, args.annotations)
    model = train_model(
        red, blue, bg,
        alpha_min=cfg.alpha_min,
        decision_mode=cfg.decision_mode or "calibrated",
        transfer_variant=cfg.transfer_variant or "literal",
        epsilon_div=cfg.epsilon_div,
    )
    out = Path(args.model_out or Path(cfg.out_dir) / "model.cfg")
    out.parent.mkdir(parents=True, exist_ok=True)
    text = dumps_model(model)
    out.write_text(text, encoding="ascii")
    print(f"trained on {len(red)} red / {len(blue)} blue / {len(bg)} background pixels")
    print(text, end="")
    print(f"model written to {out}")
    return 0


def cmd_segment(cfg: RunConfig, args, write_detections: bool = False) -> int:
    if not args.image:
        raise UsageError("segment requires --image")
    model = _load_model_with_overrides(cfg)
    baselines = resolve_baselines(cfg)
    img = load_image(args.image)
    mask = run_method(img, cfg.method, model, baselines)
    candidates = detect_signs(mask, cfg.connectivity, cfg.filters())

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.image).stem
    mask_path = out_dir / f"{stem}_mask.ppm"
    overlay_path = out_dir / f"{stem}_overlay.ppm"
    save_image(mask_path, mask_to_image(mask) / 255.0)
    overlay = draw_boxes(to_uint8(img), [c.bbox for c in candidates])
    save_image(overlay_path, overlay / 255.0)
    print(f"mask written to {mask_path}")
    print(f"overlay written to {overlay_path}")

    name = Path(args.image).name
    lines = [
        f"{name};{c.bbox[0]};{c.bbox[1]};{c.bbox[2]};{c.bbox[3]};"
        f"{CLASS_NAMES[c.class_label]}"
        for c in candidates
    ]
    if write_detections:
        det_path = out_dir / f"{stem}_detections.csv"
        det_path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="ascii")
        print(f"detections written to {det_path}")
    for line in lines:
        print(line)
    return 0


CLASS_NAMES = {ClassLabel.RED: "red", ClassLabel.BLUE: "blue"}


def _list_images(images_dir) -> list[Path]:
    root = Path(images_dir)
    if not root.is_dir():
        raise UsageError(f"images directory {root} does not exist")
    return sorted(
        p for p in root.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES
    )


def evaluate_method(
    images, truth_by_image, method, model, baselines, cfg: RunConfig
) -> tuple[MatchResult, list[str]]:
    """Aggregate matching over a directory of images.

    Per-image failures are recorded, not fatal; aggregation is an
    order-independent sum so thread count cannot affect the result.
    """

    def one(path: Path):
        try:
            img = load_image(path)
            mask = run_method(img, method, model, baselines)
            dets = detect_signs(mask, cfg.connectivity, cfg.filters())
            truths = truth_by_image.get(path.name, [])
            return match_detections(dets, truths, cfg.iou_min), None
        except (ValueError, OSError) as exc:
            return None, f"{path.name}: {exc}"

    workers = cfg.threads if cfg.threads > 0 else None
    if cfg.threads == 1:
        results = [one(p) for p in images]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, images))

    total = MatchResult(0, 0, 0)
    failures = []
    processed = 0
    for result, failure in results:
        if failure is not None:
            failures.append(failure)
        else:
            total = total + result
            processed += 1
    if processed == 0:
        raise DataError("no images processed")
    return total, failures


def cmd_eval(cfg: RunConfig, args) -> int:
    if not cfg.images_dir:
        raise UsageError("eval requires an images directory")
    if not cfg.ground_truth:
        raise UsageError("eval requires a ground-truth file")
    images = _list_images(cfg.images_dir)
    if not images:
        raise DataError("no images processed")
    truths = load_ground_truth(cfg.ground_truth)
    truth_by_image: dict[str, list] = {}
    for rec in truths:
        truth_by_image.setdefault(rec.image_id, []).append(rec)

    model = _load_model_with_overrides(cfg)
    baselines = resolve_baselines(cfg)
    dataset = cfg.dataset_name or Path(cfg.images_dir).name
    methods = list(METHODS) if args.all_methods else [cfg.method]

    report = EvalReport()
    for method in methods:
        result, failures = evaluate_method(
            images, truth_by_image, method, model, baselines, cfg
        )
        report.add(compute_metrics(result, method=method, dataset=dataset))
        report.failures.extend(f"{method}: {msg}" for msg in failures)

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    text = render_report_text(report)
    (out_dir / "report.txt").write_text(text, encoding="utf-8")
    (out_dir / "report.jsonl").write_text(render_report_jsonl(report), encoding="utf-8")
    print(text, end="")

    if args.pr:
        if cfg.method != "hdsc" or model is None:
            raise UsageError("--pr sweeps the hdsc model; set --method hdsc and a model file")
        factors = _parse_float_list(args.pr)

        def run_at(factor: float) -> MatchResult:
            if model.decision_mode == "literal":
                swept = with_literal_offset(model, factor)
            else:
                swept = with_tau_scale(model, factor)
            result, _ = evaluate_method(
                images, truth_by_image, "hdsc", swept, baselines, cfg
            )
            return result

        curve = pr_sweep(run_at, factors)
        (out_dir / "pr_curve.txt").write_text(render_pr_curve(curve), encoding="ascii")
        print(f"pr curve written to {out_dir / 'pr_curve.txt'}")
    return 0


def cmd_synth(cfg: RunConfig, args) -> int:
    ds = generate_dataset(
        cfg.out_dir,
        seed=cfg.seed,
        n_scenes=cfg.synth_scenes,
        width=cfg.synth_width,
        height=cfg.synth_height,
        intensities=cfg.synth_intensities,
        temperatures=cfg.synth_temperatures,
        n_red=cfg.synth_red,
        n_blue=cfg.synth_blue,
        n_gray=cfg.synth_gray,
    )
    print(f"wrote {len(ds.image_ids)} images to {ds.images_dir}")
    print(f"ground truth: {ds.ground_truth}")
    print(f"train annotations: {ds.train_annotations}")
    print(f"reference model: {ds.model_file}")
    print(f"baseline params: {ds.baselines_file}")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_common(sub):
    sub.add_argument("--config", help="flat key-value config file")
    sub.add_argument("--method", choices=METHODS, help="segmentation method")
    sub.add_argument("--mode", choices=("literal", "calibrated"),
                     help="decision rule override")
    sub.add_argument("--iou", type=float, help="IoU threshold for matching")
    sub.add_argument("--threads", type=int, help="worker threads (0 = auto)")
    sub.add_argument("--seed", type=int, help="RNG seed")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--model", help="model file")
    sub.add_argument("--baselines", help="baseline parameter file")
    sub.add_argument("--images", help="images directory")
    sub.add_argument("--truth", help="ground-truth file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="signseg", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    p_train = subs.add_parser("train", parents=[], help="train a model from pixel annotations")
    _add_common(p_train)
    p_train.add_argument("--annotations", help="image_id;x;y;class file")
    p_train.add_argument("--model-out", dest="model_out", help="output model path")
    p_train.set_defaults(func=cmd_train)

    for name, write_dets in (("segment", False), ("detect", True)):
        p = subs.add_parser(name, help=f"{name} one image")
        _add_common(p)
        p.add_argument("--image", help="input image")
        p.set_defaults(func=cmd_segment, write_detections=write_dets)

    for name, all_methods in (("eval", False), ("compare", True)):
        p = subs.add_parser(name, help="evaluate method(s) over a dataset")
        _add_common(p)
        p.add_argument("--all-methods", action="store_true", dest="all_methods",
                       default=all_methods)
        p.add_argument("--pr", help="comma-separated sweep thresholds (hdsc)")
        p.set_defaults(func=cmd_eval)

    p_synth = subs.add_parser("synth", help="generate a synthetic dataset")
    _add_common(p_synth)
    p_synth.set_defaults(func=cmd_synth)

    return parser


def _config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.method:
        cfg.method = args.method
    if args.mode:
        cfg.decision_mode = args.mode
    if args.iou is not None:
        cfg.iou_min = args.iou
    if args.threads is not None:
        cfg.threads = args.threads
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.out_dir = args.out
    if args.model:
        cfg.model_file = args.model
    if args.baselines:
        cfg.baselines_file = args.baselines
    if args.images:
        cfg.images_dir = args.images
    if args.truth:
        cfg.ground_truth = args.truth
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config_from_args(args)
        if args.command == "segment" or args.command == "detect":
            return args.func(cfg, args, write_detections=args.write_detections)
        return args.func(cfg, args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (DataError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
