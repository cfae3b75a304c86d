"""Command-line surface: fixture generation, assembly, rectification,
evaluation, curve fitting, and SVG visualization.

Exit codes: 0 success, 1 validation problem (bad flags, malformed input),
2 I/O failure. The HTS_GEOM_LOG environment variable (off/info/debug)
controls library logging.
"""
from __future__ import annotations

import argparse
import functools
import glob
import json
import logging
import os
import sys
from concurrent import futures

import numpy as np

from .bezier import fit_bezier, transform_polygon
from .evaluate import EvalReport, hiertext_eval, icdar_eval, merge_reports
from .fixtures import FixtureSpec, gen_fixture
from .hierarchy import (DEFAULT_AFFINITY_THRESHOLD, DEFAULT_DET_THRESHOLD,
                        DEFAULT_REC_THRESHOLD, assemble_document)
from .imageio import read_image, write_image
from .rectify import DEFAULT_CROP_HEIGHT, DEFAULT_MAX_WIDTH, crop_rectify
from .schema import (SchemaError, detections_from_json, detections_to_json,
                     document_from_json, document_to_json, eval_words_from_json,
                     load_json, save_json)
from .svg import render_svg


class _Parser(argparse.ArgumentParser):
    """Usage errors exit 1 (not argparse's default 2) with usage on stderr."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _setup_logging() -> None:
    level_name = os.environ.get("HTS_GEOM_LOG", "off").lower()
    levels = {"off": logging.CRITICAL + 10, "info": logging.INFO, "debug": logging.DEBUG}
    level = levels.get(level_name, logging.CRITICAL + 10)
    logging.basicConfig(level=level,
                        format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)


def _default_jobs() -> int:
    return os.cpu_count() or 1


def _map_jobs(fn, items, jobs: int) -> list:
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with futures.ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))  # input order preserved


# -- gen-fixtures -------------------------------------------------------------

def _cmd_gen_fixtures(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    for i in range(args.count):
        spec = FixtureSpec(rng_seed=args.seed + i,
                           n_paragraphs=tuple(args.paragraphs),
                           lines_per_paragraph=tuple(args.lines),
                           words_per_line=tuple(args.words),
                           curvature=args.curvature,
                           image_size=tuple(args.size),
                           confidence_noise=args.confidence_noise,
                           box_jitter_px=args.box_jitter)
        bundle = gen_fixture(spec)
        stem = f"fixture_{i:03d}"
        image_name = f"{stem}.{args.image_format}"
        write_image(os.path.join(args.out, image_name), bundle.image)
        save_json(os.path.join(args.out, f"{stem}.det.json"),
                  detections_to_json(bundle.detections_file(image_ref=image_name)))
        save_json(os.path.join(args.out, f"{stem}.gt.json"),
                  document_to_json(bundle.truth, image_ref=image_name))
    print(f"wrote {args.count} fixture(s) to {args.out}")
    return 0


# -- assemble -----------------------------------------------------------------

def _assemble_one(params: dict, in_path: str) -> str:
    det = detections_from_json(load_json(in_path))
    w, h = det.image_size
    polys_px = [transform_polygon(p, scale=(w, h)) for p in det.lines]
    doc = assemble_document(polys_px, det.affinity, det.recognitions,
                            det.image_size,
                            det_threshold=params["det_threshold"],
                            rec_threshold=params["rec_threshold"],
                            affinity_threshold=params["affinity_threshold"],
                            crop_height=params["crop_height"],
                            max_width=params["max_width"])
    out_path = _derived_name(in_path, params["out_dir"], ".det.json", ".hier.json")
    save_json(out_path, document_to_json(doc, image_ref=det.image_ref))
    return out_path


def _derived_name(in_path: str, out_dir: str, old_suffix: str, new_suffix: str) -> str:
    base = os.path.basename(in_path)
    if base.endswith(old_suffix):
        base = base[:-len(old_suffix)] + new_suffix
    else:
        base = os.path.splitext(base)[0] + new_suffix
    return os.path.join(out_dir, base)


def _cmd_assemble(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    params = {"det_threshold": args.det_threshold,
              "rec_threshold": args.rec_threshold,
              "affinity_threshold": args.affinity_threshold,
              "crop_height": args.crop_height,
              "max_width": args.max_width,
              "out_dir": args.out_dir}
    outs = _map_jobs(functools.partial(_assemble_one, params), args.inputs, args.jobs)
    for path in outs:
        print(path)
    return 0


# -- rectify ------------------------------------------------------------------

def _cmd_rectify(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    image = read_image(args.image)
    det = detections_from_json(load_json(args.detections))
    w, h = det.image_size
    if (image.width, image.height) != (w, h):
        raise SchemaError(f"image is {image.width}x{image.height} but detections "
                          f"say {w}x{h}")
    meta = []
    for i, poly in enumerate(det.lines):
        poly_px = transform_polygon(poly, scale=(w, h))
        crop = crop_rectify(image, poly_px, args.crop_height, args.max_width)
        name = f"crop_{i:03d}.{args.image_format}"
        write_image(os.path.join(args.out_dir, name), crop.image)
        pts = np.vstack([poly_px.top.points, poly_px.bottom.points])
        meta.append({"crop": name,
                     "crop_width": crop.mapping.crop_width,
                     "crop_height": crop.mapping.crop_height,
                     "confidence": poly.confidence,
                     "control_points_px": [[float(x), float(y)] for x, y in pts]})
    save_json(os.path.join(args.out_dir, "crops.json"),
              {"schema_version": "1", "image_size": [w, h], "crops": meta})
    print(f"wrote {len(meta)} crop(s) to {args.out_dir}")
    return 0


# -- evaluate -----------------------------------------------------------------

def _json_files(path: str) -> list[str]:
    if os.path.isdir(path):
        files = sorted(glob.glob(os.path.join(path, "*.json")))
        if not files:
            raise SchemaError(f"no .json files in directory {path}")
        return files
    return [path]


def _evaluate_pair(params: dict, pair: tuple[str, str]) -> tuple[int, int, int, float | None]:
    pred_path, gt_path = pair
    pred_obj = load_json(pred_path)
    gt_obj = load_json(gt_path)
    if params["protocol"] == "hiertext":
        report = hiertext_eval(document_from_json(pred_obj), document_from_json(gt_obj),
                               level=params["level"], recognition=params["recognition"],
                               iou_threshold=params["iou"])
    else:
        lexicon = params["lexicon"]
        report = icdar_eval(eval_words_from_json(pred_obj), eval_words_from_json(gt_obj),
                            mode=params["mode"], lexicon=lexicon,
                            iou_threshold=params["iou"], geometry=params["geometry"])
    return (report.tp, report.fp, report.fn, report.iou_sum)


def _print_report(report: EvalReport, header: str) -> None:
    cols = [("precision", report.precision), ("recall", report.recall), ("f1", report.f1)]
    if report.iou_sum is not None:
        cols += [("tightness", report.tightness), ("pq", report.pq)]
    cols += [("tp", report.tp), ("fp", report.fp), ("fn", report.fn)]
    names = "  ".join(f"{name:>9}" for name, _ in cols)
    vals = "  ".join(f"{v:9.4f}" if isinstance(v, float) else f"{v:9d}"
                     for _, v in cols)
    print(header)
    print(names)
    print(vals)


def _cmd_evaluate(args) -> int:
    preds = _json_files(args.pred)
    gts = _json_files(args.gt)
    if len(preds) != len(gts):
        raise SchemaError(f"{len(preds)} prediction file(s) vs {len(gts)} "
                          f"ground-truth file(s)")
    lexicon = None
    if args.lexicon:
        with open(args.lexicon, "r", encoding="utf-8") as fh:
            lexicon = [line.strip() for line in fh if line.strip()]
    params = {"protocol": args.protocol, "level": args.level,
              "recognition": args.recognition, "iou": args.iou,
              "mode": args.mode, "geometry": args.geometry, "lexicon": lexicon}
    counts = _map_jobs(functools.partial(_evaluate_pair, params),
                       list(zip(preds, gts)), args.jobs)
    report = merge_reports([EvalReport(tp=t, fp=f, fn=n, iou_sum=s)
                            for t, f, n, s in counts])
    if args.protocol == "hiertext":
        header = (f"protocol=hiertext level={args.level} "
                  f"recognition={'on' if args.recognition else 'off'} "
                  f"documents={len(preds)}")
    else:
        header = f"protocol=icdar mode={args.mode} documents={len(preds)}"
    _print_report(report, header)
    if args.report:
        payload = {"protocol": args.protocol, "documents": len(preds),
                   **report.as_dict()}
        if args.protocol == "hiertext":
            payload["level"] = args.level
            payload["recognition"] = args.recognition
        else:
            payload["mode"] = args.mode
        save_json(args.report, payload)
    return 0


# -- fit-bezier ---------------------------------------------------------------

def _cmd_fit_bezier(args) -> int:
    obj = load_json(args.input)
    if "points" not in obj:
        raise SchemaError(f"{args.input}: expected a top-level 'points' list")
    fit = fit_bezier(np.asarray(obj["points"], dtype=float), m=args.order)
    out = {"control_points": [[float(x), float(y)] for x, y in fit.curve.points],
           "rms": fit.rms, "uniform_fallback": fit.uniform_fallback}
    if args.out:
        save_json(args.out, out)
    else:
        json.dump(out, sys.stdout, indent=1)
        print()
    return 0


# -- visualize ----------------------------------------------------------------

def _cmd_visualize(args) -> int:
    doc = document_from_json(load_json(args.input))
    render_svg(doc, args.out)
    print(args.out)
    return 0


# -- parser -------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="hts-geom",
                     description="Geometry, assembly, and evaluation tools for "
                                 "hierarchical text spotting pipelines.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-fixtures", help="generate synthetic annotated pages")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--paragraphs", type=int, nargs=2, default=[2, 3], metavar=("LO", "HI"))
    p.add_argument("--lines", type=int, nargs=2, default=[1, 2], metavar=("LO", "HI"))
    p.add_argument("--words", type=int, nargs=2, default=[2, 4], metavar=("LO", "HI"))
    p.add_argument("--curvature", type=float, default=0.25)
    p.add_argument("--size", type=int, nargs=2, default=[800, 600], metavar=("W", "H"))
    p.add_argument("--confidence-noise", type=float, default=0.0)
    p.add_argument("--box-jitter", type=float, default=0.0)
    p.add_argument("--image-format", choices=["pgm", "png"], default="pgm")
    p.set_defaults(func=_cmd_gen_fixtures)

    p = sub.add_parser("assemble", help="detections + recognitions -> hierarchy JSON")
    p.add_argument("inputs", nargs="+", help="detection JSON file(s)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--det-threshold", type=float, default=DEFAULT_DET_THRESHOLD)
    p.add_argument("--rec-threshold", type=float, default=DEFAULT_REC_THRESHOLD)
    p.add_argument("--affinity-threshold", type=float, default=DEFAULT_AFFINITY_THRESHOLD)
    p.add_argument("--crop-height", type=int, default=DEFAULT_CROP_HEIGHT)
    p.add_argument("--max-width", type=int, default=DEFAULT_MAX_WIDTH)
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.set_defaults(func=_cmd_assemble)

    p = sub.add_parser("rectify", help="crop and straighten detected lines")
    p.add_argument("--image", required=True)
    p.add_argument("--detections", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--crop-height", type=int, default=DEFAULT_CROP_HEIGHT)
    p.add_argument("--max-width", type=int, default=DEFAULT_MAX_WIDTH)
    p.add_argument("--image-format", choices=["pgm", "png"], default="pgm")
    p.set_defaults(func=_cmd_rectify)

    p = sub.add_parser("evaluate", help="score predictions against ground truth")
    p.add_argument("pred", help="prediction document JSON file or directory")
    p.add_argument("gt", help="ground-truth document JSON file or directory")
    p.add_argument("--protocol", choices=["hiertext", "icdar"], required=True)
    p.add_argument("--level", choices=["word", "line", "paragraph"], default="word")
    p.add_argument("--recognition", action="store_true",
                   help="hiertext: require exact text equality for a match")
    p.add_argument("--mode", choices=["word-spotting", "end-to-end"],
                   default="end-to-end", help="icdar text protocol")
    p.add_argument("--lexicon", help="icdar: newline-separated lexicon file")
    p.add_argument("--geometry", choices=["polygon", "min-rect"], default="polygon")
    p.add_argument("--iou", type=float, default=0.5)
    p.add_argument("--report", help="also write the report as JSON here")
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("fit-bezier", help="least-squares curve fit of a polyline")
    p.add_argument("input", help="JSON file with a 'points' [[x,y],...] list")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--out", help="write result JSON here instead of stdout")
    p.set_defaults(func=_cmd_fit_bezier)

    p = sub.add_parser("visualize", help="render a document JSON as SVG")
    p.add_argument("input", help="document JSON file")
    p.add_argument("--out", required=True, help="output SVG path")
    p.set_defaults(func=_cmd_visualize)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (SchemaError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
