"""Geometry, losses, rectification, assembly, and evaluation utilities for
hierarchical text spotting pipelines built on Bezier line polygons."""

from .bezier import (BezierCurve, BezierFit, BezierLinePolygon, Point2,
                     arc_length, curve_tight_bbox, eval_bezier,
                     eval_bezier_many, fit_bezier, midline_curve,
                     polygon_boundary, sample_curve, signed_area,
                     transform_curve, transform_polygon)
from .boxes import Aabb, hull_box, intersection_area
from .coords import (DegenerateBoxError, GlobalBezier, LocalBezier,
                     enclosing_aabb, global_to_local, local_to_global,
                     location_shape_targets)
from .evaluate import (EvalEntity, EvalReport, hiertext_eval, icdar_eval,
                       levenshtein, lexicon_match, match_one_to_one,
                       merge_reports, normalize_prediction_icdar,
                       normalize_word_spotting)
from .fixtures import FixtureBundle, FixtureSpec, gen_fixture
from .hierarchy import (AffinityMatrix, CharEntity, CharResult, HierDocument,
                        LineEntity, ParagraphEntity, WordEntity,
                        assemble_document, entity_geometry, group_paragraphs,
                        line_confidence, split_line, word_box)
from .imageio import read_image, write_image
from .losses import (DetectionLossWeights, RecognitionStepTarget,
                     detection_loss, giou, recognition_loss,
                     recognition_loss_batch)
from .polyops import polygon_area, polygon_iou, union_quads
from .rectify import (CropMapping, DegenerateLineError, GrayImage,
                      InverseResidualError, NoPreimageError, RectifiedCrop,
                      compute_crop_width, crop_rectify, crop_to_image,
                      crop_to_image_many, image_to_crop, image_to_crop_many,
                      make_crop_mapping, mean_height, project_box)
from .schema import (SchemaError, detections_from_json, detections_to_json,
                     document_from_json, document_to_json, load_document,
                     save_document)
from .svg import document_svg, render_svg

__version__ = "0.1.0"

__all__ = [
    "Aabb", "AffinityMatrix", "BezierCurve", "BezierFit", "BezierLinePolygon",
    "CharEntity", "CharResult", "CropMapping", "DegenerateBoxError",
    "DegenerateLineError", "DetectionLossWeights", "EvalEntity", "EvalReport",
    "FixtureBundle", "FixtureSpec", "GlobalBezier", "GrayImage",
    "HierDocument", "InverseResidualError", "LineEntity", "LocalBezier",
    "NoPreimageError", "ParagraphEntity", "Point2", "RecognitionStepTarget",
    "RectifiedCrop", "SchemaError", "WordEntity", "arc_length",
    "assemble_document", "compute_crop_width", "crop_rectify", "crop_to_image",
    "crop_to_image_many",
    "curve_tight_bbox", "detection_loss", "detections_from_json",
    "detections_to_json", "document_from_json", "document_svg",
    "document_to_json", "enclosing_aabb", "entity_geometry", "eval_bezier",
    "eval_bezier_many", "fit_bezier", "gen_fixture", "giou", "global_to_local",
    "group_paragraphs", "hiertext_eval", "hull_box", "icdar_eval",
    "image_to_crop", "image_to_crop_many", "intersection_area", "levenshtein",
    "lexicon_match",
    "line_confidence", "load_document", "local_to_global",
    "location_shape_targets", "make_crop_mapping", "match_one_to_one",
    "mean_height", "merge_reports", "midline_curve",
    "normalize_prediction_icdar", "normalize_word_spotting", "polygon_area",
    "polygon_boundary", "polygon_iou", "project_box", "read_image",
    "recognition_loss", "recognition_loss_batch", "render_svg", "sample_curve",
    "save_document", "signed_area", "split_line", "transform_curve",
    "transform_polygon", "union_quads", "word_box",
]
