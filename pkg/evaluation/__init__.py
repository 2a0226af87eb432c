"""
评估模块

真值标注（长方体、地面多边形）栅格化为 BEV 语义栅格，以及 IoU 评估。
"""

from .metrics import (
    IoUAccumulator,
    OracleAgreement,
    binarize,
    iou,
    oracle_agreement,
    palette_decode,
    per_class_iou,
    scores_to_semantic,
)
from .rasterize import rasterize_annotations, rasterize_cuboids, rasterize_polygons
from .shapes import Cuboid, Polygon2D, SemanticGrid, is_simple_polygon

__all__ = [
    "Cuboid",
    "Polygon2D",
    "SemanticGrid",
    "is_simple_polygon",
    "rasterize_cuboids",
    "rasterize_polygons",
    "rasterize_annotations",
    "iou",
    "binarize",
    "scores_to_semantic",
    "per_class_iou",
    "IoUAccumulator",
    "palette_decode",
    "OracleAgreement",
    "oracle_agreement",
]
