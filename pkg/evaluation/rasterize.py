"""
真值栅格化

按单元中心采样：单元中心落在长方体底面矩形（闭区间）或多边形（奇偶规则）内即为 1。
"""

from typing import Iterable, Sequence

import numpy as np

from bev.grid import GridSpec

from .shapes import Cuboid, Polygon2D, SemanticGrid


def _cell_center_mesh(spec: GridSpec):
    xs, ys = spec.cell_centers()
    return np.meshgrid(xs, ys, indexing="ij")


def rasterize_cuboids(boxes: Iterable[Cuboid], spec: GridSpec, class_id: int) -> np.ndarray:
    """
    长方体底面栅格化

    参数:
        boxes: 长方体列表（只使用 class_id 匹配的长方体）
        spec: 栅格几何
        class_id: 目标类别

    返回:
        (X, Y) uint8 二值通道
    """
    mesh_x, mesh_y = _cell_center_mesh(spec)
    out = np.zeros(spec.shape, dtype=bool)
    for box in boxes:
        if box.class_id != class_id:
            continue
        # 只在包围盒内做精确判断
        corners = box.footprint_corners()
        lo = corners.min(axis=0)
        hi = corners.max(axis=0)
        window = (mesh_x >= lo[0] - 1e-9) & (mesh_x <= hi[0] + 1e-9)
        window &= (mesh_y >= lo[1] - 1e-9) & (mesh_y <= hi[1] + 1e-9)
        if not window.any():
            continue
        out[window] |= box.footprint_contains(mesh_x[window], mesh_y[window])
    return out.astype(np.uint8)


def rasterize_polygons(polys: Iterable[Polygon2D], spec: GridSpec, class_id: int) -> np.ndarray:
    """
    多边形栅格化（奇偶规则）

    多个多边形之间取并集；单个多边形内部用奇偶规则。

    返回:
        (X, Y) uint8 二值通道
    """
    mesh_x, mesh_y = _cell_center_mesh(spec)
    out = np.zeros(spec.shape, dtype=bool)
    for poly in polys:
        if poly.class_id != class_id:
            continue
        out |= poly.contains(mesh_x, mesh_y)
    return out.astype(np.uint8)


def rasterize_annotations(
    cuboids: Sequence[Cuboid],
    polygons: Sequence[Polygon2D],
    spec: GridSpec,
    class_ids: Sequence[int],
) -> SemanticGrid:
    """
    把长方体与多边形标注栅格化为多类别语义栅格

    每个通道是该类别长方体与多边形栅格的并集。
    """
    channels = [
        rasterize_cuboids(cuboids, spec, c) | rasterize_polygons(polygons, spec, c)
        for c in class_ids
    ]
    if not channels:
        return SemanticGrid.zeros(spec, ())
    return SemanticGrid(np.stack(channels), tuple(class_ids), spec)
