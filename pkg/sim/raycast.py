"""
解析光线投射

射线与带偏航角长方体（平板法）以及 z = 0 地面求交，取最近交点。
所有计算在车体坐标系中进行，射线参数 t 的单位取决于方向向量的长度。
"""

from dataclasses import dataclass

import numpy as np

from evaluation.shapes import Cuboid

from .classes import BACKGROUND
from .scene import Scene

# 小于该值的交点视为射线起点本身
T_MIN = 1e-9


@dataclass(frozen=True)
class RayHits:
    """
    光线投射结果

    属性:
        t (np.ndarray): (N,) 最近交点的射线参数，未命中为 +inf
        class_id (np.ndarray): (N,) 命中表面的类别，未命中为背景
        object_index (np.ndarray): (N,) 命中的长方体下标，地面或未命中为 -1
    """

    t: np.ndarray
    class_id: np.ndarray
    object_index: np.ndarray

    @property
    def hit(self) -> np.ndarray:
        return np.isfinite(self.t)


def intersect_cuboid(origins: np.ndarray, directions: np.ndarray, box: Cuboid) -> np.ndarray:
    """
    平板法求射线与长方体的最近正交点

    参数:
        origins: (N, 3) 射线起点
        directions: (N, 3) 射线方向
        box: 长方体

    返回:
        (N,) 射线参数，未命中为 +inf
    """
    o = box.to_local(origins)
    c, s = np.cos(box.yaw), np.sin(box.yaw)
    d = np.empty_like(directions)
    d[:, 0] = c * directions[:, 0] + s * directions[:, 1]
    d[:, 1] = -s * directions[:, 0] + c * directions[:, 1]
    d[:, 2] = directions[:, 2]
    half = box.half_size

    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / d
        t1 = (-half - o) * inv
        t2 = (half - o) * inv
    # 与某轴平行的射线：起点在平板内则该轴不限制，否则不相交
    parallel = d == 0.0
    inside_slab = np.abs(o) <= half
    t_lo = np.where(parallel, np.where(inside_slab, -np.inf, np.inf), np.minimum(t1, t2))
    t_hi = np.where(parallel, np.where(inside_slab, np.inf, -np.inf), np.maximum(t1, t2))
    t_near = t_lo.max(axis=1)
    t_far = t_hi.min(axis=1)

    hit = (t_near <= t_far) & (t_near > T_MIN)
    return np.where(hit, t_near, np.inf)


def intersect_ground(origins: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """射线与 z = 0 平面的交点参数，未命中为 +inf"""
    with np.errstate(divide="ignore", invalid="ignore"):
        t = -origins[:, 2] / directions[:, 2]
    valid = (directions[:, 2] != 0.0) & (t > T_MIN)
    return np.where(valid, t, np.inf)


def cast_rays(
    scene: Scene,
    origins: np.ndarray,
    directions: np.ndarray,
    max_t: float = np.inf,
) -> RayHits:
    """
    对场景做光线投射

    参数:
        scene: 场景
        origins: (N, 3) 或 (3,) 射线起点（车体坐标）
        directions: (N, 3) 射线方向（车体坐标）
        max_t: 最大射线参数，超出视为未命中

    返回:
        RayHits
    """
    directions = np.asarray(directions, dtype=np.float64).reshape(-1, 3)
    origins = np.broadcast_to(np.asarray(origins, dtype=np.float64), directions.shape)
    n = directions.shape[0]

    best = np.full(n, np.inf)
    index = np.full(n, -1, dtype=np.int64)
    classes = np.full(n, BACKGROUND, dtype=np.int64)

    if scene.has_ground:
        t_ground = intersect_ground(origins, directions)
        hit = np.isfinite(t_ground)
        best[hit] = t_ground[hit]
        if hit.any():
            points = origins[hit] + t_ground[hit, None] * directions[hit]
            classes[hit] = scene.ground_class(points[:, 0], points[:, 1])

    for i, box in enumerate(scene.objects):
        t_box = intersect_cuboid(origins, directions, box)
        closer = t_box < best
        best[closer] = t_box[closer]
        index[closer] = i
        classes[closer] = box.class_id

    missed = best > max_t
    best[missed] = np.inf
    index[missed] = -1
    classes[missed] = BACKGROUND
    return RayHits(t=best, class_id=classes, object_index=index)


def hit_points(origins: np.ndarray, directions: np.ndarray, hits: RayHits) -> np.ndarray:
    """命中射线的交点坐标 (M, 3)"""
    directions = np.asarray(directions, dtype=np.float64).reshape(-1, 3)
    origins = np.broadcast_to(np.asarray(origins, dtype=np.float64), directions.shape)
    mask = hits.hit
    return origins[mask] + hits.t[mask, None] * directions[mask]
