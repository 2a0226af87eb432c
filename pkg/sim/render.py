"""
传感器渲染

    - render_views: 逐像素光线投射，输出语义图、精确深度图与按类别着色的 RGB 图
    - sample_lidar: 按扫描模式发射激光，输出雷达坐标系点云
    - analytic_bev: 直接栅格化场景内容得到的精确 BEV 真值
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from bev.grid import GridSpec
from config.logger import get_logger
from depth import DepthImage
from evaluation.rasterize import rasterize_annotations
from evaluation.shapes import SemanticGrid
from features import Image, SemanticImage
from geometry import CameraMount, CameraRig, RigidTransform, camera_ray_directions
from utils.parallel import ordered_map

from .classes import FOREGROUND_CLASSES, NUM_CLASSES, PALETTE, SKY_COLOR
from .raycast import cast_rays
from .rig import LidarPattern
from .scene import Scene

logger = get_logger("lapt.sim")


@dataclass(frozen=True)
class RenderedView:
    """
    单相机渲染结果

    属性:
        image (Image): 按类别着色的 RGB 图像
        semantic (SemanticImage): 每像素命中表面的类别
        depth (DepthImage): 精确深度（相机 z 轴），天空像素为空
    """

    image: Image
    semantic: SemanticImage
    depth: DepthImage


def _color_table() -> np.ndarray:
    table = np.zeros((max(PALETTE) + 1, 3))
    for cid, rgb in PALETTE.items():
        table[cid] = rgb
    return table


def render_view(scene: Scene, mount: CameraMount) -> RenderedView:
    """
    渲染一台相机

    射线穿过像素中心 (u + 0.5, v + 0.5)；方向向量在相机坐标系的 z 分量为 1，
    因此交点的射线参数就是相机 z 轴深度。
    """
    intr = mount.intrinsics
    rows, cols = np.mgrid[0:intr.height, 0:intr.width]
    dirs_cam = camera_ray_directions(intr, cols.ravel() + 0.5, rows.ravel() + 0.5)
    # 行向量右乘 R 等价于 Rᵀ·d（相机 -> 车体）
    dirs_vehicle = dirs_cam @ mount.extrinsics.rotation
    hits = cast_rays(scene, mount.center, dirs_vehicle)

    shape = (intr.height, intr.width)
    depth = DepthImage(np.where(hits.hit, hits.t, np.inf).reshape(shape), hits.hit.reshape(shape))
    labels = hits.class_id.reshape(shape)
    pixels = _color_table()[labels]
    pixels[~depth.mask] = SKY_COLOR
    return RenderedView(
        image=Image(pixels),
        semantic=SemanticImage(labels, NUM_CLASSES),
        depth=depth,
    )


def render_views(scene: Scene, rig: CameraRig, workers: int = 1) -> List[RenderedView]:
    """
    渲染相机配置中的所有相机（按配置顺序）

    参数:
        scene: 场景
        rig: 相机配置
        workers: 线程数，结果与线程数无关

    返回:
        每台相机一个 RenderedView
    """
    views = ordered_map(lambda mount: render_view(scene, mount), rig.cameras, workers)
    logger.debug(f"渲染 {len(views)} 台相机, 场景物体 {len(scene.objects)} 个")
    return views


def sample_lidar(
    scene: Scene,
    pattern: LidarPattern,
    lidar_extrinsics: RigidTransform,
    seed: Optional[int] = None,
) -> np.ndarray:
    """
    激光雷达扫描

    每条 (线, 方位角) 射线从雷达原点出发，取量程内最近交点；
    未命中的射线以及按 dropout 概率丢弃的射线不产生点。

    参数:
        scene: 场景
        pattern: 扫描模式
        lidar_extrinsics: E_P（车体 -> 雷达）
        seed: 无回波采样的随机种子，None 时使用 pattern.seed

    返回:
        (N, 3) 雷达坐标系点云，按线优先的射线顺序排列
    """
    dirs_lidar = pattern.directions()
    dirs_vehicle = dirs_lidar @ lidar_extrinsics.rotation
    origin = lidar_extrinsics.inverse().translation_vector
    hits = cast_rays(scene, origin, dirs_vehicle, max_t=pattern.max_range)

    keep = hits.hit
    if pattern.dropout > 0.0:
        rng = np.random.default_rng(pattern.seed if seed is None else seed)
        keep = keep & (rng.random(keep.shape[0]) >= pattern.dropout)
    # 方向为单位向量，射线参数即距离；直接在雷达坐标系中计算交点
    cloud = hits.t[keep, None] * dirs_lidar[keep]
    logger.debug(f"激光雷达 {pattern.ray_count} 条射线, {cloud.shape[0]} 个回波")
    return cloud


def analytic_bev(
    scene: Scene, spec: GridSpec, classes: Sequence[int] = FOREGROUND_CLASSES
) -> SemanticGrid:
    """
    场景内容直接栅格化得到的 BEV 真值

    与 evaluation.rasterize_cuboids / rasterize_polygons 的结果逐通道一致。
    """
    return rasterize_annotations(scene.objects, scene.ground, spec, classes)
