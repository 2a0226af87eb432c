"""
仿真模块

合成场景生成与解析渲染：同一场景同时产生图像、语义图、精确深度、
激光雷达点云以及解析 BEV 真值，用于闭环验证投影流水线。
"""

from .classes import (
    BACKGROUND,
    CLASS_NAMES,
    DRIVABLE_AREA,
    FOREGROUND_CLASSES,
    HUMAN,
    MOVABLE_OBJECT,
    NUM_CLASSES,
    PALETTE,
    SKY_COLOR,
    VEHICLE,
    WALKWAY,
    class_id,
)
from .raycast import RayHits, cast_rays, hit_points, intersect_cuboid, intersect_ground
from .render import RenderedView, analytic_bev, render_view, render_views, sample_lidar
from .rig import (
    LidarPattern,
    camera_extrinsics,
    camera_visibility_mask,
    default_lidar_pattern,
    default_rig,
    lidar_hit_mask,
    lidar_range_mask,
)
from .scene import (
    LAYOUTS,
    Scene,
    SceneParams,
    angular_gap,
    azimuth_interval,
    build_ground,
    generate_scene,
    snap_to_grid,
)

__all__ = [
    "BACKGROUND",
    "DRIVABLE_AREA",
    "WALKWAY",
    "VEHICLE",
    "HUMAN",
    "MOVABLE_OBJECT",
    "CLASS_NAMES",
    "FOREGROUND_CLASSES",
    "NUM_CLASSES",
    "PALETTE",
    "SKY_COLOR",
    "class_id",
    "LAYOUTS",
    "Scene",
    "SceneParams",
    "build_ground",
    "generate_scene",
    "snap_to_grid",
    "azimuth_interval",
    "angular_gap",
    "RayHits",
    "cast_rays",
    "hit_points",
    "intersect_cuboid",
    "intersect_ground",
    "LidarPattern",
    "camera_extrinsics",
    "default_rig",
    "default_lidar_pattern",
    "camera_visibility_mask",
    "lidar_hit_mask",
    "lidar_range_mask",
    "RenderedView",
    "render_view",
    "render_views",
    "sample_lidar",
    "analytic_bev",
]
