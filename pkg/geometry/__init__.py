"""
几何模块

刚体变换与针孔相机模型：雷达 -> 车体 -> 相机的坐标换算、像素投影与反投影。
"""

from .camera import (
    Z_EPSILON,
    CameraIntrinsics,
    CameraMount,
    CameraRig,
    PixelProjection,
    back_project_pixel,
    back_project_pixels,
    camera_ray_directions,
    project_to_pixels,
)
from .transforms import (
    RigidTransform,
    Vec3,
    as_transform,
    camera_to_vehicle,
    lidar_to_camera,
    lidar_to_vehicle,
)

__all__ = [
    "Z_EPSILON",
    "Vec3",
    "RigidTransform",
    "as_transform",
    "CameraIntrinsics",
    "CameraMount",
    "CameraRig",
    "PixelProjection",
    "lidar_to_camera",
    "lidar_to_vehicle",
    "camera_to_vehicle",
    "project_to_pixels",
    "back_project_pixel",
    "back_project_pixels",
    "camera_ray_directions",
]
