"""
BEV 模块

多尺度图像特征投影到以车辆为中心的 BEV 栅格、尺度融合、模态融合，
以及粗栅格投影后上采样的 MS_B 变体。
"""

from .fusion import FusionMethod, fuse_modalities, fuse_scales
from .grid import BevGrid, GridSpec
from .lidar import LIDAR_BEV_CHANNELS, lidar_occupancy_bev
from .splat import (
    SplatJob,
    bilinear_upsample2x,
    count_projected_points,
    project_coarse_then_upsample,
    splat_features,
    splat_views,
)

__all__ = [
    "GridSpec",
    "BevGrid",
    "SplatJob",
    "splat_features",
    "splat_views",
    "count_projected_points",
    "bilinear_upsample2x",
    "project_coarse_then_upsample",
    "FusionMethod",
    "fuse_scales",
    "fuse_modalities",
    "LIDAR_BEV_CHANNELS",
    "lidar_occupancy_bev",
]
