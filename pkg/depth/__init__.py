"""
深度模块

稀疏深度图 D_k 的 z-buffer 栅格化与最小值池化 δ_k。
"""

from .raster import DepthImage, depth_pyramid, lidar_depth_image, min_pool, rasterize_depth

__all__ = ["DepthImage", "rasterize_depth", "min_pool", "depth_pyramid", "lidar_depth_image"]
