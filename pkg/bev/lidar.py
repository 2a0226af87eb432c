"""
激光雷达 BEV 分支

不含学习参数的柱体统计特征，代替 PointPillars 编码器：
每个单元 3 个通道，依次为点数、最大高度、平均高度（空单元为零）。
"""

import numpy as np
import numpy.typing as npt

from geometry import RigidTransform, lidar_to_vehicle

from .grid import BevGrid, GridSpec

LIDAR_BEV_CHANNELS = 3


def lidar_occupancy_bev(
    cloud: npt.ArrayLike, lidar_extrinsics: RigidTransform, spec: GridSpec
) -> BevGrid:
    """
    点云柱体统计

    参数:
        cloud: (N, 3) 雷达坐标系下的点云
        lidar_extrinsics: E_P
        spec: 栅格几何

    返回:
        3 通道 BevGrid（count, max z, mean z），只统计落在栅格体积内的车体坐标点
    """
    size = spec.cells_x * spec.cells_y
    data = np.zeros((LIDAR_BEV_CHANNELS, size))
    if np.size(cloud):
        points = lidar_to_vehicle(cloud, lidar_extrinsics)
        ix, iy, inside = spec.cell_indices(points)
        flat = ix[inside] * spec.cells_y + iy[inside]
        z = points[inside, 2]
        if flat.size:
            count = np.bincount(flat, minlength=size).astype(np.float64)
            z_sum = np.bincount(flat, weights=z, minlength=size)
            z_max = np.full(size, -np.inf)
            np.maximum.at(z_max, flat, z)
            occupied = count > 0
            data[0] = count
            data[1, occupied] = z_max[occupied]
            data[2, occupied] = z_sum[occupied] / count[occupied]
    return BevGrid(data.reshape(LIDAR_BEV_CHANNELS, spec.cells_x, spec.cells_y), spec)
