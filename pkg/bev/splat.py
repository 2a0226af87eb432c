"""
特征投影到 BEV（体素求和池化）

对特征图中每个有深度的像素：
    1. 按块中心恢复全分辨率像素坐标 (d_f·(u_f+0.5), d_f·(v_f+0.5))
    2. 反投影到相机坐标 I_k⁻¹ · δ · (u, v, 1)ᵀ
    3. 变换到车体坐标 E_k⁻¹ · p
    4. 落在栅格体积内的点把 N_f 维特征累加到所在单元

累加按行优先的像素顺序进行；多相机、多尺度时按任务顺序合并，结果与线程数无关。
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from config.logger import get_logger
from depth import DepthImage
from features import FeatureMap
from geometry import CameraIntrinsics, RigidTransform, back_project_pixels, camera_to_vehicle
from utils.errors import InvalidArgumentError
from utils.parallel import ordered_map

from .grid import BevGrid, GridSpec

logger = get_logger("lapt.bev")


@dataclass(frozen=True)
class SplatJob:
    """
    一次投影任务（一台相机的一个尺度）

    属性:
        features (FeatureMap): F_k
        depth (DepthImage): 同尺度的 δ_k
        intrinsics (CameraIntrinsics): I_k
        extrinsics (RigidTransform): E_k
    """

    features: FeatureMap
    depth: DepthImage
    intrinsics: CameraIntrinsics
    extrinsics: RigidTransform


def _splat_points(
    features: FeatureMap,
    depth: DepthImage,
    intrinsics: CameraIntrinsics,
    extrinsics: RigidTransform,
    spec: GridSpec,
) -> Tuple[np.ndarray, np.ndarray]:
    """返回落入栅格的像素的展平单元下标及其特征 (M, N_f)"""
    if (depth.height, depth.width) != (features.height, features.width):
        raise InvalidArgumentError(
            f"深度图尺寸 {depth.width}x{depth.height} 与特征图 "
            f"{features.width}x{features.height} 不一致"
        )
    full = (features.width * features.factor, features.height * features.factor)
    if full != (intrinsics.width, intrinsics.height):
        raise InvalidArgumentError(
            f"特征图 {features.width}x{features.height} 乘以因子 {features.factor} 得 "
            f"{full[0]}x{full[1]}，与内参图像尺寸 {intrinsics.width}x{intrinsics.height} 不一致"
        )
    rows, cols = np.nonzero(depth.mask)
    if rows.size == 0:
        return np.empty(0, dtype=np.int64), np.empty((0, features.channels))

    scale = float(features.factor)
    u = scale * (cols + 0.5)
    v = scale * (rows + 0.5)
    points_cam = back_project_pixels(u, v, depth.values[rows, cols], intrinsics)
    points_vehicle = camera_to_vehicle(points_cam, extrinsics)

    ix, iy, inside = spec.cell_indices(points_vehicle)
    flat = ix[inside] * spec.cells_y + iy[inside]
    values = features.data[:, rows[inside], cols[inside]].T
    return flat, values


def splat_features(
    features: FeatureMap,
    depth: DepthImage,
    intrinsics: CameraIntrinsics,
    extrinsics: RigidTransform,
    spec: GridSpec,
) -> BevGrid:
    """
    单相机单尺度的体素求和池化

    参数:
        features: 特征图 F_k（d_f 由 features.factor 给出）
        depth: 与特征图同尺寸的最小池化深度 δ_k
        intrinsics: 全分辨率相机内参 I_k
        extrinsics: 相机外参 E_k（车体 -> 相机）
        spec: 栅格几何

    返回:
        N_f 通道 BevGrid，无贡献的单元为零

    异常:
        InvalidArgumentError: 特征图与深度图尺寸不一致，或特征图尺寸乘以 d_f 不等于内参图像尺寸
    """
    flat, values = _splat_points(features, depth, intrinsics, extrinsics, spec)
    size = spec.cells_x * spec.cells_y
    data = np.zeros((features.channels, size))
    if flat.size:
        for c in range(features.channels):
            # bincount 按输入顺序累加
            data[c] = np.bincount(flat, weights=values[:, c], minlength=size)
    logger.debug(f"相机 {features.camera} d_f={features.factor}: {flat.size} 个特征点落入栅格")
    return BevGrid(data.reshape(features.channels, spec.cells_x, spec.cells_y), spec)


def count_projected_points(
    features: FeatureMap,
    depth: DepthImage,
    intrinsics: CameraIntrinsics,
    extrinsics: RigidTransform,
    spec: GridSpec,
) -> int:
    """投影后落入栅格体积的特征像素数"""
    flat, _ = _splat_points(features, depth, intrinsics, extrinsics, spec)
    return int(flat.size)


def splat_views(jobs: Sequence[SplatJob], spec: GridSpec, workers: int = 1) -> BevGrid:
    """
    多任务投影并按任务顺序求和

    各任务在线程池中独立投影到各自的栅格，再按 jobs 的顺序依次相加，
    因此结果与 workers 取值无关。

    参数:
        jobs: 投影任务列表（通常相机按配置顺序、尺度升序）
        spec: 栅格几何
        workers: 线程数

    返回:
        合并后的 BevGrid

    异常:
        InvalidArgumentError: 任务列表为空或通道数不一致
    """
    if not jobs:
        raise InvalidArgumentError("投影任务列表为空")
    channels = {job.features.channels for job in jobs}
    if len(channels) != 1:
        raise InvalidArgumentError(f"投影任务的特征通道数不一致: {sorted(channels)}")
    grids: List[BevGrid] = ordered_map(
        lambda job: splat_features(job.features, job.depth, job.intrinsics, job.extrinsics, spec),
        jobs,
        workers,
    )
    total = np.zeros_like(grids[0].data)
    for grid in grids:
        total += grid.data
    return BevGrid(total, spec)


def _upsample_axis(data: np.ndarray, axis: int) -> np.ndarray:
    n = data.shape[axis]
    # 像素中心对齐（align_corners = False），边缘钳制
    src = (np.arange(2 * n) + 0.5) / 2.0 - 0.5
    lower = np.floor(src).astype(np.int64)
    weight = src - lower
    i0 = np.clip(lower, 0, n - 1)
    i1 = np.clip(lower + 1, 0, n - 1)
    shape = [1] * data.ndim
    shape[axis] = 2 * n
    weight = weight.reshape(shape)
    return np.take(data, i0, axis=axis) * (1.0 - weight) + np.take(data, i1, axis=axis) * weight


def bilinear_upsample2x(grid: BevGrid) -> BevGrid:
    """
    双线性 ×2 上采样

    参数:
        grid: X × Y 栅格

    返回:
        2X × 2Y、分辨率减半的栅格
    """
    data = _upsample_axis(_upsample_axis(grid.data, 1), 2)
    fine = GridSpec(
        x_extent=grid.spec.x_extent,
        y_extent=grid.spec.y_extent,
        resolution=grid.spec.resolution / 2.0,
        z_min=grid.spec.z_min,
        z_max=grid.spec.z_max,
    )
    return BevGrid(data, fine)


def project_coarse_then_upsample(
    features: FeatureMap,
    depth: DepthImage,
    intrinsics: CameraIntrinsics,
    extrinsics: RigidTransform,
    spec: GridSpec,
) -> BevGrid:
    """
    粗栅格投影后上采样（MS_B 的几何部分）

    先投影到 X/2 × Y/2、分辨率加倍的栅格，再双线性 ×2 上采样回 X × Y。

    异常:
        InvalidArgumentError: X 或 Y 为奇数，或特征图与深度图尺寸不一致
    """
    coarse = splat_features(features, depth, intrinsics, extrinsics, spec.coarsened(2))
    fine = bilinear_upsample2x(coarse)
    return BevGrid(fine.data, spec)
