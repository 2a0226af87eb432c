"""
稀疏深度图模块

把投影后的激光点按 z-buffer 规则写入深度图 D_k（同一像素保留最近点），
再以 d_f x d_f 方块做最小值池化得到与特征图同尺寸的 δ_k。

空像素用显式掩码表示；只有在写文件时才使用 +inf 哨兵值。
"""

from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Union

import numpy as np
import numpy.typing as npt

from config.logger import get_logger
from geometry import (
    CameraMount,
    PixelProjection,
    RigidTransform,
    lidar_to_camera,
    project_to_pixels,
)
from utils.errors import InvalidArgumentError, PreconditionError
from utils.parallel import ordered_map

logger = get_logger("lapt.depth")


@dataclass(frozen=True)
class DepthImage:
    """
    稀疏深度图

    属性:
        values (np.ndarray): (height, width) float64，空像素处为 +inf
        mask (np.ndarray): (height, width) bool，True 表示该像素有深度
    """

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        mask = np.asarray(self.mask, dtype=bool)
        if values.ndim != 2 or values.shape != mask.shape:
            raise InvalidArgumentError(f"深度值与掩码形状不一致: {values.shape} vs {mask.shape}")
        present = values[mask]
        if present.size and not np.all(np.isfinite(present) & (present > 0)):
            raise InvalidArgumentError("深度图中的有效深度必须为有限正数")
        # 空像素统一为 +inf，保证相等比较与序列化结果确定
        values = np.where(mask, values, np.inf)
        values.setflags(write=False)
        mask = mask.copy()
        mask.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def empty(cls, width: int, height: int) -> "DepthImage":
        """全空深度图"""
        return cls(np.full((height, width), np.inf), np.zeros((height, width), dtype=bool))

    @classmethod
    def from_dense(cls, dense: npt.ArrayLike) -> "DepthImage":
        """由 +inf（或 NaN）表示空像素的稠密数组构造"""
        dense = np.asarray(dense, dtype=np.float64)
        mask = np.isfinite(dense)
        return cls(np.where(mask, dense, np.inf), mask)

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    @property
    def height(self) -> int:
        return int(self.values.shape[0])

    @property
    def occupancy_count(self) -> int:
        """有深度的像素数"""
        return int(np.count_nonzero(self.mask))

    @property
    def fill_ratio(self) -> float:
        """有深度像素占全部像素的比例（像素/点对应率）"""
        return self.occupancy_count / float(self.mask.size) if self.mask.size else 0.0

    def depth_at(self, u: int, v: int) -> Optional[float]:
        """读取像素 (u, v) 的深度，空像素返回 None"""
        return float(self.values[v, u]) if self.mask[v, u] else None

    def to_dense(self, fill: float = np.inf) -> np.ndarray:
        """转换为稠密数组，空像素填充 fill"""
        return np.where(self.mask, self.values, fill)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DepthImage):
            return NotImplemented
        return bool(
            np.array_equal(self.mask, other.mask)
            and np.array_equal(self.values[self.mask], other.values[other.mask])
        )


def _as_uvd(projected: Union[PixelProjection, npt.ArrayLike]) -> np.ndarray:
    if isinstance(projected, PixelProjection):
        if len(projected) == 0:
            return np.empty((0, 3))
        return np.column_stack([projected.uv, projected.depth])
    arr = np.asarray(projected, dtype=np.float64)
    if arr.size == 0:
        return np.empty((0, 3))
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise InvalidArgumentError(f"投影点必须为 (N, 3) 的 (u, v, depth)，实际 {arr.shape}")
    return arr


def _zbuffer(uvd: np.ndarray, width: int, height: int) -> np.ndarray:
    """单块 z-buffer：返回展平的最小深度缓冲（空为 +inf）"""
    buffer = np.full(width * height, np.inf)
    if uvd.shape[0]:
        cols = np.floor(uvd[:, 0]).astype(np.int64)
        rows = np.floor(uvd[:, 1]).astype(np.int64)
        np.minimum.at(buffer, rows * width + cols, uvd[:, 2])
    return buffer


def rasterize_depth(
    projected: Union[PixelProjection, npt.ArrayLike],
    width: int,
    height: int,
    workers: int = 1,
    chunk_size: Optional[int] = None,
) -> DepthImage:
    """
    z-buffer 栅格化

    像素 (⌊u⌋, ⌊v⌋) 保留所有落入该像素的点中的最小深度，未命中的像素为空。
    指定 chunk_size 时按块并行计算再取逐像素最小值合并，结果与顺序计算逐位一致。

    参数:
        projected: PixelProjection 或 (N, 3) 的 (u, v, depth) 数组
        width, height: 深度图尺寸（像素）
        workers: 线程数
        chunk_size: 每块点数，None 表示不分块

    返回:
        DepthImage

    异常:
        PreconditionError: 坐标越界或深度不为正
    """
    uvd = _as_uvd(projected)
    if uvd.shape[0]:
        u, v, d = uvd[:, 0], uvd[:, 1], uvd[:, 2]
        inside = (u >= 0) & (u < width) & (v >= 0) & (v < height)
        if not np.all(inside):
            bad = int(np.flatnonzero(~inside)[0])
            raise PreconditionError(
                f"投影点越界: (u={u[bad]}, v={v[bad]}) 不在 [0, {width}) x [0, {height}) 内"
            )
        if not np.all(np.isfinite(d) & (d > 0)):
            raise PreconditionError("投影点深度必须为有限正数")

    if chunk_size and uvd.shape[0] > chunk_size:
        chunks = [uvd[i:i + chunk_size] for i in range(0, uvd.shape[0], chunk_size)]
        partials = ordered_map(lambda c: _zbuffer(c, width, height), chunks, workers)
        buffer = np.minimum.reduce(partials)
    else:
        buffer = _zbuffer(uvd, width, height)

    dense = buffer.reshape(height, width)
    return DepthImage(dense, np.isfinite(dense))


def min_pool(depth: DepthImage, factor: int) -> DepthImage:
    """
    方形核最小值池化

    输出尺寸为 (width/d_f, height/d_f)，每个输出像素取对应 d_f x d_f 方块中
    有效深度的最小值；方块全空时输出为空。

    参数:
        depth: 全分辨率深度图 D_k
        factor: 下采样因子 d_f（正整数）

    返回:
        δ_k

    异常:
        InvalidArgumentError: 因子不是正整数或不能整除图像尺寸
    """
    if int(factor) != factor or factor < 1:
        raise InvalidArgumentError(f"下采样因子必须为正整数: {factor}")
    factor = int(factor)
    if depth.width % factor or depth.height % factor:
        raise InvalidArgumentError(
            f"图像尺寸 {depth.width}x{depth.height} 不能被下采样因子 {factor} 整除"
        )
    blocks = depth.values.reshape(depth.height // factor, factor, depth.width // factor, factor)
    pooled = blocks.min(axis=(1, 3))
    return DepthImage(pooled, np.isfinite(pooled))


def depth_pyramid(depth: DepthImage, factors: Iterable[int]) -> Dict[int, DepthImage]:
    """
    对每个特征尺度做最小值池化

    返回:
        {d_f: δ_k}
    """
    return {int(f): min_pool(depth, int(f)) for f in factors}


def lidar_depth_image(
    cloud: npt.ArrayLike,
    lidar_extrinsics: RigidTransform,
    mount: CameraMount,
) -> DepthImage:
    """
    单相机稀疏深度图：雷达点 -> 相机坐标 -> 像素 -> z-buffer

    参数:
        cloud: (N, 3) 雷达坐标系下的点云
        lidar_extrinsics: E_P
        mount: 相机（内参与外参 E_k）

    返回:
        与图像同尺寸的 D_k
    """
    intr = mount.intrinsics
    points_cam = np.empty((0, 3))
    if np.size(cloud):
        points_cam = lidar_to_camera(cloud, lidar_extrinsics, mount.extrinsics)
    projection = project_to_pixels(points_cam, intr)
    depth = rasterize_depth(projection, intr.width, intr.height)
    logger.debug(
        f"{mount.name}: {len(projection)} 个点落入视野, 占用像素 {depth.occupancy_count}"
    )
    return depth
