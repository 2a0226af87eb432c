"""
BEV 栅格定义

车体坐标系：+x 向前，+y 向左，+z 向上，栅格以车辆为中心。
单元下标 ix = ⌊(x + x_extent/2) / resolution⌋，iy = ⌊(y + y_extent/2) / resolution⌋，
区间左闭右开，边界上的点按确定规则落格。
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import numpy.typing as npt

from utils.errors import InvalidArgumentError


@dataclass(frozen=True)
class GridSpec:
    """
    BEV 栅格几何

    属性:
        x_extent, y_extent (float): 覆盖范围（米）
        resolution (float): 单元边长（米/格）
        z_min, z_max (float): 纳入 BEV 的竖直范围 [z_min, z_max)（米）

    示例:
        >>> spec = GridSpec()
        >>> spec.cells_x, spec.cells_y
        (200, 200)
    """

    x_extent: float = 100.0
    y_extent: float = 100.0
    resolution: float = 0.5
    z_min: float = -2.0
    z_max: float = 4.0

    def __post_init__(self):
        for name in ("x_extent", "y_extent", "resolution", "z_min", "z_max"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidArgumentError(f"GridSpec.{name} 必须为有限值: {value}")
            object.__setattr__(self, name, value)
        if self.resolution <= 0 or self.x_extent <= 0 or self.y_extent <= 0:
            raise InvalidArgumentError(
                f"范围与分辨率必须为正: {self.x_extent} x {self.y_extent} @ {self.resolution}"
            )
        if not self.z_min < self.z_max:
            raise InvalidArgumentError(f"要求 z_min < z_max: [{self.z_min}, {self.z_max})")
        for extent in (self.x_extent, self.y_extent):
            cells = extent / self.resolution
            if abs(cells - round(cells)) > 1e-9 * max(1.0, cells):
                raise InvalidArgumentError(f"范围 {extent} 不是分辨率 {self.resolution} 的整数倍")

    @property
    def cells_x(self) -> int:
        """X：x 方向单元数"""
        return int(round(self.x_extent / self.resolution))

    @property
    def cells_y(self) -> int:
        """Y：y 方向单元数"""
        return int(round(self.y_extent / self.resolution))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.cells_x, self.cells_y

    def coarsened(self, factor: int = 2) -> "GridSpec":
        """
        单元数缩小 factor 倍、分辨率放大 factor 倍的同范围栅格

        异常:
            InvalidArgumentError: 单元数不能被 factor 整除
        """
        if factor < 1 or self.cells_x % factor or self.cells_y % factor:
            raise InvalidArgumentError(
                f"栅格 {self.cells_x}x{self.cells_y} 不能按因子 {factor} 粗化"
            )
        return GridSpec(
            x_extent=self.x_extent,
            y_extent=self.y_extent,
            resolution=self.resolution * factor,
            z_min=self.z_min,
            z_max=self.z_max,
        )

    def cell_centers(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        各单元中心坐标

        返回:
            (xs, ys)：长度分别为 X、Y 的一维数组
        """
        xs = (np.arange(self.cells_x) + 0.5) * self.resolution - self.x_extent / 2.0
        ys = (np.arange(self.cells_y) + 0.5) * self.resolution - self.y_extent / 2.0
        return xs, ys

    def cell_indices(self, points: npt.ArrayLike) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        车体坐标点所在单元

        参数:
            points: (N, 3) 车体坐标系下的点

        返回:
            (ix, iy, inside)：inside 为点是否落在栅格体积内，越界点的下标无意义
        """
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        ix = np.floor((pts[:, 0] + self.x_extent / 2.0) / self.resolution).astype(np.int64)
        iy = np.floor((pts[:, 1] + self.y_extent / 2.0) / self.resolution).astype(np.int64)
        inside = (
            (pts[:, 0] >= -self.x_extent / 2.0)
            & (pts[:, 0] < self.x_extent / 2.0)
            & (pts[:, 1] >= -self.y_extent / 2.0)
            & (pts[:, 1] < self.y_extent / 2.0)
            & (pts[:, 2] >= self.z_min)
            & (pts[:, 2] < self.z_max)
        )
        # 除法舍入可能把紧贴上边界的点算到第 X 格
        inside &= (ix >= 0) & (ix < self.cells_x) & (iy >= 0) & (iy < self.cells_y)
        return ix, iy, inside


@dataclass(frozen=True)
class BevGrid:
    """
    BEV 特征栅格 B

    属性:
        data (np.ndarray): (N_f, X, Y) float64，下标 [c, ix, iy]
        spec (GridSpec): 栅格几何
    """

    data: np.ndarray
    spec: GridSpec

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3 or data.shape[1:] != self.spec.shape:
            raise InvalidArgumentError(
                f"BEV 数据形状 {data.shape} 与栅格 {self.spec.shape} 不一致"
            )
        if not np.all(np.isfinite(data)):
            raise InvalidArgumentError("BEV 栅格包含非有限值")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def zeros(cls, spec: GridSpec, channels: int) -> "BevGrid":
        return cls(np.zeros((channels, spec.cells_x, spec.cells_y)), spec)

    @property
    def channels(self) -> int:
        return int(self.data.shape[0])

    def channel(self, index: int) -> np.ndarray:
        return self.data[index]

    def occupancy(self) -> np.ndarray:
        """(X, Y) bool：任一通道非零的单元"""
        return np.any(self.data != 0.0, axis=0)

    def nonzero_cells(self) -> int:
        """非零单元数"""
        return int(np.count_nonzero(self.occupancy()))

    def total_mass(self) -> float:
        """所有单元、所有通道的特征总和"""
        return float(self.data.sum())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BevGrid):
            return NotImplemented
        return self.spec == other.spec and bool(np.array_equal(self.data, other.data))
