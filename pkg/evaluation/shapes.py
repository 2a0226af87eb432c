"""
真值几何与语义栅格

    - Cuboid: 车体坐标系下带偏航角的长方体标注
    - Polygon2D: z = 0 地面上的简单多边形（地图区域）
    - SemanticGrid: C 个二值通道的 BEV 语义栅格 y
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from bev.grid import GridSpec
from utils.errors import InvalidArgumentError


@dataclass(frozen=True)
class Cuboid:
    """
    长方体标注

    属性:
        center (Tuple[float, float, float]): 中心点（车体坐标，米）
        size (Tuple[float, float, float]): 长 l（沿偏航方向）、宽 w、高 h（米）
        yaw (float): 绕 +z 的偏航角（弧度）
        class_id (int): 类别编号
    """

    center: Tuple[float, float, float]
    size: Tuple[float, float, float]
    yaw: float = 0.0
    class_id: int = 0

    def __post_init__(self):
        center = tuple(float(c) for c in self.center)
        size = tuple(float(s) for s in self.size)
        if len(center) != 3 or len(size) != 3:
            raise InvalidArgumentError(f"中心与尺寸必须为三维: {center}, {size}")
        if not all(math.isfinite(v) for v in center + size + (float(self.yaw),)):
            raise InvalidArgumentError("长方体参数包含非有限值")
        if min(size) <= 0:
            raise InvalidArgumentError(f"长方体尺寸必须为正: {size}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "size", size)
        object.__setattr__(self, "yaw", float(self.yaw))
        object.__setattr__(self, "class_id", int(self.class_id))

    @property
    def half_size(self) -> np.ndarray:
        return np.asarray(self.size) / 2.0

    def to_local(self, points: npt.ArrayLike) -> np.ndarray:
        """车体坐标 -> 长方体局部坐标（原点在中心，x 沿长边）"""
        pts = np.asarray(points, dtype=np.float64)
        offset = pts[..., :3] - np.asarray(self.center)
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        local = np.empty_like(offset)
        local[..., 0] = c * offset[..., 0] + s * offset[..., 1]
        local[..., 1] = -s * offset[..., 0] + c * offset[..., 1]
        local[..., 2] = offset[..., 2]
        return local

    def footprint_contains(self, x: npt.ArrayLike, y: npt.ArrayLike) -> np.ndarray:
        """平面点是否落在旋转后的底面矩形内（闭区间）"""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        dx, dy = x - self.center[0], y - self.center[1]
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        lx = c * dx + s * dy
        ly = -s * dx + c * dy
        return (np.abs(lx) <= self.size[0] / 2.0) & (np.abs(ly) <= self.size[1] / 2.0)

    def footprint_corners(self) -> np.ndarray:
        """底面四个角点 (4, 2)，逆时针"""
        hl, hw = self.size[0] / 2.0, self.size[1] / 2.0
        local = np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]])
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        rot = np.array([[c, -s], [s, c]])
        return local @ rot.T + np.asarray(self.center[:2])

    def to_dict(self) -> Dict:
        return {
            "center": list(self.center),
            "size": list(self.size),
            "yaw": self.yaw,
            "class_id": self.class_id,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "Cuboid":
        return cls(
            center=tuple(data["center"]),
            size=tuple(data["size"]),
            yaw=data.get("yaw", 0.0),
            class_id=data["class_id"],
        )


def _orientation(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    return float((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))


def _on_segment(a: np.ndarray, b: np.ndarray, p: np.ndarray) -> bool:
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def _segments_intersect(p1, p2, q1, q2) -> bool:
    d1 = _orientation(q1, q2, p1)
    d2 = _orientation(q1, q2, p2)
    d3 = _orientation(p1, p2, q1)
    d4 = _orientation(p1, p2, q2)
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return True
    if d1 == 0 and _on_segment(q1, q2, p1):
        return True
    if d2 == 0 and _on_segment(q1, q2, p2):
        return True
    if d3 == 0 and _on_segment(p1, p2, q1):
        return True
    if d4 == 0 and _on_segment(p1, p2, q2):
        return True
    return False


def is_simple_polygon(vertices: np.ndarray) -> bool:
    """非相邻边互不相交（含端点接触）"""
    n = len(vertices)
    for i in range(n):
        a1, a2 = vertices[i], vertices[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_intersect(a1, a2, vertices[j], vertices[(j + 1) % n]):
                return False
    return True


@dataclass(frozen=True)
class Polygon2D:
    """
    地面多边形

    属性:
        vertices (np.ndarray): (N, 2) 有序顶点（车体坐标，米），N >= 3
        class_id (int): 类别编号

    异常:
        InvalidArgumentError: 顶点不足或多边形自相交
    """

    vertices: np.ndarray
    class_id: int = 0

    def __post_init__(self):
        vertices = np.asarray(self.vertices, dtype=np.float64)
        if vertices.ndim != 2 or vertices.shape[1] != 2 or vertices.shape[0] < 3:
            raise InvalidArgumentError(f"多边形至少需要 3 个二维顶点，实际 {vertices.shape}")
        if not np.all(np.isfinite(vertices)):
            raise InvalidArgumentError("多边形顶点包含非有限值")
        if not is_simple_polygon(vertices):
            raise InvalidArgumentError("多边形自相交")
        vertices.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "class_id", int(self.class_id))

    def contains(self, x: npt.ArrayLike, y: npt.ArrayLike) -> np.ndarray:
        """
        奇偶规则判断点是否在多边形内

        参数:
            x, y: 同形状的坐标数组

        返回:
            同形状 bool 数组
        """
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        inside = np.zeros(np.broadcast(x, y).shape, dtype=bool)
        verts = self.vertices
        n = len(verts)
        for i in range(n):
            x1, y1 = verts[i]
            x2, y2 = verts[(i + 1) % n]
            if y1 == y2:
                continue
            crosses = (y1 > y) != (y2 > y)
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            inside ^= crosses & (x < x_cross)
        return inside

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polygon2D):
            return NotImplemented
        if self.class_id != other.class_id:
            return False
        return bool(np.array_equal(self.vertices, other.vertices))

    def to_dict(self) -> Dict:
        return {"vertices": self.vertices.tolist(), "class_id": self.class_id}

    @classmethod
    def from_dict(cls, data: Dict) -> "Polygon2D":
        vertices = np.asarray(data["vertices"], dtype=np.float64)
        return cls(vertices=vertices, class_id=data["class_id"])


@dataclass(frozen=True)
class SemanticGrid:
    """
    BEV 语义栅格 y

    属性:
        data (np.ndarray): (C, X, Y) uint8，取值只能为 0 或 1
        class_ids (Tuple[int, ...]): 第 c 个通道对应的类别编号
        spec (GridSpec): 栅格几何
    """

    data: np.ndarray
    class_ids: Tuple[int, ...]
    spec: GridSpec

    def __post_init__(self):
        data = np.asarray(self.data)
        class_ids = tuple(int(c) for c in self.class_ids)
        if data.ndim != 3 or data.shape[1:] != self.spec.shape:
            raise InvalidArgumentError(f"语义栅格形状 {data.shape} 与栅格 {self.spec.shape} 不一致")
        if data.shape[0] != len(class_ids):
            raise InvalidArgumentError(
                f"通道数 {data.shape[0]} 与类别列表 {class_ids} 长度不一致"
            )
        if len(set(class_ids)) != len(class_ids):
            raise InvalidArgumentError(f"类别编号重复: {class_ids}")
        if data.size and not np.all((data == 0) | (data == 1)):
            raise InvalidArgumentError("语义栅格的取值只能为 0 或 1")
        data = data.astype(np.uint8)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "class_ids", class_ids)

    @classmethod
    def zeros(cls, spec: GridSpec, class_ids: Sequence[int]) -> "SemanticGrid":
        data = np.zeros((len(class_ids), spec.cells_x, spec.cells_y), dtype=np.uint8)
        return cls(data, tuple(class_ids), spec)

    def channel_index(self, class_id: int) -> int:
        try:
            return self.class_ids.index(int(class_id))
        except ValueError as exc:
            raise InvalidArgumentError(f"语义栅格中没有类别 {class_id}，现有 {self.class_ids}") from exc

    def channel(self, class_id: int) -> np.ndarray:
        """按类别编号取通道 (X, Y)"""
        return self.data[self.channel_index(class_id)]

    def select(self, class_ids: Sequence[int]) -> "SemanticGrid":
        """按给定顺序抽取部分类别"""
        indices = [self.channel_index(c) for c in class_ids]
        return SemanticGrid(self.data[indices], tuple(class_ids), self.spec)

    def positive_cells(self, class_id: Optional[int] = None) -> int:
        if class_id is None:
            return int(np.count_nonzero(np.any(self.data, axis=0)))
        return int(np.count_nonzero(self.channel(class_id)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SemanticGrid):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.class_ids == other.class_ids
            and bool(np.array_equal(self.data, other.data))
        )
