"""
合成场景

场景由 z = 0 地面上的多边形区域（可行驶区域、人行道）和长方体物体组成，
同一随机种子生成的场景完全一致。
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import numpy.typing as npt

from evaluation.shapes import Cuboid, Polygon2D
from utils.errors import InvalidArgumentError, PreconditionError

from .classes import DRIVABLE_AREA, WALKWAY, class_id

LAYOUTS = ("road", "crossroad", "plaza", "sectors", "none")

DEFAULT_SIZE_RANGES: Dict[str, Tuple[Tuple[float, float], ...]] = {
    # (长, 宽, 高) 各自的取值范围（米）
    "vehicle": ((3.8, 5.0), (1.7, 2.0), (1.4, 1.9)),
    "human": ((0.4, 0.7), (0.4, 0.7), (1.5, 1.9)),
    "movable_object": ((0.4, 1.0), (0.4, 1.0), (0.6, 1.2)),
}

MAX_PLACEMENT_ATTEMPTS = 1000

# 扇区半径远大于地平线附近像素的地面命中距离，地平线以下的每条射线都落在某个扇区内
SECTOR_RADIUS = 1.0e4


def _size_ranges_from_config(raw: Dict) -> Dict[str, Tuple[Tuple[float, float], ...]]:
    ranges = dict(DEFAULT_SIZE_RANGES)
    for name, triple in raw.items():
        try:
            bounds = tuple((float(lo), float(hi)) for lo, hi in triple)
        except (TypeError, ValueError) as exc:
            raise InvalidArgumentError(
                f"尺寸范围 {name} 必须是三组 [下限, 上限]: {triple!r}"
            ) from exc
        if len(bounds) != 3 or any(not 0 < lo <= hi for lo, hi in bounds):
            raise InvalidArgumentError(f"尺寸范围 {name} 必须是三组 0 < 下限 <= 上限: {triple!r}")
        ranges[name] = bounds
    return ranges


@dataclass
class SceneParams:
    """
    场景生成参数

    属性:
        counts (Dict[str, int]): 各类物体数量（vehicle, human, movable_object）
        size_ranges (Dict[str, tuple]): 各类物体尺寸范围
        layout (str): 地面布局 road / crossroad / plaza / sectors / none
        road_half_width (float): 车道半宽（米）
        walkway_width (float): 人行道宽度（米）
        ego_clearance (float): 自车周围不放置物体的半径（米）
        extent (float): 物体放置区域边长（米，以车辆为中心），物体底面整体落在其中
        ground_extent (float): 地面多边形边长（米）
        sector_count (int): sectors 布局的扇区数（偶数，可行驶区域与人行道交替）
        max_distance (float): 物体底面到自车的最大水平距离（米）
        min_gap_deg (float): 从自车看任意两个物体之间的最小方位角间隔（度）
        grid_snap (float): 非空时物体轴对齐，底面边界对齐到该步长的整数倍（米）
    """

    counts: Dict[str, int] = field(
        default_factory=lambda: {"vehicle": 8, "human": 6, "movable_object": 4}
    )
    size_ranges: Dict[str, Tuple[Tuple[float, float], ...]] = field(
        default_factory=lambda: dict(DEFAULT_SIZE_RANGES)
    )
    layout: str = "road"
    road_half_width: float = 5.0
    walkway_width: float = 3.0
    ego_clearance: float = 4.0
    extent: float = 96.0
    ground_extent: float = 160.0
    sector_count: int = 6
    max_distance: float = math.inf
    min_gap_deg: float = 0.0
    grid_snap: Optional[float] = None

    def __post_init__(self):
        if self.layout not in LAYOUTS:
            raise InvalidArgumentError(f"未知地面布局 {self.layout!r}，可选: {LAYOUTS}")
        for name, count in self.counts.items():
            class_id(name)
            if name not in self.size_ranges:
                raise InvalidArgumentError(f"缺少类别 {name} 的尺寸范围")
            if int(count) != count or count < 0:
                raise InvalidArgumentError(f"物体数量必须为非负整数: {name}={count}")
        if self.road_half_width <= 0 or self.walkway_width <= 0 or self.extent <= 0:
            raise InvalidArgumentError("道路宽度、人行道宽度与放置范围必须为正")
        if self.ground_extent < self.extent:
            raise InvalidArgumentError("地面范围不能小于物体放置范围")
        if self.sector_count < 4 or self.sector_count % 2:
            raise InvalidArgumentError(f"扇区数必须为不小于 4 的偶数: {self.sector_count}")
        if not self.max_distance > 0 or self.min_gap_deg < 0:
            raise InvalidArgumentError("最大距离必须为正，最小方位角间隔不能为负")
        if self.grid_snap is not None and not self.grid_snap > 0:
            raise InvalidArgumentError(f"对齐步长必须为正: {self.grid_snap}")

    @classmethod
    def from_config(cls, sim_config: Dict) -> "SceneParams":
        """
        由配置字典（sim 段）构造

        size_ranges 只需写出要覆盖的类别，例如 ``{"human": [[0.5, 0.8], [0.5, 0.8], [1.6, 1.9]]}``。

        异常:
            InvalidArgumentError: 取值非法
        """
        scalars = (
            "layout",
            "road_half_width",
            "walkway_width",
            "ego_clearance",
            "extent",
            "ground_extent",
            "max_distance",
            "min_gap_deg",
        )
        kwargs = {key: sim_config[key] for key in scalars if key in sim_config}
        for key in ("road_half_width", "walkway_width", "ego_clearance", "extent",
                    "ground_extent", "max_distance", "min_gap_deg"):
            if key in kwargs:
                kwargs[key] = float(kwargs[key])
        if "sector_count" in sim_config:
            kwargs["sector_count"] = int(sim_config["sector_count"])
        if sim_config.get("grid_snap") is not None:
            kwargs["grid_snap"] = float(sim_config["grid_snap"])
        if "counts" in sim_config:
            kwargs["counts"] = {k: int(v) for k, v in sim_config["counts"].items()}
        if sim_config.get("size_ranges"):
            kwargs["size_ranges"] = _size_ranges_from_config(sim_config["size_ranges"])
        return cls(**kwargs)


@dataclass
class Scene:
    """
    仿真场景

    物体允许悬空（中心高度不强制等于 h/2），用于构造对抗性测试场景。

    属性:
        ground (List[Polygon2D]): z = 0 平面上的地面区域
        objects (List[Cuboid]): 长方体物体
        seed (int): 生成时使用的随机种子
        has_ground (bool): 是否存在 z = 0 地面（False 时射线只可能命中物体）
    """

    ground: List[Polygon2D] = field(default_factory=list)
    objects: List[Cuboid] = field(default_factory=list)
    seed: Optional[int] = None
    has_ground: bool = True

    def ground_class(self, x: npt.ArrayLike, y: npt.ArrayLike) -> np.ndarray:
        """地面点所属类别（不在任何多边形内为背景 0，重叠时取列表中靠前的多边形）"""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        classes = np.zeros(np.broadcast(x, y).shape, dtype=np.int64)
        for poly in reversed(self.ground):
            classes = np.where(poly.contains(x, y), poly.class_id, classes)
        return classes

    def surface_distance(self, points: npt.ArrayLike) -> np.ndarray:
        """
        车体坐标点到最近场景表面（地面或长方体表面）的距离

        参数:
            points: (N, 3) 车体坐标点

        返回:
            (N,) 距离（米），没有任何表面时为 +inf
        """
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        best = np.full(pts.shape[0], np.inf)
        if self.has_ground:
            best = np.abs(pts[:, 2])
        for box in self.objects:
            q = np.abs(box.to_local(pts)) - box.half_size
            outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
            inside = np.abs(np.minimum(q.max(axis=1), 0.0))
            best = np.minimum(best, outside + inside)
        return best

    def objects_of(self, cid: int) -> List[Cuboid]:
        return [box for box in self.objects if box.class_id == cid]


def _rectangle(x0: float, x1: float, y0: float, y1: float, cid: int) -> Polygon2D:
    return Polygon2D(np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]]), cid)


def _sectors(count: int, offset: float) -> List[Polygon2D]:
    step = 2.0 * math.pi / count
    sectors = []
    for k in range(count):
        a0, a1 = offset + k * step, offset + (k + 1) * step
        vertices = np.array(
            [
                [0.0, 0.0],
                [SECTOR_RADIUS * math.cos(a0), SECTOR_RADIUS * math.sin(a0)],
                [SECTOR_RADIUS * math.cos(a1), SECTOR_RADIUS * math.sin(a1)],
            ]
        )
        sectors.append(Polygon2D(vertices, DRIVABLE_AREA if k % 2 == 0 else WALKWAY))
    return sectors


def build_ground(params: SceneParams, sector_offset: float = 0.0) -> List[Polygon2D]:
    """
    按布局生成地面多边形

    road: 沿 x 轴的一条道路，两侧人行道
    crossroad: 沿 x 轴与 y 轴的两条道路，四个象限的路边各有人行道
    plaza: 一个覆盖整个地面范围的可行驶区域
    sectors: 以自车为顶点的扇区，可行驶区域与人行道交替；扇区边界是过原点的射线，
        在光心位于原点正上方的水平相机中成像为竖直线
    none: 没有地面

    参数:
        params: 场景参数
        sector_offset: sectors 布局第一条边界的方位角（弧度）
    """
    half = params.ground_extent / 2.0
    r = params.road_half_width
    w = params.walkway_width
    if params.layout == "none":
        return []
    if params.layout == "plaza":
        return [_rectangle(-half, half, -half, half, DRIVABLE_AREA)]
    if params.layout == "sectors":
        return _sectors(params.sector_count, sector_offset)

    ground = [_rectangle(-half, half, -r, r, DRIVABLE_AREA)]
    if params.layout == "road":
        ground.append(_rectangle(-half, half, r, r + w, WALKWAY))
        ground.append(_rectangle(-half, half, -r - w, -r, WALKWAY))
        return ground

    ground.append(_rectangle(-r, r, -half, half, DRIVABLE_AREA))
    for sx in (-1.0, 1.0):
        lo, hi = sorted((sx * r, sx * half))
        ground.append(_rectangle(lo, hi, r, r + w, WALKWAY))
        ground.append(_rectangle(lo, hi, -r - w, -r, WALKWAY))
    for sy in (-1.0, 1.0):
        lo, hi = sorted((sy * (r + w), sy * half))
        ground.append(_rectangle(r, r + w, lo, hi, WALKWAY))
        ground.append(_rectangle(-r - w, -r, lo, hi, WALKWAY))
    return ground


def snap_to_grid(
    x: float, y: float, size: Tuple[float, float, float], yaw: float, step: float
) -> Tuple[float, float, Tuple[float, float, float]]:
    """
    把物体改为轴对齐，并让底面边界落在 step 的整数倍上

    偏航角取最近的 90° 倍数；奇数倍时交换长宽，之后偏航角记为 0。

    返回:
        (x, y, size)：对齐后的中心与尺寸
    """
    length, width, height = size
    if int(round(yaw / (math.pi / 2.0))) % 2:
        length, width = width, length
    length = max(step, round(length / step) * step)
    width = max(step, round(width / step) * step)
    x0 = round((x - length / 2.0) / step) * step
    y0 = round((y - width / 2.0) / step) * step
    return x0 + length / 2.0, y0 + width / 2.0, (length, width, height)


def azimuth_interval(box: Cuboid) -> Tuple[float, float]:
    """从原点看长方体底面的方位角区间 (lo, hi)，弧度，要求原点不在底面内"""
    corners = box.footprint_corners()
    center = math.atan2(box.center[1], box.center[0])
    relative = np.angle(np.exp(1j * (np.arctan2(corners[:, 1], corners[:, 0]) - center)))
    return center + float(relative.min()), center + float(relative.max())


def angular_gap(a: Tuple[float, float], b: Tuple[float, float]) -> float:
    """两个方位角区间之间的间隔（弧度），重叠时为负"""
    mid_a, mid_b = 0.5 * (a[0] + a[1]), 0.5 * (b[0] + b[1])
    offset = abs(math.remainder(mid_b - mid_a, 2.0 * math.pi))
    return offset - 0.5 * (a[1] - a[0]) - 0.5 * (b[1] - b[0])


class _Placer:
    """带拒绝采样的物体放置器"""

    def __init__(self, rng: np.random.Generator, params: SceneParams):
        self.rng = rng
        self.params = params
        self.placed: List[Cuboid] = []

    def _sample_size(self, name: str) -> Tuple[float, float, float]:
        return tuple(float(self.rng.uniform(lo, hi)) for lo, hi in self.params.size_ranges[name])

    def _position(self, name: str, size) -> Tuple[float, float, float]:
        p = self.params
        # 按底面半对角线收缩，底面整体落在放置区域内
        lim = max(p.extent / 2.0 - 0.5 * math.hypot(size[0], size[1]), 0.0)
        r, w = p.road_half_width, p.walkway_width
        along = float(self.rng.uniform(-lim, lim))
        jitter = float(self.rng.normal(0.0, 0.05))
        if p.layout not in ("road", "crossroad"):
            across = float(self.rng.uniform(-lim, lim))
            return along, across, float(self.rng.uniform(-math.pi, math.pi))

        if name == "vehicle":
            across = float(self.rng.uniform(-r + size[1] / 2.0, r - size[1] / 2.0))
            heading = jitter + (0.0 if across < 0 else math.pi)
        elif name == "human":
            side = 1.0 if self.rng.random() < 0.5 else -1.0
            across = side * float(self.rng.uniform(r + size[1] / 2.0, r + w - size[1] / 2.0))
            heading = float(self.rng.uniform(-math.pi, math.pi))
        else:
            side = 1.0 if self.rng.random() < 0.5 else -1.0
            across = side * float(self.rng.uniform(r - 1.5, r - size[1] / 2.0))
            heading = jitter
        if p.layout == "crossroad" and self.rng.random() < 0.5:
            # 放到沿 y 轴的道路上
            return -across, along, heading + math.pi / 2.0
        return along, across, heading

    def _accepts(self, box: Cuboid) -> bool:
        p = self.params
        x, y = box.center[0], box.center[1]
        radius = 0.5 * math.hypot(box.size[0], box.size[1])
        if math.hypot(x, y) < p.ego_clearance + radius:
            return False
        if np.hypot(*box.footprint_corners().T).max() > p.max_distance:
            return False
        for other in self.placed:
            r_other = 0.5 * math.hypot(other.size[0], other.size[1])
            if math.hypot(x - other.center[0], y - other.center[1]) < radius + r_other:
                return False
        if p.min_gap_deg > 0:
            gap = math.radians(p.min_gap_deg)
            span = azimuth_interval(box)
            if any(angular_gap(span, azimuth_interval(o)) < gap for o in self.placed):
                return False
        return True

    def place(self, name: str) -> Cuboid:
        cid = class_id(name)
        snap = self.params.grid_snap
        for _ in range(MAX_PLACEMENT_ATTEMPTS):
            size = self._sample_size(name)
            x, y, yaw = self._position(name, size)
            if snap is not None:
                x, y, size = snap_to_grid(x, y, size, yaw, snap)
                yaw = 0.0
            box = Cuboid(center=(x, y, size[2] / 2.0), size=size, yaw=yaw, class_id=cid)
            if self._accepts(box):
                self.placed.append(box)
                return box
        raise PreconditionError(f"无法在 {MAX_PLACEMENT_ATTEMPTS} 次尝试内放置 {name}，请减少物体数量")


def generate_scene(seed: int, params: Optional[SceneParams] = None) -> Scene:
    """
    生成随机场景

    车辆放在可行驶区域，行人放在人行道，可移动障碍物放在路边（plaza、sectors、none
    布局在整个放置区域内均匀放置）；所有物体与自车保持 ego_clearance 距离且互不重叠。
    sectors 布局的扇区起始方位角在物体放置之后随机抽取。

    参数:
        seed: 随机种子
        params: 场景参数，None 表示默认参数

    返回:
        Scene

    异常:
        PreconditionError: 物体过多无法放置
    """
    params = params or SceneParams()
    rng = np.random.default_rng(seed)
    placer = _Placer(rng, params)
    objects = []
    for name in ("vehicle", "human", "movable_object"):
        for _ in range(int(params.counts.get(name, 0))):
            objects.append(placer.place(name))
    offset = 0.0
    if params.layout == "sectors":
        offset = float(rng.uniform(0.0, 2.0 * math.pi / params.sector_count))
    return Scene(
        ground=build_ground(params, offset),
        objects=objects,
        seed=seed,
        has_ground=params.layout != "none",
    )
