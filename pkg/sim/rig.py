"""
默认传感器配置

六台环视相机（偏航 0°、±55°、±110°、180°）加一台车顶激光雷达，
以及对比时使用的可见区域掩码。
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np
import numpy.typing as npt

from bev.grid import GridSpec
from geometry import (
    CameraIntrinsics,
    CameraMount,
    CameraRig,
    RigidTransform,
    lidar_to_camera,
    lidar_to_vehicle,
    project_to_pixels,
)
from geometry.camera import Z_EPSILON
from utils.errors import InvalidArgumentError

DEFAULT_CAMERA_YAWS_DEG = (0.0, 55.0, -55.0, 110.0, -110.0, 180.0)
DEFAULT_CAMERA_NAMES = (
    "CAM_FRONT",
    "CAM_FRONT_LEFT",
    "CAM_FRONT_RIGHT",
    "CAM_BACK_LEFT",
    "CAM_BACK_RIGHT",
    "CAM_BACK",
)


def camera_extrinsics(yaw: float, position: Sequence[float]) -> RigidTransform:
    """
    水平朝向相机的外参（车体 -> 相机）

    相机光轴沿车体偏航角 yaw 方向，相机 x 轴向右，y 轴向下。

    参数:
        yaw: 偏航角（弧度，车体 +x 为 0，逆时针为正）
        position: 相机光心在车体坐标系中的位置
    """
    s, c = math.sin(yaw), math.cos(yaw)
    rotation = np.array(
        [
            [s, -c, 0.0],  # 右
            [0.0, 0.0, -1.0],  # 下
            [c, s, 0.0],  # 前
        ]
    )
    center = np.asarray(position, dtype=np.float64)
    return RigidTransform.from_rotation_translation(rotation, -rotation @ center)


def default_rig(
    height: int = 128,
    width: int = 352,
    camera_height: float = 1.5,
    horizontal_fov_deg: float = 70.0,
    lidar_height: float = 1.84,
    yaws_deg: Sequence[float] = DEFAULT_CAMERA_YAWS_DEG,
) -> CameraRig:
    """
    默认环视相机配置

    参数:
        height, width: 图像尺寸（像素）
        camera_height: 相机离地高度（米）
        horizontal_fov_deg: 水平视场角（度）
        lidar_height: 激光雷达离地高度（米）
        yaws_deg: 各相机偏航角（度）

    返回:
        CameraRig
    """
    intrinsics = CameraIntrinsics.from_fov(width, height, math.radians(horizontal_fov_deg))
    cameras = []
    for i, yaw_deg in enumerate(yaws_deg):
        name = DEFAULT_CAMERA_NAMES[i] if i < len(DEFAULT_CAMERA_NAMES) else f"CAM_{i}"
        extrinsics = camera_extrinsics(math.radians(yaw_deg), (0.0, 0.0, camera_height))
        cameras.append(CameraMount(name=name, intrinsics=intrinsics, extrinsics=extrinsics))
    lidar = RigidTransform.translation((0.0, 0.0, -lidar_height))
    return CameraRig(cameras=cameras, lidar_extrinsics=lidar)


@dataclass(frozen=True)
class LidarPattern:
    """
    旋转式激光雷达扫描模式

    属性:
        elevations (tuple): 各线俯仰角（弧度）
        azimuth_step (float): 方位角步长（弧度）
        max_range (float): 最大量程（米）
        dropout (float): 每条射线无回波的概率 [0, 1)
        seed (int): 无回波采样的随机种子
    """

    elevations: tuple
    azimuth_step: float
    max_range: float = 70.0
    dropout: float = 0.0
    seed: int = 0

    def __post_init__(self):
        elevations = tuple(float(e) for e in self.elevations)
        if not elevations:
            raise InvalidArgumentError("激光雷达至少需要一条线")
        if not all(-math.pi / 2 < e < math.pi / 2 for e in elevations):
            raise InvalidArgumentError("俯仰角必须在 (-π/2, π/2) 内")
        if not (0 < self.azimuth_step <= 2 * math.pi):
            raise InvalidArgumentError(f"方位角步长必须在 (0, 2π] 内: {self.azimuth_step}")
        if not self.max_range > 0:
            raise InvalidArgumentError(f"最大量程必须为正: {self.max_range}")
        if not 0.0 <= self.dropout < 1.0:
            raise InvalidArgumentError(f"无回波概率必须在 [0, 1) 内: {self.dropout}")
        object.__setattr__(self, "elevations", elevations)

    @classmethod
    def uniform(
        cls,
        rings: int,
        min_elevation_deg: float,
        max_elevation_deg: float,
        azimuth_steps: int,
        max_range: float = 70.0,
        dropout: float = 0.0,
        seed: int = 0,
    ) -> "LidarPattern":
        """俯仰角均匀分布、方位角等分一周的扫描模式"""
        if rings < 1 or azimuth_steps < 1:
            raise InvalidArgumentError(f"线数与方位角采样数必须为正: {rings}, {azimuth_steps}")
        elevations = np.radians(np.linspace(min_elevation_deg, max_elevation_deg, rings))
        return cls(
            elevations=tuple(elevations),
            azimuth_step=2 * math.pi / azimuth_steps,
            max_range=max_range,
            dropout=dropout,
            seed=seed,
        )

    @classmethod
    def from_config(cls, lidar_config: Dict, seed: int = 0) -> "LidarPattern":
        """由配置字典（sim.lidar 段）构造"""
        return cls.uniform(
            rings=int(lidar_config.get("rings", 32)),
            min_elevation_deg=float(lidar_config.get("min_elevation_deg", -30.67)),
            max_elevation_deg=float(lidar_config.get("max_elevation_deg", 10.67)),
            azimuth_steps=int(lidar_config.get("azimuth_steps", 1085)),
            max_range=float(lidar_config.get("max_range", 70.0)),
            dropout=float(lidar_config.get("dropout", 0.0)),
            seed=seed,
        )

    @property
    def azimuths(self) -> np.ndarray:
        count = int(round(2 * math.pi / self.azimuth_step))
        return np.arange(count) * self.azimuth_step

    @property
    def ray_count(self) -> int:
        return len(self.elevations) * len(self.azimuths)

    def directions(self) -> np.ndarray:
        """(rings * azimuths, 3) 雷达坐标系单位方向，按线优先排列"""
        el, az = np.meshgrid(np.asarray(self.elevations), self.azimuths, indexing="ij")
        dirs = np.stack([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)], axis=-1)
        return dirs.reshape(-1, 3)


def default_lidar_pattern(
    max_range: float = 70.0, dropout: float = 0.0, seed: int = 0
) -> LidarPattern:
    """32 线、-30.67° 至 +10.67°、每圈 1085 个方位角"""
    return LidarPattern.uniform(
        32, -30.67, 10.67, 1085, max_range=max_range, dropout=dropout, seed=seed
    )


def camera_visibility_mask(rig: CameraRig, spec: GridSpec) -> np.ndarray:
    """
    至少被一台相机水平视场覆盖的 BEV 单元

    单元中心取相机光心高度，判断其是否在相机前方且投影列落在 [0, W) 内。

    返回:
        (X, Y) bool
    """
    xs, ys = spec.cell_centers()
    mesh_x, mesh_y = np.meshgrid(xs, ys, indexing="ij")
    visible = np.zeros(spec.shape, dtype=bool)
    for mount in rig.cameras:
        center = mount.center
        heights = np.full_like(mesh_x, center[2])
        points = np.stack([mesh_x, mesh_y, heights], axis=-1).reshape(-1, 3)
        cam = mount.extrinsics.apply(points)
        intr = mount.intrinsics
        in_front = cam[:, 2] > Z_EPSILON
        with np.errstate(divide="ignore", invalid="ignore"):
            u = intr.fx * cam[:, 0] / cam[:, 2] + intr.cx
        seen = in_front & (u >= 0) & (u < intr.width)
        visible |= seen.reshape(spec.shape)
    return visible


def lidar_range_mask(
    spec: GridSpec, max_range: float, lidar_extrinsics: Optional[RigidTransform] = None
) -> np.ndarray:
    """单元中心到激光雷达的水平距离不超过 max_range 的单元 (X, Y) bool"""
    origin = np.zeros(3)
    if lidar_extrinsics is not None:
        origin = lidar_extrinsics.inverse().translation_vector
    xs, ys = spec.cell_centers()
    mesh_x, mesh_y = np.meshgrid(xs, ys, indexing="ij")
    return np.hypot(mesh_x - origin[0], mesh_y - origin[1]) <= max_range


def lidar_hit_mask(cloud: npt.ArrayLike, rig: CameraRig, spec: GridSpec) -> np.ndarray:
    """
    含有相机可见激光点的 BEV 单元

    激光点先投影到各相机，落入任一图像的点再变换到车体坐标系，按单元标记。

    参数:
        cloud: (N, 3) 雷达坐标系点云
        rig: 相机配置（含 E_P）
        spec: 栅格几何

    返回:
        (X, Y) bool
    """
    hit = np.zeros(spec.shape, dtype=bool)
    points = np.asarray(cloud, dtype=np.float64).reshape(-1, 3)
    if points.shape[0] == 0:
        return hit
    seen = np.zeros(points.shape[0], dtype=bool)
    for mount in rig.cameras:
        points_cam = lidar_to_camera(points, rig.lidar_extrinsics, mount.extrinsics)
        seen[project_to_pixels(points_cam, mount.intrinsics).source_index] = True
    ix, iy, inside = spec.cell_indices(lidar_to_vehicle(points[seen], rig.lidar_extrinsics))
    hit[ix[inside], iy[inside]] = True
    return hit
