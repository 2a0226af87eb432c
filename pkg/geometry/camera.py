"""
针孔相机模型

相机坐标系约定：+z 沿光轴向前，+x 向右，+y 向下。
投影 u = fx·x/z + cx，v = fy·y/z + cy；反投影为其逆运算。
不建模镜头畸变。
"""

import math
from dataclasses import dataclass, field
from typing import List

import numpy as np
import numpy.typing as npt

from utils.errors import CalibrationError, InvalidArgumentError, InvalidDepthError

from .transforms import RigidTransform, Vec3, _as_points, as_transform

# 近平面阈值（米）：z 不大于该值的点不参与投影
Z_EPSILON = 1e-3


@dataclass(frozen=True)
class CameraIntrinsics:
    """
    相机内参 I_k（零倾斜）

    属性:
        fx, fy (float): 焦距（像素）
        cx, cy (float): 主点（像素）
        width, height (int): 图像尺寸（像素）
    """

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        values = (self.fx, self.fy, self.cx, self.cy)
        if not all(math.isfinite(v) for v in values):
            raise CalibrationError(f"内参包含非有限值: {values}")
        if self.fx <= 0 or self.fy <= 0:
            raise CalibrationError(f"焦距必须为正: fx={self.fx}, fy={self.fy}")
        if int(self.width) != self.width or int(self.height) != self.height:
            raise CalibrationError(f"图像尺寸必须为整数: {self.width}x{self.height}")
        if self.width <= 0 or self.height <= 0:
            raise CalibrationError(f"图像尺寸必须为正: {self.width}x{self.height}")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise CalibrationError(
                f"主点 ({self.cx}, {self.cy}) 超出图像范围 {self.width}x{self.height}"
            )
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))

    @classmethod
    def from_fov(cls, width: int, height: int, horizontal_fov: float) -> "CameraIntrinsics":
        """
        由水平视场角构造方形像素相机，主点位于图像中心

        参数:
            width, height: 图像尺寸（像素）
            horizontal_fov: 水平视场角（弧度）
        """
        if not 0 < horizontal_fov < math.pi:
            raise CalibrationError(f"水平视场角必须在 (0, π) 内: {horizontal_fov}")
        focal = (width / 2.0) / math.tan(horizontal_fov / 2.0)
        return cls(fx=focal, fy=focal, cx=width / 2.0, cy=height / 2.0, width=width, height=height)

    @property
    def matrix(self) -> np.ndarray:
        """3x3 内参矩阵"""
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]], dtype=np.float64
        )

    @property
    def inverse_matrix(self) -> np.ndarray:
        """内参矩阵的闭式逆"""
        return np.array(
            [
                [1.0 / self.fx, 0.0, -self.cx / self.fx],
                [0.0, 1.0 / self.fy, -self.cy / self.fy],
                [0.0, 0.0, 1.0],
            ],
            dtype=np.float64,
        )

    @property
    def horizontal_fov(self) -> float:
        """水平视场角（弧度，按主点两侧的较宽一侧对称计算）"""
        half = max(self.cx, self.width - self.cx)
        return 2.0 * math.atan(half / self.fx)


@dataclass(frozen=True)
class CameraMount:
    """
    安装在车上的一台相机

    属性:
        name (str): 相机名称
        intrinsics (CameraIntrinsics): 内参 I_k
        extrinsics (RigidTransform): 外参 E_k（车体 -> 相机）
    """

    name: str
    intrinsics: CameraIntrinsics
    extrinsics: RigidTransform

    def __post_init__(self):
        object.__setattr__(self, "extrinsics", as_transform(self.extrinsics))

    @property
    def center(self) -> np.ndarray:
        """相机光心在车体坐标系中的位置"""
        return self.extrinsics.inverse().translation_vector.copy()


@dataclass(frozen=True)
class CameraRig:
    """
    多相机 + 单激光雷达的传感器配置

    属性:
        cameras (List[CameraMount]): 有序相机列表，n >= 1
        lidar_extrinsics (RigidTransform): E_P（车体 -> 雷达）
    """

    cameras: List[CameraMount]
    lidar_extrinsics: RigidTransform = field(default_factory=RigidTransform.identity)

    def __post_init__(self):
        if len(self.cameras) < 1:
            raise CalibrationError("相机配置至少需要一台相机")
        object.__setattr__(self, "cameras", list(self.cameras))
        object.__setattr__(self, "lidar_extrinsics", as_transform(self.lidar_extrinsics))

    def __len__(self) -> int:
        return len(self.cameras)

    @property
    def image_size(self) -> tuple:
        """第一台相机的 (height, width)"""
        first = self.cameras[0].intrinsics
        return first.height, first.width


@dataclass(frozen=True)
class PixelProjection:
    """
    投影结果

    属性:
        uv (np.ndarray): (M, 2) 像素坐标 (u, v)
        depth (np.ndarray): (M,) 相机 z 轴深度（米）
        source_index (np.ndarray): (M,) 每个结果对应的输入点下标
    """

    uv: np.ndarray
    depth: np.ndarray
    source_index: np.ndarray

    def __len__(self) -> int:
        return int(self.depth.shape[0])

    @property
    def u(self) -> np.ndarray:
        return self.uv[:, 0]

    @property
    def v(self) -> np.ndarray:
        return self.uv[:, 1]


def project_to_pixels(
    points_cam: npt.ArrayLike,
    intrinsics: CameraIntrinsics,
    z_epsilon: float = Z_EPSILON,
) -> PixelProjection:
    """
    把相机坐标系下的点投影到像素平面

    z <= z_epsilon 的点以及落在 [0, W) x [0, H) 之外的点被丢弃，
    保留点按输入顺序输出并记录源下标。

    参数:
        points_cam: (N, 3) 相机坐标系下的点
        intrinsics: 相机内参
        z_epsilon: 近平面阈值（米）

    返回:
        PixelProjection
    """
    pts = _as_points(points_cam) if np.size(points_cam) else np.empty((0, 3))
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]

    in_front = z > z_epsilon
    idx = np.flatnonzero(in_front)
    x, y, z = x[idx], y[idx], z[idx]

    u = intrinsics.fx * x / z + intrinsics.cx
    v = intrinsics.fy * y / z + intrinsics.cy
    in_frame = (u >= 0) & (u < intrinsics.width) & (v >= 0) & (v < intrinsics.height)

    return PixelProjection(
        uv=np.stack([u[in_frame], v[in_frame]], axis=1),
        depth=z[in_frame],
        source_index=idx[in_frame],
    )


def back_project_pixel(u: float, v: float, delta: float, intrinsics: CameraIntrinsics) -> Vec3:
    """
    单个像素反投影：I_k⁻¹ · δ · (u, v, 1)ᵀ

    参数:
        u, v: 像素坐标
        delta: 深度（米），必须为正
        intrinsics: 相机内参

    返回:
        相机坐标系下的 Vec3

    异常:
        InvalidDepthError: delta <= 0 或非有限
    """
    if not (math.isfinite(delta) and delta > 0):
        raise InvalidDepthError(f"反投影深度必须为正: {delta}")
    return Vec3(
        x=delta * (u - intrinsics.cx) / intrinsics.fx,
        y=delta * (v - intrinsics.cy) / intrinsics.fy,
        z=float(delta),
    )


def back_project_pixels(
    u: npt.ArrayLike,
    v: npt.ArrayLike,
    delta: npt.ArrayLike,
    intrinsics: CameraIntrinsics,
) -> np.ndarray:
    """
    批量反投影（与 back_project_pixel 逐元素一致）

    返回:
        (N, 3) 相机坐标系下的点

    异常:
        InvalidDepthError: 任一深度不为正
        InvalidArgumentError: 输入长度不一致
    """
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    delta = np.asarray(delta, dtype=np.float64).ravel()
    if not (u.shape == v.shape == delta.shape):
        raise InvalidArgumentError(f"u/v/delta 长度不一致: {u.shape}, {v.shape}, {delta.shape}")
    if delta.size and not np.all(np.isfinite(delta) & (delta > 0)):
        raise InvalidDepthError("反投影深度必须全部为正")
    x = delta * (u - intrinsics.cx) / intrinsics.fx
    y = delta * (v - intrinsics.cy) / intrinsics.fy
    return np.stack([x, y, delta], axis=1)


def camera_ray_directions(
    intrinsics: CameraIntrinsics, u: npt.ArrayLike, v: npt.ArrayLike
) -> np.ndarray:
    """
    像素对应的相机坐标系射线方向（z 分量为 1，射线参数即为相机 z 深度）

    返回:
        (N, 3) 方向数组
    """
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    return np.stack(
        [(u - intrinsics.cx) / intrinsics.fx, (v - intrinsics.cy) / intrinsics.fy, np.ones_like(u)],
        axis=1,
    )
