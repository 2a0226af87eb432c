"""
刚体变换模块

提供 4x4 齐次刚体变换及激光雷达、车体、相机三个坐标系之间的换算。

坐标系约定:
    - E_P 把车体坐标映射到激光雷达坐标（车体 -> 雷达）
    - E_k 把车体坐标映射到第 k 个相机坐标（车体 -> 相机）
    - 因此雷达点到相机坐标为 E_k · E_P⁻¹ · p
"""

from typing import NamedTuple, Sequence, Union

import numpy as np
import numpy.typing as npt
from scipy.spatial.transform import Rotation

from utils.errors import CalibrationError, InvalidArgumentError

ORTHONORMAL_TOL = 1e-6

ArrayLike = npt.ArrayLike


class Vec3(NamedTuple):
    """三维点（米）"""

    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        """转换为 float64 数组"""
        return np.array([self.x, self.y, self.z], dtype=np.float64)


class RigidTransform:
    """
    刚体变换

    内部保存 4x4 齐次矩阵（float64），构造时校验：
    旋转块正交（RᵀR ≈ I，容差 1e-6）、det(R) ≈ +1、最后一行严格为 [0, 0, 0, 1]。

    属性:
        matrix (np.ndarray): 4x4 齐次矩阵（只读副本）

    示例:
        >>> T = RigidTransform.translation([0.0, 0.0, -5.0])
        >>> T.apply([0.0, 0.0, 5.0])
        array([0., 0., 0.])
    """

    __slots__ = ("_matrix",)

    def __init__(self, matrix: ArrayLike):
        """
        参数:
            matrix: 4x4 齐次矩阵

        异常:
            CalibrationError: 矩阵形状错误、含非有限值、不是刚体变换
        """
        m = np.array(matrix, dtype=np.float64)
        if m.shape != (4, 4):
            raise CalibrationError(f"刚体变换必须是 4x4 矩阵，实际形状 {m.shape}")
        if not np.all(np.isfinite(m)):
            raise CalibrationError("刚体变换矩阵包含非有限值")
        if not np.array_equal(m[3], np.array([0.0, 0.0, 0.0, 1.0])):
            raise CalibrationError(f"齐次矩阵最后一行必须为 [0, 0, 0, 1]，实际 {m[3].tolist()}")

        rotation = m[:3, :3]
        gram_error = np.max(np.abs(rotation.T @ rotation - np.eye(3)))
        if gram_error > ORTHONORMAL_TOL:
            raise CalibrationError(f"旋转块不正交（偏差 {gram_error:.3e} 超过 {ORTHONORMAL_TOL}）")
        det = np.linalg.det(rotation)
        if abs(det - 1.0) > ORTHONORMAL_TOL:
            raise CalibrationError(f"旋转块行列式必须为 +1，实际 {det:.6f}")

        m.setflags(write=False)
        self._matrix = m

    # ------------------------------------------------------------------
    # 构造方法
    # ------------------------------------------------------------------
    @classmethod
    def identity(cls) -> "RigidTransform":
        """单位变换"""
        return cls(np.eye(4))

    @classmethod
    def from_rotation_translation(
        cls, rotation: ArrayLike, translation: ArrayLike
    ) -> "RigidTransform":
        """
        由旋转矩阵和平移向量构造

        参数:
            rotation: 3x3 旋转矩阵
            translation: 长度为 3 的平移向量（米）
        """
        m = np.eye(4)
        m[:3, :3] = np.asarray(rotation, dtype=np.float64)
        m[:3, 3] = np.asarray(translation, dtype=np.float64).reshape(3)
        return cls(m)

    @classmethod
    def translation(cls, translation: ArrayLike) -> "RigidTransform":
        """纯平移变换"""
        return cls.from_rotation_translation(np.eye(3), translation)

    @classmethod
    def from_euler(
        cls,
        seq: str,
        angles: Union[float, Sequence[float]],
        translation: ArrayLike = (0.0, 0.0, 0.0),
        degrees: bool = False,
    ) -> "RigidTransform":
        """
        由欧拉角构造（scipy Rotation 约定）

        参数:
            seq: 轴序列，例如 "z" 或 "zyx"
            angles: 角度
            translation: 平移向量（米）
            degrees: 角度单位是否为度
        """
        rotation = Rotation.from_euler(seq, angles, degrees=degrees).as_matrix()
        return cls.from_rotation_translation(rotation, translation)

    @classmethod
    def random(cls, rng: np.random.Generator, max_translation: float = 10.0) -> "RigidTransform":
        """随机 SE(3) 变换，主要用于测试"""
        quat = rng.normal(size=4)
        rotation = Rotation.from_quat(quat / np.linalg.norm(quat)).as_matrix()
        translation = rng.uniform(-max_translation, max_translation, size=3)
        return cls.from_rotation_translation(rotation, translation)

    # ------------------------------------------------------------------
    # 属性
    # ------------------------------------------------------------------
    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def rotation(self) -> np.ndarray:
        return self._matrix[:3, :3]

    @property
    def translation_vector(self) -> np.ndarray:
        return self._matrix[:3, 3]

    # ------------------------------------------------------------------
    # 运算
    # ------------------------------------------------------------------
    def inverse(self) -> "RigidTransform":
        """闭式求逆：[Rᵀ, -Rᵀt]"""
        r_t = self.rotation.T
        return RigidTransform.from_rotation_translation(r_t, -r_t @ self.translation_vector)

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """返回 self · other（先应用 other）"""
        return RigidTransform(self._matrix @ as_transform(other).matrix)

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return self.compose(other)

    def apply(self, points: ArrayLike) -> np.ndarray:
        """
        对点集应用变换

        参数:
            points: 形状 (3,) 或 (N, 3) 的点

        返回:
            同形状的 float64 数组
        """
        pts = _as_points(points)
        out = pts @ self.rotation.T + self.translation_vector
        return out.reshape(np.shape(points)) if np.ndim(points) == 1 else out

    def allclose(self, other: "RigidTransform", atol: float = 1e-9) -> bool:
        return bool(np.allclose(self._matrix, as_transform(other).matrix, rtol=0.0, atol=atol))

    def to_list(self) -> list:
        return self._matrix.tolist()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RigidTransform):
            return NotImplemented
        return bool(np.array_equal(self._matrix, other._matrix))

    def __hash__(self) -> int:
        return hash(self._matrix.tobytes())

    def __repr__(self) -> str:
        return f"RigidTransform({self._matrix.tolist()})"


def as_transform(value: Union[RigidTransform, ArrayLike]) -> RigidTransform:
    """
    把 4x4 矩阵或 RigidTransform 统一为 RigidTransform

    异常:
        CalibrationError: 矩阵不是合法刚体变换（含退化矩阵）
    """
    if isinstance(value, RigidTransform):
        return value
    return RigidTransform(value)


def _as_points(points: ArrayLike) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise InvalidArgumentError(f"点集形状必须为 (N, 3)，实际 {np.shape(points)}")
    return pts


def lidar_to_vehicle(
    points: ArrayLike, lidar_extrinsics: Union[RigidTransform, ArrayLike]
) -> np.ndarray:
    """
    雷达坐标 -> 车体坐标（应用 E_P⁻¹）

    参数:
        points: (N, 3) 雷达坐标系下的点
        lidar_extrinsics: E_P（车体 -> 雷达）

    返回:
        (N, 3) 车体坐标系下的点
    """
    return as_transform(lidar_extrinsics).inverse().apply(_as_points(points))


def lidar_to_camera(
    points: ArrayLike,
    lidar_extrinsics: Union[RigidTransform, ArrayLike],
    camera_extrinsics: Union[RigidTransform, ArrayLike],
) -> np.ndarray:
    """
    雷达坐标 -> 相机坐标：P_k = E_k · E_P⁻¹ · P

    参数:
        points: (N, 3) 雷达坐标系下的点
        lidar_extrinsics: E_P（车体 -> 雷达）
        camera_extrinsics: E_k（车体 -> 相机）

    返回:
        (N, 3) 相机坐标系下的点，顺序与输入一致

    异常:
        CalibrationError: 任一变换退化或不是刚体变换
    """
    chain = as_transform(camera_extrinsics) @ as_transform(lidar_extrinsics).inverse()
    return chain.apply(_as_points(points))


def camera_to_vehicle(
    points: ArrayLike, camera_extrinsics: Union[RigidTransform, ArrayLike]
) -> np.ndarray:
    """
    相机坐标 -> 车体坐标：应用 E_k⁻¹

    参数:
        points: (3,) 或 (N, 3) 相机坐标系下的点
        camera_extrinsics: E_k（车体 -> 相机）

    返回:
        与输入同形状的车体坐标
    """
    return as_transform(camera_extrinsics).inverse().apply(points)
