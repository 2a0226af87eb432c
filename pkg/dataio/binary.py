"""
二进制文件格式

所有多字节数值均为小端序；磁盘上为 32 位，内存中为 64 位。

点云 (.bin):
    magic "LAPTPC01" | u32 N | N x (f32 x, f32 y, f32 z)
BEV 栅格 (.grid):
    magic "LAPTBEV1" 或 "LAPTSEM1" | u32 C, X, Y | f32 resolution, x_extent, y_extent, z_min, z_max
    | (仅 LAPTSEM1) C x u32 class_id | C*X*Y x f32，按 [c, ix, iy] 行优先
深度图 (.depth):
    magic "LAPTDEP1" | u32 height, width | height*width x f32，空像素为 +inf
特征图 (.feat):
    magic "LAPTFEA1" | u32 channels, height, width, factor, camera | channels*height*width x f32

读取时拒绝任何不一致的输入（魔数、长度、头部取值），不做修复。
"""

import math
import struct
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import numpy.typing as npt

from bev.grid import BevGrid, GridSpec
from depth import DepthImage
from evaluation.shapes import SemanticGrid
from features import FeatureMap
from utils.errors import FormatError, LaptIOError, ValidationError

PathLike = Union[str, Path]

CLOUD_MAGIC = b"LAPTPC01"
BEV_MAGIC = b"LAPTBEV1"
SEMANTIC_MAGIC = b"LAPTSEM1"
DEPTH_MAGIC = b"LAPTDEP1"
FEATURE_MAGIC = b"LAPTFEA1"

MAGIC_SIZE = 8
_F32 = np.dtype("<f4")


def _read_bytes(path: PathLike) -> bytes:
    try:
        return Path(path).read_bytes()
    except FileNotFoundError as exc:
        raise LaptIOError(f"文件不存在: {path}") from exc
    except OSError as exc:
        raise LaptIOError(f"无法读取文件 {path}: {exc}") from exc


def _write_bytes(path: PathLike, payload: bytes) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(payload)
    except OSError as exc:
        raise LaptIOError(f"无法写入文件 {path}: {exc}") from exc


def _check_magic(raw: bytes, expected: bytes, path: PathLike) -> None:
    if len(raw) < MAGIC_SIZE or raw[:MAGIC_SIZE] != expected:
        raise FormatError(f"{path}: 魔数不符，期望 {expected!r}，实际 {raw[:MAGIC_SIZE]!r}")


def _unpack_header(raw: bytes, fmt: str, offset: int, path: PathLike) -> Tuple:
    size = struct.calcsize(fmt)
    if len(raw) < offset + size:
        raise FormatError(f"{path}: 文件头被截断（{len(raw)} 字节）")
    return struct.unpack_from(fmt, raw, offset)


def _payload(raw: bytes, offset: int, count: int, path: PathLike) -> np.ndarray:
    expected = offset + count * _F32.itemsize
    if len(raw) != expected:
        raise FormatError(f"{path}: 文件长度 {len(raw)} 字节，与头部声明的 {expected} 字节不一致")
    return np.frombuffer(raw, dtype=_F32, count=count, offset=offset).astype(np.float64)


# ---------------------------------------------------------------- 点云


def encode_cloud(cloud: npt.ArrayLike) -> bytes:
    """点云编码为字节串"""
    pts = np.asarray(cloud, dtype=np.float64).reshape(-1, 3)
    return CLOUD_MAGIC + struct.pack("<I", pts.shape[0]) + pts.astype(_F32).tobytes()


def write_cloud(path: PathLike, cloud: npt.ArrayLike) -> None:
    """
    写点云文件

    参数:
        path: 输出路径
        cloud: (N, 3) 雷达坐标系点云
    """
    _write_bytes(path, encode_cloud(cloud))


def read_cloud(path: PathLike) -> np.ndarray:
    """
    读点云文件

    返回:
        (N, 3) float64

    异常:
        FormatError: 魔数不符、文件截断或坐标非有限值
    """
    raw = _read_bytes(path)
    _check_magic(raw, CLOUD_MAGIC, path)
    (count,) = _unpack_header(raw, "<I", MAGIC_SIZE, path)
    points = _payload(raw, MAGIC_SIZE + 4, count * 3, path).reshape(count, 3)
    if not np.all(np.isfinite(points)):
        raise FormatError(f"{path}: 点云坐标含 NaN 或 inf")
    return points


# ---------------------------------------------------------------- BEV 栅格

_GRID_HEADER = "<3I5f"


def write_grid(path: PathLike, grid: Union[BevGrid, SemanticGrid]) -> None:
    """写 BevGrid 或 SemanticGrid"""
    spec = grid.spec
    channels = grid.data.shape[0]
    magic = SEMANTIC_MAGIC if isinstance(grid, SemanticGrid) else BEV_MAGIC
    header = struct.pack(
        _GRID_HEADER,
        channels,
        spec.cells_x,
        spec.cells_y,
        spec.resolution,
        spec.x_extent,
        spec.y_extent,
        spec.z_min,
        spec.z_max,
    )
    if isinstance(grid, SemanticGrid):
        header += struct.pack(f"<{channels}I", *grid.class_ids)
    _write_bytes(path, magic + header + grid.data.astype(_F32).tobytes())


def _spec_from_header(
    cells_x, cells_y, resolution, x_extent, y_extent, z_min, z_max, path
) -> GridSpec:
    if cells_x == 0 or cells_y == 0:
        raise FormatError(f"{path}: 栅格尺寸不能为零")
    # 分辨率由 float32 范围与单元数重新推出，避免单精度舍入破坏整除关系
    exact = x_extent / cells_x
    if not math.isclose(exact, resolution, rel_tol=1e-6):
        raise FormatError(f"{path}: 分辨率 {resolution} 与范围 {x_extent}/{cells_x} 不一致")
    if not math.isclose(exact * cells_y, y_extent, rel_tol=1e-6):
        raise FormatError(f"{path}: y 方向范围 {y_extent} 与 {cells_y} 个单元不一致")
    try:
        return GridSpec(
            x_extent=x_extent, y_extent=exact * cells_y, resolution=exact, z_min=z_min, z_max=z_max
        )
    except ValidationError as exc:
        raise FormatError(f"{path}: 栅格头部无效: {exc}") from exc


def read_grid(path: PathLike) -> Union[BevGrid, SemanticGrid]:
    """
    读栅格文件

    返回:
        LAPTBEV1 -> BevGrid；LAPTSEM1 -> SemanticGrid

    异常:
        FormatError: 魔数、头部或数据长度不一致
    """
    raw = _read_bytes(path)
    magic = raw[:MAGIC_SIZE]
    if magic not in (BEV_MAGIC, SEMANTIC_MAGIC):
        raise FormatError(f"{path}: 不是栅格文件（魔数 {magic!r}）")
    channels, cells_x, cells_y, *floats = _unpack_header(raw, _GRID_HEADER, MAGIC_SIZE, path)
    spec = _spec_from_header(cells_x, cells_y, *floats, path)
    offset = MAGIC_SIZE + struct.calcsize(_GRID_HEADER)

    class_ids = ()
    if magic == SEMANTIC_MAGIC:
        class_ids = _unpack_header(raw, f"<{channels}I", offset, path)
        offset += 4 * channels
    data = _payload(raw, offset, channels * cells_x * cells_y, path)
    data = data.reshape(channels, cells_x, cells_y)
    try:
        if magic == SEMANTIC_MAGIC:
            return SemanticGrid(data, class_ids, spec)
        return BevGrid(data, spec)
    except ValidationError as exc:
        raise FormatError(f"{path}: 栅格数据无效: {exc}") from exc


def read_semantic_grid(path: PathLike) -> SemanticGrid:
    """读语义栅格，文件不是 LAPTSEM1 时报错"""
    grid = read_grid(path)
    if not isinstance(grid, SemanticGrid):
        raise FormatError(f"{path}: 期望语义栅格，实际为特征栅格")
    return grid


# ---------------------------------------------------------------- 深度图


def write_depth(path: PathLike, depth: DepthImage) -> None:
    """写深度图，空像素保存为 +inf"""
    header = struct.pack("<2I", depth.height, depth.width)
    _write_bytes(path, DEPTH_MAGIC + header + depth.to_dense(np.inf).astype(_F32).tobytes())


def read_depth(path: PathLike) -> DepthImage:
    """
    读深度图（+inf 表示该像素无深度）

    异常:
        FormatError: 含 NaN、-inf 或非正深度
    """
    raw = _read_bytes(path)
    _check_magic(raw, DEPTH_MAGIC, path)
    height, width = _unpack_header(raw, "<2I", MAGIC_SIZE, path)
    dense = _payload(raw, MAGIC_SIZE + 8, height * width, path).reshape(height, width)
    present = np.isfinite(dense)
    if np.any(np.isnan(dense) | np.isneginf(dense)) or np.any(dense[present] <= 0):
        raise FormatError(f"{path}: 深度值必须为正数或 +inf")
    return DepthImage(np.where(present, dense, np.inf), present)


# ---------------------------------------------------------------- 特征图


def write_features(path: PathLike, features: FeatureMap) -> None:
    """写特征图"""
    header = struct.pack(
        "<5I", features.channels, features.height, features.width, features.factor, features.camera
    )
    _write_bytes(path, FEATURE_MAGIC + header + features.data.astype(_F32).tobytes())


def read_features(path: PathLike) -> FeatureMap:
    """读特征图"""
    raw = _read_bytes(path)
    _check_magic(raw, FEATURE_MAGIC, path)
    channels, height, width, factor, camera = _unpack_header(raw, "<5I", MAGIC_SIZE, path)
    data = _payload(raw, MAGIC_SIZE + 20, channels * height * width, path)
    try:
        return FeatureMap(data.reshape(channels, height, width), factor, camera)
    except ValidationError as exc:
        raise FormatError(f"{path}: 特征数据无效: {exc}") from exc
