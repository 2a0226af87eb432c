"""
标定文件（JSON）

外参方向统一为“车体 -> 传感器”，即 p_sensor = E · p_vehicle。
文件中显式记录各坐标系的轴向约定，读取时忽略这些说明字段。
"""

import json
from pathlib import Path
from typing import Any, Dict, Union

from geometry import CameraIntrinsics, CameraMount, CameraRig, RigidTransform
from utils.errors import FormatError, LaptIOError

PathLike = Union[str, Path]

CALIBRATION_FORMAT = "lapt-calibration"
CALIBRATION_VERSION = 1

FRAME_CONVENTIONS = {
    "vehicle": "x forward, y left, z up (meters)",
    "camera": "x right, y down, z forward along the optical axis (meters)",
    "lidar": "sensor-centred, x forward, y left, z up (meters)",
    "extrinsics": "4x4 row-major matrix mapping vehicle-frame points into the sensor frame",
    "pixels": "u to the right, v downward, origin at the top-left corner of the top-left pixel",
}


def rig_to_dict(rig: CameraRig) -> Dict[str, Any]:
    """CameraRig -> 可序列化字典"""
    cameras = []
    for mount in rig.cameras:
        intr = mount.intrinsics
        cameras.append(
            {
                "name": mount.name,
                "intrinsics": {
                    "fx": intr.fx,
                    "fy": intr.fy,
                    "cx": intr.cx,
                    "cy": intr.cy,
                    "width": intr.width,
                    "height": intr.height,
                },
                "extrinsics": mount.extrinsics.to_list(),
            }
        )
    return {
        "format": CALIBRATION_FORMAT,
        "version": CALIBRATION_VERSION,
        "frames": dict(FRAME_CONVENTIONS),
        "lidar": {"extrinsics": rig.lidar_extrinsics.to_list()},
        "cameras": cameras,
    }


def rig_from_dict(data: Dict[str, Any]) -> CameraRig:
    """
    字典 -> CameraRig

    异常:
        FormatError: 缺少字段或字段类型错误
        CalibrationError: 旋转非正交、内参越界等数值问题
    """
    if not isinstance(data, dict):
        raise FormatError("标定文件顶层必须是 JSON 对象")
    if data.get("format", CALIBRATION_FORMAT) != CALIBRATION_FORMAT:
        raise FormatError(f"未知的标定格式: {data.get('format')!r}")
    try:
        cameras = [
            CameraMount(
                name=str(entry["name"]),
                intrinsics=CameraIntrinsics(
                    fx=float(entry["intrinsics"]["fx"]),
                    fy=float(entry["intrinsics"]["fy"]),
                    cx=float(entry["intrinsics"]["cx"]),
                    cy=float(entry["intrinsics"]["cy"]),
                    width=entry["intrinsics"]["width"],
                    height=entry["intrinsics"]["height"],
                ),
                extrinsics=RigidTransform(entry["extrinsics"]),
            )
            for entry in data["cameras"]
        ]
        lidar = RigidTransform(data["lidar"]["extrinsics"])
    except (KeyError, TypeError) as exc:
        raise FormatError(f"标定文件缺少字段或字段类型错误: {exc}") from exc
    return CameraRig(cameras=cameras, lidar_extrinsics=lidar)


def write_calibration(path: PathLike, rig: CameraRig) -> None:
    """写标定文件"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(rig_to_dict(rig), f, indent=2)
            f.write("\n")
    except OSError as exc:
        raise LaptIOError(f"无法写入标定文件 {path}: {exc}") from exc


def read_calibration(path: PathLike) -> CameraRig:
    """
    读标定文件

    参数:
        path: JSON 文件路径

    返回:
        CameraRig

    异常:
        LaptIOError: 文件不存在或不可读
        FormatError: JSON 格式错误
        CalibrationError: 标定数值不合法
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError as exc:
        raise LaptIOError(f"标定文件不存在: {path}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: JSON 格式错误: {exc}") from exc
    except OSError as exc:
        raise LaptIOError(f"无法读取标定文件 {path}: {exc}") from exc
    return rig_from_dict(data)
