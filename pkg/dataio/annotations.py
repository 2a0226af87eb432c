"""
标注文件（JSON）

    {
      "units": {...},
      "cuboids": [{"center": [x, y, z], "size": [l, w, h], "yaw": rad, "class_id": k}, ...],
      "polygons": [{"vertices": [[x, y], ...], "class_id": k}, ...]
    }
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Union

from evaluation.shapes import Cuboid, Polygon2D
from utils.errors import FormatError, LaptIOError, ValidationError

PathLike = Union[str, Path]

ANNOTATION_UNITS = {
    "center": "meters, vehicle frame",
    "size": "meters (length along yaw, width, height)",
    "yaw": "radians about +z, counter-clockwise from +x",
    "vertices": "meters, vehicle frame, ground plane z = 0",
}


@dataclass
class Annotations:
    """样本标注：长方体与地面多边形"""

    cuboids: List[Cuboid] = field(default_factory=list)
    polygons: List[Polygon2D] = field(default_factory=list)


def write_annotations(path: PathLike, annotations: Annotations) -> None:
    """写标注文件"""
    payload = {
        "units": ANNOTATION_UNITS,
        "cuboids": [box.to_dict() for box in annotations.cuboids],
        "polygons": [poly.to_dict() for poly in annotations.polygons],
    }
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2)
            f.write("\n")
    except OSError as exc:
        raise LaptIOError(f"无法写入标注文件 {path}: {exc}") from exc


def read_annotations(path: PathLike) -> Annotations:
    """
    读标注文件

    异常:
        LaptIOError: 文件不存在
        FormatError: JSON 或字段错误、几何不合法
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError as exc:
        raise LaptIOError(f"标注文件不存在: {path}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: JSON 格式错误: {exc}") from exc
    try:
        return Annotations(
            cuboids=[Cuboid.from_dict(item) for item in data.get("cuboids", [])],
            polygons=[Polygon2D.from_dict(item) for item in data.get("polygons", [])],
        )
    except (KeyError, TypeError, AttributeError, ValidationError) as exc:
        raise FormatError(f"{path}: 标注内容无效: {exc}") from exc
