"""
BEV 融合算子

    - fuse_scales: 多尺度栅格逐元素求和
    - fuse_modalities: 相机与激光雷达栅格的 sum / concat / maxpool 融合
"""

from enum import Enum
from typing import Sequence, Union

import numpy as np

from utils.errors import InvalidArgumentError

from .grid import BevGrid


class FusionMethod(str, Enum):
    """模态融合方式"""

    SUM = "sum"
    CONCAT = "concat"
    MAXPOOL = "maxpool"

    @classmethod
    def parse(cls, value: Union[str, "FusionMethod"]) -> "FusionMethod":
        try:
            return cls(value)
        except ValueError as exc:
            choices = ", ".join(m.value for m in cls)
            raise InvalidArgumentError(f"未知的融合方式 {value!r}，可选: {choices}") from exc


def fuse_scales(grids: Sequence[BevGrid]) -> BevGrid:
    """
    多尺度求和

    按列表顺序依次相加；交换操作数顺序只改变浮点求和顺序。

    参数:
        grids: 同一 GridSpec、同一通道数的栅格列表

    返回:
        逐元素和

    异常:
        InvalidArgumentError: 列表为空或形状不一致
    """
    if not grids:
        raise InvalidArgumentError("fuse_scales 至少需要一个栅格")
    first = grids[0]
    for grid in grids[1:]:
        if grid.spec != first.spec or grid.data.shape != first.data.shape:
            raise InvalidArgumentError(
                f"栅格形状不一致: {first.data.shape} vs {grid.data.shape}"
            )
    total = first.data.copy()
    for grid in grids[1:]:
        total += grid.data
    return BevGrid(total, first.spec)


def fuse_modalities(
    camera_bev: BevGrid,
    lidar_bev: BevGrid,
    method: Union[str, FusionMethod] = FusionMethod.SUM,
) -> BevGrid:
    """
    相机与激光雷达 BEV 融合

    参数:
        camera_bev: 相机分支栅格
        lidar_bev: 激光雷达分支栅格
        method: sum（逐元素和）、concat（通道拼接，相机在前）、maxpool（逐元素最大值）

    返回:
        融合后的栅格

    异常:
        InvalidArgumentError: 栅格几何不一致，或 sum/maxpool 时通道数不一致
    """
    method = FusionMethod.parse(method)
    if camera_bev.spec != lidar_bev.spec:
        raise InvalidArgumentError("相机与激光雷达栅格的几何不一致")
    if method is FusionMethod.CONCAT:
        return BevGrid(np.concatenate([camera_bev.data, lidar_bev.data], axis=0), camera_bev.spec)
    if camera_bev.channels != lidar_bev.channels:
        raise InvalidArgumentError(
            f"{method.value} 融合要求通道数一致: {camera_bev.channels} vs {lidar_bev.channels}"
        )
    if method is FusionMethod.SUM:
        return BevGrid(camera_bev.data + lidar_bev.data, camera_bev.spec)
    return BevGrid(np.maximum(camera_bev.data, lidar_bev.data), camera_bev.spec)
