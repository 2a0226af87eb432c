"""
多尺度特征金字塔

用不含学习参数的特征代替卷积骨干网络：
    - rgb_pyramid: 每个 d_f x d_f 方块的 RGB 均值（3 通道）
    - onehot_semantic_pyramid: 每个方块多数前景类别的 one-hot（C 通道）
"""

from dataclasses import dataclass
from typing import Iterator, List, Sequence

import numpy as np

from utils.errors import InvalidArgumentError

from .images import Image, SemanticImage

DEFAULT_FACTORS = (8, 16)


@dataclass(frozen=True)
class FeatureMap:
    """
    单相机单尺度特征图 F_k

    属性:
        data (np.ndarray): (N_f, H/d_f, W/d_f) float64
        factor (int): 下采样因子 d_f
        camera (int): 相机下标 k
    """

    data: np.ndarray
    factor: int
    camera: int = 0

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3:
            raise InvalidArgumentError(f"特征图形状必须为 (N_f, h, w)，实际 {data.shape}")
        if int(self.factor) != self.factor or self.factor < 1:
            raise InvalidArgumentError(f"下采样因子必须为正整数: {self.factor}")
        if not np.all(np.isfinite(data)):
            raise InvalidArgumentError("特征图包含非有限值")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "factor", int(self.factor))
        object.__setattr__(self, "camera", int(self.camera))

    @property
    def channels(self) -> int:
        return int(self.data.shape[0])

    @property
    def height(self) -> int:
        return int(self.data.shape[1])

    @property
    def width(self) -> int:
        return int(self.data.shape[2])

    @property
    def image_size(self) -> tuple:
        """对应原图尺寸 (H, W)"""
        return self.height * self.factor, self.width * self.factor


class FeaturePyramid:
    """
    按 d_f 严格递增排列的特征图列表

    所有成员对应同一张原图（空间尺寸 x d_f 相等）。
    """

    def __init__(self, maps: Sequence[FeatureMap]):
        maps = list(maps)
        if not maps:
            raise InvalidArgumentError("特征金字塔至少包含一个尺度")
        factors = [m.factor for m in maps]
        if any(b <= a for a, b in zip(factors, factors[1:])):
            raise InvalidArgumentError(f"特征金字塔的下采样因子必须严格递增: {factors}")
        sizes = {m.image_size for m in maps}
        if len(sizes) != 1:
            raise InvalidArgumentError(f"特征金字塔各尺度对应的原图尺寸不一致: {sorted(sizes)}")
        channels = {m.channels for m in maps}
        if len(channels) != 1:
            raise InvalidArgumentError(f"特征金字塔各尺度通道数不一致: {sorted(channels)}")
        self.maps: List[FeatureMap] = maps

    def __iter__(self) -> Iterator[FeatureMap]:
        return iter(self.maps)

    def __len__(self) -> int:
        return len(self.maps)

    @property
    def factors(self) -> List[int]:
        return [m.factor for m in self.maps]

    @property
    def channels(self) -> int:
        return self.maps[0].channels

    @property
    def image_size(self) -> tuple:
        return self.maps[0].image_size

    def at(self, factor: int) -> FeatureMap:
        """取指定 d_f 的特征图"""
        for m in self.maps:
            if m.factor == factor:
                return m
        raise InvalidArgumentError(f"特征金字塔中没有下采样因子 {factor}，现有 {self.factors}")


def _check_factors(height: int, width: int, factors: Sequence[int]) -> List[int]:
    factors = sorted(int(f) for f in factors)
    if not factors:
        raise InvalidArgumentError("至少需要一个下采样因子")
    for f in factors:
        if f < 1 or height % f or width % f:
            raise InvalidArgumentError(f"下采样因子 {f} 不能整除图像尺寸 {width}x{height}")
    return factors


def rgb_pyramid(
    image: Image, factors: Sequence[int] = DEFAULT_FACTORS, camera: int = 0
) -> FeaturePyramid:
    """
    RGB 平均池化金字塔

    参数:
        image: RGB 图像
        factors: 下采样因子列表
        camera: 相机下标

    返回:
        每个尺度 3 通道的 FeaturePyramid

    异常:
        InvalidArgumentError: 因子不能整除图像尺寸
    """
    factors = _check_factors(image.height, image.width, factors)
    maps = []
    for f in factors:
        blocks = image.pixels.reshape(image.height // f, f, image.width // f, f, 3)
        pooled = blocks.mean(axis=(1, 3))
        maps.append(FeatureMap(np.transpose(pooled, (2, 0, 1)), f, camera))
    return FeaturePyramid(maps)


def onehot_semantic_pyramid(
    semantic: SemanticImage,
    num_classes: int,
    factors: Sequence[int] = DEFAULT_FACTORS,
    camera: int = 0,
) -> FeaturePyramid:
    """
    语义 one-hot 金字塔

    每个输出像素是对应方块中多数前景类别的 C 维 one-hot；
    平票时取编号最小的类别；方块全为背景时输出零向量。
    通道 c 对应类别 c + 1。

    参数:
        semantic: 语义图像
        num_classes: 前景类别数 C
        factors: 下采样因子列表
        camera: 相机下标

    返回:
        每个尺度 C 通道的 FeaturePyramid
    """
    if num_classes < 1:
        raise InvalidArgumentError(f"类别数必须为正: {num_classes}")
    if semantic.labels.size and semantic.labels.max() > num_classes:
        raise InvalidArgumentError(f"语义图像包含超出 1..{num_classes} 的类别编号")
    factors = _check_factors(semantic.height, semantic.width, factors)

    bins = num_classes + 1
    maps = []
    for f in factors:
        hb, wb = semantic.height // f, semantic.width // f
        blocks = semantic.labels.reshape(hb, f, wb, f).transpose(0, 2, 1, 3).reshape(hb * wb, f * f)
        keys = np.arange(hb * wb, dtype=np.int64)[:, None] * bins + blocks
        counts = np.bincount(keys.ravel(), minlength=hb * wb * bins).reshape(hb * wb, bins)
        foreground = counts[:, 1:]
        # argmax 返回第一个最大值，即平票时编号最小的类别
        winner = np.argmax(foreground, axis=1)
        present = foreground.max(axis=1) > 0
        onehot = np.zeros((hb * wb, num_classes))
        onehot[np.flatnonzero(present), winner[present]] = 1.0
        maps.append(FeatureMap(onehot.T.reshape(num_classes, hb, wb), f, camera))
    return FeaturePyramid(maps)
