"""
图像数据类型

RGB 图像与语义图像的内存表示，以及入库时的裁剪策略。
"""

from dataclasses import dataclass
from typing import Optional, TypeVar, Union

import numpy as np
import numpy.typing as npt

from utils.errors import InvalidArgumentError

# 流水线要求的宽高公倍数（最大下采样因子）
IMAGE_DIVISOR = 16


@dataclass(frozen=True)
class Image:
    """
    RGB 图像 X_k

    属性:
        pixels (np.ndarray): (height, width, 3) float64，取值范围 [0, 1]
    """

    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float64)
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise InvalidArgumentError(f"RGB 图像形状必须为 (H, W, 3)，实际 {pixels.shape}")
        in_range = np.all(np.isfinite(pixels)) and pixels.min() >= 0.0 and pixels.max() <= 1.0
        if pixels.size and not in_range:
            raise InvalidArgumentError("RGB 像素值必须在 [0, 1] 范围内")
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return bool(np.array_equal(self.pixels, other.pixels))


@dataclass(frozen=True)
class SemanticImage:
    """
    语义图像（每像素类别编号，0 为背景）

    属性:
        labels (np.ndarray): (height, width) int64
        num_classes (int): 前景类别数 C，None 表示不校验上界
    """

    labels: np.ndarray
    num_classes: Optional[int] = None

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 2:
            raise InvalidArgumentError(f"语义图像必须是二维数组，实际 {labels.shape}")
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            if not np.all(labels == np.round(labels)):
                raise InvalidArgumentError("语义图像的类别编号必须为整数")
        labels = labels.astype(np.int64)
        if labels.size and labels.min() < 0:
            raise InvalidArgumentError("类别编号不能为负")
        if self.num_classes is not None and labels.size and labels.max() > self.num_classes:
            raise InvalidArgumentError(
                f"类别编号 {int(labels.max())} 超出范围 0..{self.num_classes}"
            )
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def width(self) -> int:
        return int(self.labels.shape[1])

    @property
    def height(self) -> int:
        return int(self.labels.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SemanticImage):
            return NotImplemented
        return bool(np.array_equal(self.labels, other.labels))


ImageT = TypeVar("ImageT", Image, SemanticImage)


def crop_to_multiple(image: ImageT, divisor: int = IMAGE_DIVISOR) -> ImageT:
    """
    裁掉右侧和底部多余像素，使宽高能被 divisor 整除

    从右下角裁剪，像素坐标原点不变，相机内参无需调整。

    参数:
        image: Image 或 SemanticImage
        divisor: 整除因子

    返回:
        裁剪后的同类型图像

    异常:
        InvalidArgumentError: 图像小于一个整除单元
    """
    height = image.height - image.height % divisor
    width = image.width - image.width % divisor
    if height == 0 or width == 0:
        raise InvalidArgumentError(f"图像 {image.width}x{image.height} 小于整除单元 {divisor}")
    if (height, width) == (image.height, image.width):
        return image
    if isinstance(image, Image):
        return Image(image.pixels[:height, :width])
    return SemanticImage(image.labels[:height, :width], image.num_classes)


def require_divisible(image: Union[Image, SemanticImage], divisor: int = IMAGE_DIVISOR) -> None:
    """校验宽高能被 divisor 整除"""
    if image.width % divisor or image.height % divisor:
        raise InvalidArgumentError(
            f"图像尺寸 {image.width}x{image.height} 必须能被 {divisor} 整除"
        )


def as_image(pixels: npt.ArrayLike) -> Image:
    """由数组构造 Image（uint8 数组按 /255 归一化）"""
    arr = np.asarray(pixels)
    if arr.dtype == np.uint8:
        arr = arr.astype(np.float64) / 255.0
    return Image(arr)
