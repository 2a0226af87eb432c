"""
图像文件（二进制 PPM / PGM）

RGB 图像保存为 P6（8 位），语义图像保存为 P5，灰度值即类别编号。
读写通过 Pillow 完成。
"""

from pathlib import Path
from typing import Optional, Union

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError

from features import Image, SemanticImage
from utils.errors import FormatError, InvalidArgumentError, LaptIOError

PathLike = Union[str, Path]


def write_image(path: PathLike, image: Union[Image, SemanticImage]) -> None:
    """
    写图像文件

    参数:
        path: 输出路径
        image: Image（写为 P6，像素按 round(255·v) 量化）或 SemanticImage（写为 P5）

    异常:
        InvalidArgumentError: 类别编号超过 255
        LaptIOError: 无法写入
    """
    if isinstance(image, SemanticImage):
        if image.labels.size and image.labels.max() > 255:
            raise InvalidArgumentError("PGM 只能保存 0..255 的类别编号")
        pil = PILImage.fromarray(image.labels.astype(np.uint8))
    else:
        quantized = np.round(image.pixels * 255.0).astype(np.uint8)
        pil = PILImage.fromarray(quantized)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        pil.save(path, format="PPM")
    except OSError as exc:
        raise LaptIOError(f"无法写入图像 {path}: {exc}") from exc


def read_image(path: PathLike, num_classes: Optional[int] = None) -> Union[Image, SemanticImage]:
    """
    读图像文件

    参数:
        path: PPM/PGM 文件路径
        num_classes: 读取语义图像时的类别数上界

    返回:
        P6 -> Image，P5 -> SemanticImage

    异常:
        LaptIOError: 文件不存在
        FormatError: 不是 8 位 PPM/PGM
    """
    path = Path(path)
    if not path.exists():
        raise LaptIOError(f"图像文件不存在: {path}")
    try:
        with PILImage.open(path) as pil:
            pil.load()
            fmt, mode = pil.format, pil.mode
            arr = np.asarray(pil)
    except (UnidentifiedImageError, SyntaxError, ValueError) as exc:
        raise FormatError(f"{path}: 不支持的图像头: {exc}") from exc
    except OSError as exc:
        raise LaptIOError(f"无法读取图像 {path}: {exc}") from exc

    if fmt != "PPM":
        raise FormatError(f"{path}: 期望 PPM/PGM 格式，实际 {fmt}")
    if mode == "RGB":
        return Image(arr.astype(np.float64) / 255.0)
    if mode == "L":
        try:
            return SemanticImage(arr.astype(np.int64), num_classes)
        except InvalidArgumentError as exc:
            raise FormatError(f"{path}: 语义图像无效: {exc}") from exc
    raise FormatError(f"{path}: 不支持的像素模式 {mode}")


def read_rgb_image(path: PathLike) -> Image:
    """读 RGB 图像，文件不是 P6 时报错"""
    image = read_image(path)
    if not isinstance(image, Image):
        raise FormatError(f"{path}: 期望 RGB 图像 (P6)")
    return image


def read_semantic_image(path: PathLike, num_classes: Optional[int] = None) -> SemanticImage:
    """读语义图像，文件不是 P5 时报错"""
    image = read_image(path, num_classes)
    if not isinstance(image, SemanticImage):
        raise FormatError(f"{path}: 期望语义图像 (P5)")
    return image
