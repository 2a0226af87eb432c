"""
特征提供器

流水线只依赖 FeatureProvider 接口，特征可以来自 RGB 池化、语义 one-hot，
也可以来自外部系统预先计算并按特征文件格式保存的张量。
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Protocol, Sequence, Union, runtime_checkable

from utils.errors import InvalidArgumentError, ValidationError

from .images import Image, SemanticImage
from .pyramids import DEFAULT_FACTORS, FeaturePyramid, onehot_semantic_pyramid, rgb_pyramid


@dataclass(frozen=True)
class CameraView:
    """
    单相机输入

    属性:
        image (Image): RGB 图像
        semantic (SemanticImage): 语义图像（仅仿真/标注数据提供）
    """

    image: Image
    semantic: Optional[SemanticImage] = None


@runtime_checkable
class FeatureProvider(Protocol):
    """特征提供器接口"""

    factors: Sequence[int]

    @property
    def channels(self) -> int:
        ...

    def extract(self, camera_index: int, view: CameraView) -> FeaturePyramid:
        ...


class RgbFeatureProvider:
    """RGB 平均池化特征（3 通道）"""

    def __init__(self, factors: Sequence[int] = DEFAULT_FACTORS):
        self.factors = sorted(int(f) for f in factors)

    @property
    def channels(self) -> int:
        return 3

    def extract(self, camera_index: int, view: CameraView) -> FeaturePyramid:
        return rgb_pyramid(view.image, self.factors, camera=camera_index)


class SemanticFeatureProvider:
    """
    语义 one-hot 特征（C 通道，通道 c 对应类别 c + 1）

    需要 CameraView.semantic；用于仿真真值对比。
    """

    def __init__(self, num_classes: int, factors: Sequence[int] = DEFAULT_FACTORS):
        if num_classes < 1:
            raise InvalidArgumentError(f"类别数必须为正: {num_classes}")
        self.num_classes = int(num_classes)
        self.factors = sorted(int(f) for f in factors)

    @property
    def channels(self) -> int:
        return self.num_classes

    def extract(self, camera_index: int, view: CameraView) -> FeaturePyramid:
        if view.semantic is None:
            raise ValidationError(f"相机 {camera_index} 缺少语义图像，无法提取语义特征")
        return onehot_semantic_pyramid(
            view.semantic, self.num_classes, self.factors, camera=camera_index
        )


class FileFeatureProvider:
    """
    读取样本目录下预先计算的特征张量

    文件位置: <sample>/features/cam{k}_s{d}.feat

    参数:
        sample_root: 样本目录
        factors: 需要读取的下采样因子
    """

    def __init__(self, sample_root: Union[str, Path], factors: Sequence[int] = DEFAULT_FACTORS):
        self.sample_root = Path(sample_root)
        self.factors = sorted(int(f) for f in factors)
        self._channels: Optional[int] = None

    @property
    def channels(self) -> int:
        if self._channels is None:
            self._channels = self._read(0).channels
        return self._channels

    def _read(self, camera_index: int) -> FeaturePyramid:
        # 延迟导入，dataio 依赖 features 的类型
        from dataio.sample_dir import SampleDir

        sample = SampleDir(self.sample_root)
        maps = [sample.read_features(camera_index, f) for f in self.factors]
        for m in maps:
            if m.camera != camera_index:
                raise ValidationError(
                    f"特征文件相机下标 {m.camera} 与期望的 {camera_index} 不一致"
                )
        return FeaturePyramid(maps)

    def extract(self, camera_index: int, view: CameraView) -> FeaturePyramid:
        pyramid = self._read(camera_index)
        if pyramid.image_size != (view.image.height, view.image.width):
            raise ValidationError(
                f"特征张量对应的图像尺寸 {pyramid.image_size} 与图像 "
                f"{(view.image.height, view.image.width)} 不一致"
            )
        return pyramid
