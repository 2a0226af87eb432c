"""
特征模块

不含学习参数的多尺度特征提取（d_f ∈ {8, 16}），以及可替换的特征提供器接口。
"""

from .images import (
    IMAGE_DIVISOR,
    Image,
    SemanticImage,
    as_image,
    crop_to_multiple,
    require_divisible,
)
from .pyramids import (
    DEFAULT_FACTORS,
    FeatureMap,
    FeaturePyramid,
    onehot_semantic_pyramid,
    rgb_pyramid,
)
from .providers import (
    CameraView,
    FeatureProvider,
    FileFeatureProvider,
    RgbFeatureProvider,
    SemanticFeatureProvider,
)

__all__ = [
    "IMAGE_DIVISOR",
    "DEFAULT_FACTORS",
    "Image",
    "SemanticImage",
    "as_image",
    "crop_to_multiple",
    "require_divisible",
    "FeatureMap",
    "FeaturePyramid",
    "rgb_pyramid",
    "onehot_semantic_pyramid",
    "CameraView",
    "FeatureProvider",
    "RgbFeatureProvider",
    "SemanticFeatureProvider",
    "FileFeatureProvider",
]
