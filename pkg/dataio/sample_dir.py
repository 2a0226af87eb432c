"""
样本目录

一个样本对应一个关键帧的全部传感器数据：

    <root>/
        calibration.json          相机与激光雷达标定
        cam{k}.ppm                第 k 台相机 RGB 图像
        cam{k}_sem.pgm            第 k 台相机语义图像（可选）
        cam{k}_depth.depth        第 k 台相机精确深度（可选）
        cloud.bin                 激光雷达点云（雷达坐标系）
        features/cam{k}_s{d}.feat 预先计算的特征张量（可选）
        annotations.json          标注（可选）
        gt.grid                   BEV 语义真值（可选）
"""

import re
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from config.logger import get_logger
from depth import DepthImage
from evaluation.shapes import SemanticGrid
from features import CameraView, FeatureMap, Image, SemanticImage
from geometry import CameraRig
from utils.errors import LaptIOError, ValidationError

from .annotations import Annotations, read_annotations, write_annotations
from .binary import (
    read_cloud,
    read_depth,
    read_features,
    read_semantic_grid,
    write_cloud,
    write_depth,
    write_features,
    write_grid,
)
from .calibration import read_calibration, write_calibration
from .images import read_rgb_image, read_semantic_image, write_image

logger = get_logger("lapt.dataio")

PathLike = Union[str, Path]

_IMAGE_PATTERN = re.compile(r"^cam(\d+)\.ppm$")


@dataclass
class SampleData:
    """
    加载到内存的样本

    属性:
        rig (CameraRig): 标定
        views (List[CameraView]): 各相机输入，顺序与 rig.cameras 一致
        cloud (np.ndarray): (N, 3) 雷达坐标系点云
    """

    rig: CameraRig
    views: List[CameraView]
    cloud: np.ndarray


class SampleDir:
    """
    样本目录读写

    参数:
        root: 样本目录路径

    示例:
        >>> sample = SampleDir("data/sample_000")
        >>> sample.validate()
        >>> data = sample.load()
    """

    CALIBRATION = "calibration.json"
    CLOUD = "cloud.bin"
    ANNOTATIONS = "annotations.json"
    GROUND_TRUTH = "gt.grid"
    FEATURES_DIR = "features"

    def __init__(self, root: PathLike):
        self.root = Path(root)

    # ------------------------------------------------------------------
    # 路径
    # ------------------------------------------------------------------
    @property
    def calibration_path(self) -> Path:
        return self.root / self.CALIBRATION

    @property
    def cloud_path(self) -> Path:
        return self.root / self.CLOUD

    @property
    def annotations_path(self) -> Path:
        return self.root / self.ANNOTATIONS

    @property
    def ground_truth_path(self) -> Path:
        return self.root / self.GROUND_TRUTH

    def image_path(self, camera: int) -> Path:
        return self.root / f"cam{camera}.ppm"

    def semantic_path(self, camera: int) -> Path:
        return self.root / f"cam{camera}_sem.pgm"

    def depth_path(self, camera: int) -> Path:
        return self.root / f"cam{camera}_depth.depth"

    def feature_path(self, camera: int, factor: int) -> Path:
        return self.root / self.FEATURES_DIR / f"cam{camera}_s{factor}.feat"

    # ------------------------------------------------------------------
    # 校验
    # ------------------------------------------------------------------
    def image_indices(self) -> List[int]:
        """目录中存在的 cam{k}.ppm 下标（升序）"""
        if not self.root.is_dir():
            return []
        indices = []
        for entry in self.root.iterdir():
            match = _IMAGE_PATTERN.match(entry.name)
            if match:
                indices.append(int(match.group(1)))
        return sorted(indices)

    def validate(self) -> CameraRig:
        """
        校验目录完整性

        返回:
            读取到的 CameraRig

        异常:
            LaptIOError: 目录、标定文件或点云文件不存在
            ValidationError: 相机数与图像数不一致
        """
        if not self.root.is_dir():
            raise LaptIOError(f"样本目录不存在: {self.root}")
        rig = read_calibration(self.calibration_path)
        if not self.cloud_path.exists():
            raise LaptIOError(f"点云文件不存在: {self.cloud_path}")
        indices = self.image_indices()
        expected = list(range(len(rig)))
        if indices != expected:
            raise ValidationError(
                f"{self.root}: 标定中有 {len(rig)} 台相机，但图像文件下标为 {indices}"
            )
        return rig

    def has_semantics(self) -> bool:
        rig_size = len(self.image_indices())
        return rig_size > 0 and all(self.semantic_path(k).exists() for k in range(rig_size))

    def has_ground_truth(self) -> bool:
        return self.ground_truth_path.exists()

    # ------------------------------------------------------------------
    # 读取
    # ------------------------------------------------------------------
    def read_rig(self) -> CameraRig:
        return read_calibration(self.calibration_path)

    def read_image(self, camera: int) -> Image:
        return read_rgb_image(self.image_path(camera))

    def read_semantic(self, camera: int, num_classes: Optional[int] = None) -> SemanticImage:
        return read_semantic_image(self.semantic_path(camera), num_classes)

    def read_depth(self, camera: int) -> DepthImage:
        return read_depth(self.depth_path(camera))

    def read_cloud(self) -> np.ndarray:
        return read_cloud(self.cloud_path)

    def read_features(self, camera: int, factor: int) -> FeatureMap:
        return read_features(self.feature_path(camera, factor))

    def read_annotations(self) -> Annotations:
        return read_annotations(self.annotations_path)

    def read_ground_truth(self) -> SemanticGrid:
        return read_semantic_grid(self.ground_truth_path)

    def load(self, with_semantics: bool = False, num_classes: Optional[int] = None) -> SampleData:
        """
        加载样本

        参数:
            with_semantics: 是否同时读取语义图像（缺失时报错）
            num_classes: 语义图像类别数上界

        返回:
            SampleData

        异常:
            ValidationError: 目录不一致，或图像尺寸与内参不符
        """
        rig = self.validate()
        views = []
        for k, mount in enumerate(rig.cameras):
            image = self.read_image(k)
            intr = mount.intrinsics
            if (image.width, image.height) != (intr.width, intr.height):
                raise ValidationError(
                    f"相机 {k} 图像尺寸 {image.width}x{image.height} 与内参 "
                    f"{intr.width}x{intr.height} 不一致"
                )
            semantic = None
            if with_semantics:
                if not self.semantic_path(k).exists():
                    raise ValidationError(f"相机 {k} 缺少语义图像 {self.semantic_path(k)}")
                semantic = self.read_semantic(k, num_classes)
                if (semantic.width, semantic.height) != (image.width, image.height):
                    raise ValidationError(f"相机 {k} 语义图像与 RGB 图像尺寸不一致")
            views.append(CameraView(image=image, semantic=semantic))
        cloud = self.read_cloud()
        logger.debug(f"加载样本 {self.root}: {len(views)} 台相机, {cloud.shape[0]} 个点")
        return SampleData(rig=rig, views=views, cloud=cloud)

    # ------------------------------------------------------------------
    # 写入
    # ------------------------------------------------------------------
    def write(
        self,
        rig: CameraRig,
        images: Sequence[Image],
        cloud: np.ndarray,
        semantics: Optional[Sequence[SemanticImage]] = None,
        depths: Optional[Sequence[DepthImage]] = None,
        features: Optional[Sequence[FeatureMap]] = None,
        annotations: Optional[Annotations] = None,
        ground_truth: Optional[SemanticGrid] = None,
    ) -> "SampleDir":
        """
        写出完整样本

        异常:
            ValidationError: 图像数与相机数不一致
            LaptIOError: 无法写入
        """
        if len(images) != len(rig):
            raise ValidationError(f"图像数 {len(images)} 与相机数 {len(rig)} 不一致")
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise LaptIOError(f"无法创建样本目录 {self.root}: {exc}") from exc

        write_calibration(self.calibration_path, rig)
        for k, image in enumerate(images):
            write_image(self.image_path(k), image)
        for k, semantic in enumerate(semantics or []):
            write_image(self.semantic_path(k), semantic)
        for k, depth in enumerate(depths or []):
            write_depth(self.depth_path(k), depth)
        for feature_map in features or []:
            write_features(self.feature_path(feature_map.camera, feature_map.factor), feature_map)
        write_cloud(self.cloud_path, cloud)
        if annotations is not None:
            write_annotations(self.annotations_path, annotations)
        if ground_truth is not None:
            write_grid(self.ground_truth_path, ground_truth)
        logger.debug(f"写出样本 {self.root}")
        return self
