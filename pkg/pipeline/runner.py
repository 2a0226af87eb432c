"""
LAPT 流水线

    载入 -> 特征 -> 逐相机激光雷达深度 -> 逐尺度最小池化 -> 逐 (相机, 尺度) 投影
    -> 尺度融合（或 MS_B 粗栅格分支）-> 可选激光雷达 BEV 与模态融合 -> 解码 -> 语义栅格

每个阶段的耗时由 StageTimer 记录。
"""

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from bev import (
    LIDAR_BEV_CHANNELS,
    BevGrid,
    FusionMethod,
    SplatJob,
    bilinear_upsample2x,
    count_projected_points,
    fuse_modalities,
    fuse_scales,
    lidar_occupancy_bev,
    splat_views,
)
from config.logger import get_logger
from dataio.sample_dir import SampleData, SampleDir
from depth import DepthImage, depth_pyramid, lidar_depth_image
from evaluation import SemanticGrid, palette_decode, scores_to_semantic
from features import (
    CameraView,
    FeaturePyramid,
    FeatureProvider,
    FileFeatureProvider,
    RgbFeatureProvider,
    SemanticFeatureProvider,
    crop_to_multiple,
)
from geometry import CameraMount, CameraRig
from sim.classes import FOREGROUND_CLASSES, PALETTE
from utils.errors import ValidationError
from utils.parallel import ordered_map

from .settings import PipelineSettings
from .timing import StageTimer

logger = get_logger("lapt.pipeline")

PathLike = Union[str, Path]


@dataclass
class PipelineResult:
    """
    一次流水线运行的输出

    属性:
        semantic (SemanticGrid): 解码后的语义栅格
        bev (BevGrid): 解码前的最终 BEV（含模态融合）
        camera_bev (BevGrid): 相机分支 BEV（尺度融合后）
        scale_bevs (Dict[int, BevGrid]): 各尺度各自的 BEV
        lidar_bev (BevGrid): 激光雷达分支 BEV（未启用时为 None）
        projected_points (Dict[int, int]): 各尺度落入栅格的特征像素数（未统计时为空）
        depth_fill (List[float]): 各相机稀疏深度图的像素占用率
        timings (Dict[str, float]): 各阶段耗时（毫秒）
    """

    semantic: SemanticGrid
    bev: BevGrid
    camera_bev: BevGrid
    scale_bevs: Dict[int, BevGrid]
    lidar_bev: Optional[BevGrid] = None
    projected_points: Dict[int, int] = field(default_factory=dict)
    depth_fill: List[float] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def nonzero_cells(self) -> int:
        """相机分支 BEV 中非零单元数"""
        return self.camera_bev.nonzero_cells()

    def scale_nonzero_cells(self) -> Dict[int, int]:
        return {f: grid.nonzero_cells() for f, grid in self.scale_bevs.items()}


def make_provider(
    settings: PipelineSettings, sample_root: Optional[PathLike] = None
) -> FeatureProvider:
    """
    按参数构造特征提供器

    异常:
        ValidationError: file 特征缺少样本目录
    """
    if settings.features == "rgb":
        return RgbFeatureProvider(settings.scales)
    if settings.features == "semantic":
        return SemanticFeatureProvider(settings.num_classes, settings.scales)
    if sample_root is None:
        raise ValidationError("file 特征需要指定样本目录")
    return FileFeatureProvider(sample_root, settings.scales)


def crop_inputs(
    rig: CameraRig, views: Sequence[CameraView], divisor: int
) -> Tuple[CameraRig, List[CameraView]]:
    """
    图像裁剪到 divisor 的整数倍（裁掉右侧与下方），内参只改宽高

    异常:
        ValidationError: 图像数与相机数不一致
        CalibrationError: 裁剪后主点落在图像外
    """
    if len(views) != len(rig):
        raise ValidationError(f"图像数 {len(views)} 与相机数 {len(rig)} 不一致")
    mounts = []
    cropped = []
    for mount, view in zip(rig.cameras, views):
        image = crop_to_multiple(view.image, divisor)
        semantic = crop_to_multiple(view.semantic, divisor) if view.semantic is not None else None
        intr = mount.intrinsics
        if (image.width, image.height) != (intr.width, intr.height):
            intr = dataclasses.replace(intr, width=image.width, height=image.height)
            mount = CameraMount(name=mount.name, intrinsics=intr, extrinsics=mount.extrinsics)
        mounts.append(mount)
        cropped.append(CameraView(image=image, semantic=semantic))
    return CameraRig(cameras=mounts, lidar_extrinsics=rig.lidar_extrinsics), cropped


class LaptPipeline:
    """
    LAPT 投影流水线

    参数:
        settings: 流水线参数，None 时使用默认参数
        provider: 特征提供器，None 时按 settings.features 构造

    示例:
        >>> pipeline = LaptPipeline(PipelineSettings.from_variant("lapt-fpn"))
        >>> result = pipeline.run_dir("data/sample_000")
        >>> result.semantic.positive_cells()
    """

    def __init__(
        self,
        settings: Optional[PipelineSettings] = None,
        provider: Optional[FeatureProvider] = None,
    ):
        self.settings = settings or PipelineSettings()
        self.provider = provider

    def load(self, sample_dir: PathLike) -> SampleData:
        """按特征来源载入样本（semantic 特征需要语义图像）"""
        with_semantics = self.settings.features == "semantic"
        return SampleDir(sample_dir).load(
            with_semantics=with_semantics, num_classes=self.settings.num_classes
        )

    def run_dir(self, sample_dir: PathLike, collect_stats: bool = False) -> PipelineResult:
        """载入样本目录并运行"""
        timer = StageTimer()
        with timer.stage("load"):
            sample = self.load(sample_dir)
        provider = self.provider or make_provider(self.settings, sample_dir)
        return self.run(sample, provider=provider, collect_stats=collect_stats, timer=timer)

    def _check_fusion(self, channels: int) -> None:
        s = self.settings
        if s.lidar_bev and s.fusion is not FusionMethod.CONCAT and channels != LIDAR_BEV_CHANNELS:
            raise ValidationError(
                f"{s.fusion.value} 融合要求相机特征为 {LIDAR_BEV_CHANNELS} 通道（RGB），"
                f"当前特征 {s.features} 为 {channels} 通道；请改用 concat 或 rgb 特征"
            )

    def _extract(
        self, provider: FeatureProvider, views: Sequence[CameraView]
    ) -> List[FeaturePyramid]:
        def extract(item: Tuple[int, CameraView]) -> FeaturePyramid:
            return provider.extract(item[0], item[1])

        return ordered_map(extract, list(enumerate(views)), self.settings.workers)

    def _depths(self, rig: CameraRig, cloud: np.ndarray) -> List[DepthImage]:
        return ordered_map(
            lambda mount: lidar_depth_image(cloud, rig.lidar_extrinsics, mount),
            rig.cameras,
            self.settings.workers,
        )

    def _decode(self, bev: BevGrid, camera_channels: int) -> SemanticGrid:
        s = self.settings
        class_ids = tuple(range(1, s.num_classes + 1))
        # concat 时只解码相机通道，激光雷达通道留给学习型解码器
        scores = bev
        if bev.channels != camera_channels:
            scores = BevGrid(bev.data[:camera_channels], bev.spec)
        if camera_channels == s.num_classes and s.features != "rgb":
            return scores_to_semantic(scores, class_ids, s.threshold)
        if camera_channels == 3:
            decoded = palette_decode(scores, PALETTE, s.threshold)
            return decoded.select([c for c in FOREGROUND_CLASSES if c in decoded.class_ids])
        raise ValidationError(
            f"无法解码 {camera_channels} 通道的特征：需要 {s.num_classes} 通道得分或 3 通道 RGB"
        )

    def run(
        self,
        sample: SampleData,
        provider: Optional[FeatureProvider] = None,
        collect_stats: bool = False,
        timer: Optional[StageTimer] = None,
    ) -> PipelineResult:
        """
        运行流水线

        参数:
            sample: 载入的样本
            provider: 特征提供器，None 时使用构造时的提供器或按参数构造
            collect_stats: 是否统计各尺度投影点数
            timer: 外部计时器（例如已记录 load 阶段）

        返回:
            PipelineResult

        异常:
            ValidationError: 样本不一致、特征通道与融合方式不兼容
        """
        s = self.settings
        spec = s.grid
        timer = timer or StageTimer()
        provider = provider or self.provider or make_provider(s)
        self._check_fusion(provider.channels)

        with timer.stage("prepare"):
            rig, views = crop_inputs(sample.rig, sample.views, s.image_divisor)
        with timer.stage("features"):
            pyramids = self._extract(provider, views)
        with timer.stage("depth"):
            depths = self._depths(rig, sample.cloud)
            pooled = [depth_pyramid(d, s.scales) for d in depths]

        scale_bevs: Dict[int, BevGrid] = {}
        projected: Dict[int, int] = {}
        with timer.stage("splat"):
            for factor in s.scales:
                jobs = [
                    SplatJob(
                        features=pyramid.at(factor),
                        depth=levels[factor],
                        intrinsics=mount.intrinsics,
                        extrinsics=mount.extrinsics,
                    )
                    for mount, pyramid, levels in zip(rig.cameras, pyramids, pooled)
                ]
                coarse = s.ms_b and factor == s.coarse_scale
                target = spec.coarsened(2) if coarse else spec
                grid = splat_views(jobs, target, s.workers)
                if coarse:
                    grid = BevGrid(bilinear_upsample2x(grid).data, spec)
                scale_bevs[factor] = grid
                if collect_stats:
                    projected[factor] = sum(
                        count_projected_points(
                            j.features, j.depth, j.intrinsics, j.extrinsics, target
                        )
                        for j in jobs
                    )
            camera_bev = fuse_scales([scale_bevs[f] for f in s.scales])

        lidar_bev = None
        bev = camera_bev
        if s.lidar_bev:
            with timer.stage("lidar"):
                lidar_bev = lidar_occupancy_bev(sample.cloud, rig.lidar_extrinsics, spec)
                bev = fuse_modalities(camera_bev, lidar_bev, s.fusion)

        with timer.stage("decode"):
            semantic = self._decode(bev, camera_bev.channels)

        timings = timer.timings
        logger.info(
            "流水线耗时(ms): " + ", ".join(f"{k}={v:.2f}" for k, v in timings.items())
        )
        return PipelineResult(
            semantic=semantic,
            bev=bev,
            camera_bev=camera_bev,
            scale_bevs=scale_bevs,
            lidar_bev=lidar_bev,
            projected_points=projected,
            depth_fill=[d.fill_ratio for d in depths],
            timings=timings,
        )
