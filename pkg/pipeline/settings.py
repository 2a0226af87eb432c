"""
流水线参数与消融变体

变体命名：

    lapt            单尺度 {16}
    lapt-fpn        双尺度 {8, 16}
    lapt-pp         单尺度 + 激光雷达 BEV 分支
    lapt-fpn-pp     双尺度 + 激光雷达 BEV 分支

任意变体可加后缀 -msb（d_f=16 投影到半分辨率栅格后上采样），
-pp 变体还可加融合后缀 :sum / :concat / :maxpool（默认 sum）。
例如 lapt-fpn-pp-msb:concat。
"""

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from bev import FusionMethod, GridSpec
from config.config_loader import ConfigLoader, get_default_config
from features import IMAGE_DIVISOR
from utils.errors import ConfigError, InvalidArgumentError
from utils.parallel import resolve_workers

FEATURE_SOURCES = ("semantic", "rgb", "file")

MSB_SUFFIX = "-msb"

VARIANTS: Dict[str, Dict[str, Any]] = {
    "lapt": {"scales": (16,), "lidar_bev": False},
    "lapt-fpn": {"scales": (8, 16), "lidar_bev": False},
    "lapt-pp": {"scales": (16,), "lidar_bev": True},
    "lapt-fpn-pp": {"scales": (8, 16), "lidar_bev": True},
}


@dataclass(frozen=True)
class PipelineSettings:
    """
    流水线参数

    属性:
        scales (Tuple[int, ...]): 特征下采样因子（升序、去重）
        fusion (FusionMethod): 模态融合方式
        ms_b (bool): 最大尺度走粗栅格投影 + 双线性上采样
        lidar_bev (bool): 是否启用激光雷达 BEV 分支
        features (str): 特征来源 semantic / rgb / file
        num_classes (int): 语义类别数（不含背景）
        threshold (float): 二值化阈值
        workers (int): 线程数
        grid (GridSpec): BEV 栅格几何
        image_divisor (int): 输入图像裁剪到该数的整数倍
        name (str): 变体名（未通过变体构造时为 None）
    """

    scales: Tuple[int, ...] = (8, 16)
    fusion: FusionMethod = FusionMethod.SUM
    ms_b: bool = False
    lidar_bev: bool = False
    features: str = "semantic"
    num_classes: int = 5
    threshold: float = 1.0
    workers: int = 1
    grid: GridSpec = field(default_factory=GridSpec)
    image_divisor: int = IMAGE_DIVISOR
    name: Optional[str] = None

    def __post_init__(self):
        scales = tuple(sorted({int(s) for s in self.scales}))
        if not scales or any(s < 1 for s in scales):
            raise InvalidArgumentError(f"下采样因子必须为非空正整数集合: {self.scales}")
        for s in scales:
            if self.image_divisor % s:
                raise InvalidArgumentError(
                    f"下采样因子 {s} 不能整除图像裁剪单元 {self.image_divisor}"
                )
        if self.features not in FEATURE_SOURCES:
            raise InvalidArgumentError(
                f"未知的特征来源 {self.features!r}，可选: {FEATURE_SOURCES}"
            )
        if self.num_classes < 1:
            raise InvalidArgumentError(f"类别数必须为正: {self.num_classes}")
        if self.ms_b and (self.grid.cells_x % 2 or self.grid.cells_y % 2):
            raise InvalidArgumentError(
                f"MS_B 要求栅格单元数为偶数: {self.grid.cells_x} x {self.grid.cells_y}"
            )
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "fusion", FusionMethod.parse(self.fusion))
        object.__setattr__(self, "threshold", float(self.threshold))
        object.__setattr__(self, "workers", resolve_workers(self.workers))

    @property
    def coarse_scale(self) -> int:
        """MS_B 分支使用的尺度（最大下采样因子）"""
        return self.scales[-1]

    def replace(self, **changes: Any) -> "PipelineSettings":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        """可写入 JSON 的参数摘要"""
        return {
            "name": self.name,
            "scales": list(self.scales),
            "fusion": self.fusion.value,
            "ms_b": self.ms_b,
            "lidar_bev": self.lidar_bev,
            "features": self.features,
            "num_classes": self.num_classes,
            "threshold": self.threshold,
            "workers": self.workers,
            "grid": {
                "x_extent": self.grid.x_extent,
                "y_extent": self.grid.y_extent,
                "resolution": self.grid.resolution,
                "z_min": self.grid.z_min,
                "z_max": self.grid.z_max,
            },
        }

    @classmethod
    def from_config(
        cls, config: Union[ConfigLoader, Mapping[str, Any], None] = None
    ) -> "PipelineSettings":
        """
        由配置构造

        参数:
            config: ConfigLoader、配置字典，或 None（使用默认配置）

        返回:
            PipelineSettings

        异常:
            ConfigError: 配置取值无效
        """
        if config is None:
            data = get_default_config()
        elif isinstance(config, ConfigLoader):
            data = config.to_dict()
        else:
            data = dict(config)
        pipeline = data.get("pipeline", {})
        grid = data.get("grid", {})
        image = data.get("image", {})
        try:
            spec = GridSpec(
                x_extent=float(grid.get("x_extent", 100.0)),
                y_extent=float(grid.get("y_extent", 100.0)),
                resolution=float(grid.get("resolution", 0.5)),
                z_min=float(grid.get("z_min", -2.0)),
                z_max=float(grid.get("z_max", 4.0)),
            )
            return cls(
                scales=tuple(int(s) for s in pipeline.get("scales", (8, 16))),
                fusion=pipeline.get("fusion", "sum"),
                ms_b=bool(pipeline.get("ms_b", False)),
                lidar_bev=bool(pipeline.get("lidar_bev", False)),
                features=str(pipeline.get("features", "semantic")),
                num_classes=int(pipeline.get("num_classes", 5)),
                threshold=float(pipeline.get("threshold", 1.0)),
                workers=int(pipeline.get("workers", 1)),
                grid=spec,
                image_divisor=int(image.get("divisor", IMAGE_DIVISOR)),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"流水线配置无效: {exc}") from exc

    @classmethod
    def from_variant(
        cls, name: str, base: Optional["PipelineSettings"] = None
    ) -> "PipelineSettings":
        """
        按变体名构造

        变体只决定尺度、MS_B、激光雷达分支与融合方式，其余参数取自 base。

        参数:
            name: 变体名，例如 "lapt-fpn"、"lapt-pp-msb:maxpool"
            base: 其余参数的来源，None 时使用默认参数

        异常:
            InvalidArgumentError: 变体名无法解析
        """
        base = base or cls()
        stem, _, fusion = name.strip().partition(":")
        ms_b = stem.endswith(MSB_SUFFIX)
        if ms_b:
            stem = stem[: -len(MSB_SUFFIX)]
        if stem not in VARIANTS:
            raise InvalidArgumentError(f"未知的变体 {name!r}，可选: {variant_names()}")
        preset = VARIANTS[stem]
        if fusion and not preset["lidar_bev"]:
            raise InvalidArgumentError(f"变体 {stem} 没有激光雷达分支，不能指定融合方式")
        return dataclasses.replace(
            base,
            scales=preset["scales"],
            lidar_bev=preset["lidar_bev"],
            ms_b=ms_b,
            fusion=FusionMethod.parse(fusion or FusionMethod.SUM),
            name=name.strip(),
        )


def variant_names() -> List[str]:
    """全部可用变体名（含 -msb 与融合后缀）"""
    names = []
    for stem, preset in VARIANTS.items():
        for prefix in (stem, stem + MSB_SUFFIX):
            names.append(prefix)
            if preset["lidar_bev"]:
                names.extend(
                    f"{prefix}:{m.value}" for m in FusionMethod if m is not FusionMethod.SUM
                )
    return names
