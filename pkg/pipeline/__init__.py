"""
流水线模块

把几何、深度、特征、投影与融合各模块串成完整的 LAPT 流水线，
并提供消融变体与分阶段计时。
"""

from .runner import LaptPipeline, PipelineResult, crop_inputs, make_provider
from .settings import FEATURE_SOURCES, VARIANTS, PipelineSettings, variant_names
from .timing import StageTimer, fps_from_latency, summarize_latencies

__all__ = [
    "FEATURE_SOURCES",
    "VARIANTS",
    "PipelineSettings",
    "variant_names",
    "LaptPipeline",
    "PipelineResult",
    "crop_inputs",
    "make_provider",
    "StageTimer",
    "fps_from_latency",
    "summarize_latencies",
]
