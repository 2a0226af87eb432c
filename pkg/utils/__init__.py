"""
工具模块包

提供异常定义、并行执行辅助和 BEV 栅格绘图工具。
绘图相关模块依赖 matplotlib，按需导入（utils.plot_config / utils.bev_plot）。
"""

from . import errors
from .errors import (
    CalibrationError,
    ConfigError,
    FormatError,
    InvalidArgumentError,
    InvalidDepthError,
    LaptError,
    LaptIOError,
    PreconditionError,
    ValidationError,
)
from .parallel import ordered_map, resolve_workers

__all__ = [
    "errors",
    "LaptError",
    "ValidationError",
    "CalibrationError",
    "InvalidDepthError",
    "InvalidArgumentError",
    "PreconditionError",
    "ConfigError",
    "LaptIOError",
    "FormatError",
    "ordered_map",
    "resolve_workers",
]
