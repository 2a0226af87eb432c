"""
配置管理模块

提供统一的配置文件加载、验证和访问接口，以及日志配置。
"""

from .config_loader import ConfigLoader, get_default_config, load_config
from .logger import Logger, get_logger, setup_logger

__all__ = [
    "ConfigLoader",
    "load_config",
    "get_default_config",
    "Logger",
    "get_logger",
    "setup_logger",
]
