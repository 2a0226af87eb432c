"""
配置加载

默认配置来自 ``default_config.yaml``（代码内有一份相同的副本 ``get_default_config``），
用户 YAML 只需写出要覆盖的键，按层级合并到默认配置之上。
优先级从低到高：默认配置 < 用户 YAML < 环境变量 < 命令行参数。
"""

import copy
import os
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

import yaml

from utils.errors import ConfigError, LaptIOError

from .logger import parse_level

DEFAULT_CONFIG_PATH = Path(__file__).with_name("default_config.yaml")


def _positive_int(raw: str) -> int:
    value = int(raw)
    if value < 1:
        raise ValueError(f"必须为正整数: {value}")
    return value


def _level_name(raw: str) -> str:
    parse_level(raw)
    return raw.strip().upper()


# 变量名 -> (配置键, 转换函数)
ENV_OVERRIDES: Dict[str, Tuple[str, Callable[[str], Any]]] = {
    "LAPT_WORKERS": ("pipeline.workers", _positive_int),
    "LAPT_LOG_LEVEL": ("logging.level", _level_name),
}


def _read_yaml(path: Path) -> Dict[str, Any]:
    """读取顶层为映射的 YAML 文件，空文件视为空映射"""
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise LaptIOError(f"配置文件不存在: {path}") from exc
    except OSError as exc:
        raise LaptIOError(f"无法读取配置文件 {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"配置文件 YAML 格式错误: {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"配置文件顶层必须是映射，实际为 {type(data).__name__}: {path}")
    return data


def _deep_merge(base: Dict[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
    """按层级合并，override 优先；只有两边都是映射时才递归"""
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class ConfigLoader:
    """
    分层配置

    属性:
        config (dict): 合并后的配置
        config_path (Path): 最近一次加载的文件（只用默认配置时为 None）

    示例:
        >>> loader = ConfigLoader()
        >>> loader.get("grid.resolution")
        0.5
    """

    def __init__(self, config_path: Optional[str] = None):
        self.config: Dict[str, Any] = get_default_config()
        self.config_path: Optional[Path] = None
        if config_path:
            self.load(config_path)

    def load(self, config_path: str, merge_defaults: bool = True) -> None:
        """
        加载 YAML 配置

        参数:
            config_path: YAML 文件路径
            merge_defaults: True 时合并到默认配置之上，False 时只使用文件内容

        异常:
            LaptIOError: 文件不存在或无法读取
            ConfigError: YAML 格式错误或顶层不是映射
        """
        path = Path(config_path)
        loaded = _read_yaml(path)
        self.config = _deep_merge(get_default_config() if merge_defaults else {}, loaded)
        self.config_path = path

    def get(self, key: str, default: Any = None) -> Any:
        """
        按点号路径取值，例如 "sim.lidar.rings"；路径不存在时返回 default
        """
        node: Any = self.config
        for part in key.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def set(self, key: str, value: Any) -> None:
        """按点号路径赋值，缺失或非映射的中间层替换为空映射"""
        *parents, leaf = key.split(".")
        node = self.config
        for part in parents:
            child = node.get(part)
            if not isinstance(child, dict):
                child = node[part] = {}
            node = child
        node[leaf] = value

    def apply_env_overrides(self, environ: Optional[Mapping[str, str]] = None) -> Dict[str, Any]:
        """
        应用环境变量覆盖（LAPT_WORKERS、LAPT_LOG_LEVEL），空值忽略

        参数:
            environ: 环境变量映射，默认 os.environ

        返回:
            实际生效的覆盖项 {配置键: 值}

        异常:
            ConfigError: 取值无法转换，或线程数不是正整数、日志级别无效
        """
        environ = os.environ if environ is None else environ
        applied: Dict[str, Any] = {}
        for var, (key, convert) in ENV_OVERRIDES.items():
            raw = environ.get(var, "")
            if not raw.strip():
                continue
            try:
                value = convert(raw)
            except ValueError as exc:
                raise ConfigError(f"环境变量 {var}={raw!r} 无效: {exc}") from exc
            self.set(key, value)
            applied[key] = value
        return applied

    def save(self, output_path: Optional[str] = None) -> None:
        """
        写出 YAML（键顺序与内存中一致）

        参数:
            output_path: 目标路径，None 时写回最近加载的文件

        异常:
            ConfigError: 未给路径且配置不是从文件加载的
            LaptIOError: 写入失败
        """
        target = Path(output_path) if output_path else self.config_path
        if target is None:
            raise ConfigError("未指定保存路径，且当前配置不是从文件加载的")
        text = yaml.safe_dump(
            self.config, allow_unicode=True, default_flow_style=False, sort_keys=False
        )
        try:
            target.write_text(text, encoding="utf-8")
        except OSError as exc:
            raise LaptIOError(f"无法写入配置文件 {target}: {exc}") from exc

    def to_dict(self) -> Dict[str, Any]:
        """配置的深拷贝"""
        return copy.deepcopy(self.config)


def load_config(config_path: str) -> Dict[str, Any]:
    """读取 YAML 并与默认配置合并，返回字典"""
    return ConfigLoader(config_path).to_dict()


def get_default_config() -> Dict[str, Any]:
    """default_config.yaml 的代码内副本（每次返回新字典），两者由测试保证一致"""
    return {
        'grid': {
            'x_extent': 100.0,
            'y_extent': 100.0,
            'resolution': 0.5,
            'z_min': -2.0,
            'z_max': 4.0,
        },
        'image': {
            'height': 128,
            'width': 352,
            'divisor': 16,
        },
        'pipeline': {
            'scales': [8, 16],
            'fusion': 'sum',
            'ms_b': False,
            'lidar_bev': False,
            'features': 'semantic',
            'num_classes': 5,
            'threshold': 1.0,
            'workers': 1,
        },
        'sim': {
            'seed': 0,
            'layout': 'road',
            'counts': {
                'vehicle': 8,
                'human': 6,
                'movable_object': 4,
            },
            'road_half_width': 5.0,
            'walkway_width': 3.0,
            'ego_clearance': 4.0,
            'extent': 96.0,
            'ground_extent': 160.0,
            'sector_count': 6,
            'camera_height': 1.5,
            'horizontal_fov_deg': 70.0,
            'lidar': {
                'height': 1.84,
                'min_elevation_deg': -30.67,
                'max_elevation_deg': 10.67,
                'rings': 32,
                'azimuth_steps': 1085,
                'max_range': 70.0,
                'dropout': 0.0,
            },
        },
        'bench': {
            'iterations': 50,
            'warmup': 5,
            'target_fps': 20.0,
        },
        'logging': {
            'level': 'INFO',
            'log_dir': 'logs',
            'console_output': True,
            'file_output': False,
        },
    }
