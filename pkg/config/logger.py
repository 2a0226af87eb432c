"""
日志配置

项目所有日志都挂在根记录器 ``lapt`` 下：库模块用 ``get_logger("lapt.<模块>")``
取子记录器，只写日志、不加处理器；命令行入口调用一次 ``setup_logger``，
由它决定级别、控制台输出与日志文件。
"""

import logging
from datetime import datetime
from pathlib import Path
from typing import List, Optional, Union

from utils.errors import ConfigError

ROOT_LOGGER_NAME = "lapt"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def parse_level(level: Union[str, int]) -> int:
    """
    日志级别名转为数值

    异常:
        ConfigError: 级别名无效
    """
    if isinstance(level, int):
        return level
    numeric = logging.getLevelName(str(level).strip().upper())
    if not isinstance(numeric, int):
        raise ConfigError(f"无效的日志级别: {level}（可选 DEBUG, INFO, WARNING, ERROR, CRITICAL）")
    return numeric


def _log_file_path(log_dir: Path, name: str) -> Path:
    stamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    return log_dir / f"{name.replace('.', '_')}_{stamp}.log"


class Logger:
    """
    记录器配置器

    配置指定名称的标准记录器（默认项目根记录器 ``lapt``），替换它已有的处理器。
    各级别方法支持 ``%`` 风格的延迟格式化参数。

    属性:
        logger (logging.Logger): 被配置的标准记录器
        log_dir (Path): 日志目录（未启用文件输出时为 None）
        log_file (Path): 日志文件路径（未启用文件输出时为 None）
    """

    def __init__(
        self,
        name: str = ROOT_LOGGER_NAME,
        level: Union[str, int] = "INFO",
        log_dir: Optional[str] = None,
        console_output: bool = True,
        file_output: bool = False,
    ):
        """
        参数:
            name: 记录器名称
            level: 日志级别名或数值
            log_dir: 日志目录，启用文件输出且未给出时为 ./logs
            console_output: 是否输出到 stderr
            file_output: 是否写带时间戳的日志文件

        异常:
            ConfigError: 级别名无效
        """
        numeric = parse_level(level)
        self.logger = logging.getLogger(name)
        self.logger.setLevel(numeric)
        self.log_dir: Optional[Path] = None
        self.log_file: Optional[Path] = None

        self.close()
        formatter = logging.Formatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT)
        handlers: List[logging.Handler] = []
        if console_output:
            handlers.append(logging.StreamHandler())
        if file_output:
            self.log_dir = Path(log_dir) if log_dir is not None else Path("logs")
            self.log_dir.mkdir(parents=True, exist_ok=True)
            self.log_file = _log_file_path(self.log_dir, name)
            handlers.append(logging.FileHandler(self.log_file, encoding="utf-8"))
        for handler in handlers:
            handler.setFormatter(formatter)
            self.logger.addHandler(handler)
        if not handlers:
            self.logger.addHandler(logging.NullHandler())

    def close(self) -> None:
        """关闭并移除全部处理器（释放日志文件）"""
        for handler in list(self.logger.handlers):
            handler.close()
            self.logger.removeHandler(handler)

    def debug(self, message: str, *args: object) -> None:
        self.logger.debug(message, *args)

    def info(self, message: str, *args: object) -> None:
        self.logger.info(message, *args)

    def warning(self, message: str, *args: object) -> None:
        self.logger.warning(message, *args)

    def error(self, message: str, *args: object) -> None:
        self.logger.error(message, *args)

    def critical(self, message: str, *args: object) -> None:
        self.logger.critical(message, *args)

    def exception(self, message: str, *args: object) -> None:
        """ERROR 级别，附带当前异常的堆栈"""
        self.logger.exception(message, *args)


_configured: Optional[Logger] = None


def get_logger(name: str = ROOT_LOGGER_NAME) -> logging.Logger:
    """
    取项目记录器

    不以 ``lapt`` 开头的名称自动挂到根记录器下，例如 "depth" -> "lapt.depth"。

    示例:
        >>> get_logger("lapt.bev").name
        'lapt.bev'
    """
    if name != ROOT_LOGGER_NAME and not name.startswith(ROOT_LOGGER_NAME + "."):
        name = f"{ROOT_LOGGER_NAME}.{name}"
    return logging.getLogger(name)


def setup_logger(
    name: str = ROOT_LOGGER_NAME,
    level: Union[str, int] = "INFO",
    log_dir: Optional[str] = None,
    console_output: bool = True,
    file_output: bool = False,
) -> Logger:
    """
    配置项目日志（命令行入口调用一次）

    重复调用时先关闭上一次打开的日志文件。参数含义同 ``Logger``。

    返回:
        Logger 实例，之后可由 ``current_logger()`` 取回
    """
    global _configured
    if _configured is not None:
        _configured.close()
    _configured = Logger(
        name=name,
        level=level,
        log_dir=log_dir,
        console_output=console_output,
        file_output=file_output,
    )
    return _configured


def current_logger() -> Optional[Logger]:
    """最近一次 setup_logger 的结果，未配置时为 None"""
    return _configured
