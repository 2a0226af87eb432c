"""
并行执行辅助

线程池按任务顺序返回结果，调用方按固定顺序合并，
因此输出与线程数无关。
"""

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from .errors import ConfigError

T = TypeVar("T")
R = TypeVar("R")

WORKERS_ENV_VAR = "LAPT_WORKERS"


def resolve_workers(requested: Optional[int] = None) -> int:
    """
    确定实际使用的线程数

    优先级：显式参数 > 环境变量 LAPT_WORKERS > 1。

    参数:
        requested: 显式指定的线程数

    返回:
        正整数线程数

    异常:
        ConfigError: 线程数不是正整数
    """
    if requested is None:
        raw = os.environ.get(WORKERS_ENV_VAR, "")
        if raw == "":
            return 1
        try:
            requested = int(raw)
        except ValueError as exc:
            raise ConfigError(f"环境变量 {WORKERS_ENV_VAR} 取值无效: {raw!r}") from exc
    if int(requested) < 1:
        raise ConfigError(f"线程数必须为正整数: {requested}")
    return int(requested)


def ordered_map(func: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """
    并行映射，结果顺序与输入顺序一致

    参数:
        func: 作用于每个元素的纯函数
        items: 输入序列
        workers: 线程数，1 表示顺序执行

    返回:
        结果列表
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items))
