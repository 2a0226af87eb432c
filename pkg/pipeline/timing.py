"""
分阶段计时

StageTimer 记录一次流水线运行中各阶段的耗时（毫秒，time.perf_counter），
summarize_latencies 把多次运行的记录汇总成 p50 / p95 / 均值表。
"""

import time
from contextlib import contextmanager
from typing import Dict, Iterator, List, Mapping, Sequence

import numpy as np
import pandas as pd

from utils.errors import InvalidArgumentError

TOTAL_STAGE = "total"


class StageTimer:
    """
    阶段计时器

    同名阶段多次进入时耗时累加；阶段顺序为首次进入的顺序。

    示例:
        >>> timer = StageTimer()
        >>> with timer.stage("depth"):
        ...     compute_depth()
        >>> timer.timings
        {'depth': 1.73}
    """

    def __init__(self):
        self._timings: Dict[str, float] = {}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = (time.perf_counter() - start) * 1000.0
            self._timings[name] = self._timings.get(name, 0.0) + elapsed

    @property
    def timings(self) -> Dict[str, float]:
        """{阶段名: 毫秒}"""
        return dict(self._timings)

    @property
    def total_ms(self) -> float:
        return float(sum(self._timings.values()))

    def record(self) -> Dict[str, float]:
        """各阶段耗时加上总耗时（键 total）"""
        record = self.timings
        record[TOTAL_STAGE] = self.total_ms
        return record


def fps_from_latency(mean_ms: float) -> float:
    """FPS = 1000 / 平均毫秒数"""
    if mean_ms <= 0:
        return float("inf")
    return 1000.0 / mean_ms


def summarize_latencies(records: Sequence[Mapping[str, float]]) -> pd.DataFrame:
    """
    汇总多次运行的阶段耗时

    参数:
        records: 每次运行一条 {阶段名: 毫秒} 记录（通常来自 StageTimer.record）

    返回:
        DataFrame，列为 stage / samples / mean_ms / p50_ms / p95_ms / fps，
        阶段顺序与第一条记录一致；fps 仅对 total 行有意义，其余行按同一公式给出

    异常:
        InvalidArgumentError: 记录为空
    """
    if not records:
        raise InvalidArgumentError("至少需要一条计时记录")
    stages: List[str] = []
    for record in records:
        for name in record:
            if name not in stages:
                stages.append(name)
    rows = []
    for name in stages:
        values = np.array([r[name] for r in records if name in r], dtype=np.float64)
        mean = float(values.mean())
        rows.append(
            {
                "stage": name,
                "samples": int(values.size),
                "mean_ms": mean,
                "p50_ms": float(np.percentile(values, 50)),
                "p95_ms": float(np.percentile(values, 95)),
                "fps": fps_from_latency(mean),
            }
        )
    return pd.DataFrame(rows, columns=["stage", "samples", "mean_ms", "p50_ms", "p95_ms", "fps"])
