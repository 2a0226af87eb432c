"""
BEV 栅格可视化

图像上方为车体 +x（前），左侧为车体 +y（左），车辆位于图像中心。
"""

from pathlib import Path
from typing import Mapping, Optional, Tuple, Union

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.axes import Axes
from matplotlib.figure import Figure
from matplotlib.patches import Patch

from bev.grid import BevGrid, GridSpec
from evaluation.shapes import SemanticGrid
from utils.errors import InvalidArgumentError, LaptIOError

from .plot_config import setup_plot_style

Color = Tuple[float, float, float]


def _to_image(data: np.ndarray) -> np.ndarray:
    """(X, Y, ...) 栅格 -> 行向后、列向右的图像数组"""
    return data[::-1, ::-1]


def _extent(spec: GridSpec) -> Tuple[float, float, float, float]:
    half_x, half_y = spec.x_extent / 2.0, spec.y_extent / 2.0
    return (half_y, -half_y, -half_x, half_x)


def semantic_to_rgb(
    grid: SemanticGrid, palette: Mapping[int, Color], background: Color = (1.0, 1.0, 1.0)
) -> np.ndarray:
    """
    语义栅格着色

    按 class_ids 顺序依次绘制，靠后的类别覆盖靠前的类别。

    返回:
        (X, Y, 3) float 数组
    """
    rgb = np.empty(grid.spec.shape + (3,))
    rgb[:] = background
    for index, cid in enumerate(grid.class_ids):
        if cid in palette:
            rgb[grid.data[index].astype(bool)] = palette[cid]
    return rgb


def plot_semantic_grid(
    grid: SemanticGrid,
    palette: Mapping[int, Color],
    class_names: Optional[Mapping[int, str]] = None,
    ax: Optional[Axes] = None,
    title: str = "BEV 语义栅格",
) -> Axes:
    """绘制语义栅格，附类别图例"""
    if ax is None:
        _, ax = plt.subplots(figsize=(6, 6))
    ax.imshow(_to_image(semantic_to_rgb(grid, palette)), extent=_extent(grid.spec))
    handles = [
        Patch(color=palette[c], label=(class_names or {}).get(c, str(c)))
        for c in grid.class_ids
        if c in palette
    ]
    if handles:
        ax.legend(handles=handles, loc="upper right", fontsize="small")
    ax.set_xlabel("y (米，向左为正)")
    ax.set_ylabel("x (米，向前为正)")
    ax.set_title(title)
    return ax


def plot_bev_grid(
    grid: BevGrid,
    channel: Optional[int] = None,
    ax: Optional[Axes] = None,
    title: str = "BEV 特征栅格",
    cmap: str = "viridis",
) -> Axes:
    """
    绘制 BEV 特征栅格

    参数:
        grid: 特征栅格
        channel: 通道下标，None 时绘制各通道绝对值之和
        ax: 目标坐标轴
        title: 标题
        cmap: 颜色映射
    """
    if channel is None:
        values = np.abs(grid.data).sum(axis=0)
    else:
        if not 0 <= channel < grid.channels:
            raise InvalidArgumentError(f"通道下标 {channel} 超出范围 [0, {grid.channels})")
        values = grid.data[channel]
    if ax is None:
        _, ax = plt.subplots(figsize=(6, 6))
    image = ax.imshow(_to_image(values), extent=_extent(grid.spec), cmap=cmap)
    ax.figure.colorbar(image, ax=ax, shrink=0.8)
    ax.set_xlabel("y (米，向左为正)")
    ax.set_ylabel("x (米，向前为正)")
    ax.set_title(title)
    return ax


def render_grid_figure(
    grid: Union[BevGrid, SemanticGrid],
    palette: Optional[Mapping[int, Color]] = None,
    class_names: Optional[Mapping[int, str]] = None,
    title: Optional[str] = None,
) -> Figure:
    """按栅格类型生成单图"""
    setup_plot_style()
    fig, ax = plt.subplots(figsize=(6, 6))
    if isinstance(grid, SemanticGrid):
        plot_semantic_grid(grid, palette or {}, class_names, ax=ax, title=title or "BEV 语义栅格")
    else:
        plot_bev_grid(grid, ax=ax, title=title or "BEV 特征栅格")
    return fig


def save_figure(fig: Figure, path: Union[str, Path]) -> None:
    """保存并关闭图像"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path)
    except OSError as exc:
        raise LaptIOError(f"无法保存图像 {path}: {exc}") from exc
    finally:
        plt.close(fig)
