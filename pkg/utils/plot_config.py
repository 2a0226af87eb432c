"""
BEV 绘图样式

BEV 栅格图的标题、坐标轴与图例都是中文，这里负责挑选可用的 CJK 字体并统一图像样式。
没有 CJK 字体的机器（常见于无界面服务器）退回 DejaVu Sans，只记录一条警告。
"""

import warnings
from typing import Dict, List, Optional, Tuple

import matplotlib as mpl
import matplotlib.font_manager as fm

from config.logger import get_logger

logger = get_logger("lapt.plot")

# 按优先级排列，服务器上最常见的开源字体在前
CJK_FONT_CANDIDATES: Tuple[str, ...] = (
    "Noto Sans CJK SC",
    "Source Han Sans SC",
    "WenQuanYi Micro Hei",
    "WenQuanYi Zen Hei",
    "SimHei",
    "Microsoft YaHei",
    "PingFang SC",
)

# 候选列表之外按名称片段兜底
CJK_NAME_HINTS: Tuple[str, ...] = ("CJK", "Han Sans", "Hei")

FALLBACK_FONT = "DejaVu Sans"

# 栅格按单元显示，不做插值平滑
BEV_RC: Dict[str, object] = {
    "image.interpolation": "nearest",
    "image.cmap": "viridis",
    "axes.grid": False,
    "axes.unicode_minus": False,
    "figure.dpi": 100,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def get_available_fonts() -> List[str]:
    """已注册到 Matplotlib 的字体族名（去重、排序）"""
    return sorted({entry.name for entry in fm.fontManager.ttflist})


def detect_chinese_font() -> Optional[str]:
    """
    查找可显示中文的字体

    返回:
        字体族名；一个都没有时返回 None
    """
    available = get_available_fonts()
    installed = set(available)
    for name in CJK_FONT_CANDIDATES:
        if name in installed:
            return name
    return next((name for name in available if any(h in name for h in CJK_NAME_HINTS)), None)


def setup_plot_style(
    font_name: Optional[str] = None,
    font_size: int = 10,
    enable_warnings: bool = False,
) -> str:
    """
    应用 BEV 绘图样式

    参数:
        font_name: 指定字体族名，None 时自动查找 CJK 字体
        font_size: 正文字号，标题大 2 号，刻度与图例小 1 号
        enable_warnings: 是否保留 Matplotlib 的字形缺失警告

    返回:
        实际使用的字体族名（找不到时为 FALLBACK_FONT）

    示例:
        >>> setup_plot_style(font_size=12)
        'Noto Sans CJK SC'
    """
    if not enable_warnings:
        warnings.filterwarnings("ignore", message=r"Glyph \d+ .*missing from", category=UserWarning)

    chosen = font_name if font_name is not None else detect_chinese_font()
    if chosen is None or chosen not in get_available_fonts():
        logger.warning(
            f"字体 {chosen or 'CJK'} 不可用，改用 {FALLBACK_FONT}，图中中文可能显示为方框"
        )
        chosen = FALLBACK_FONT
    else:
        logger.debug(f"绘图字体: {chosen}")

    rc = dict(BEV_RC)
    rc.update({
        "font.family": "sans-serif",
        "font.sans-serif": [chosen, FALLBACK_FONT],
        "font.size": font_size,
        "axes.titlesize": font_size + 2,
        "axes.labelsize": font_size,
        "xtick.labelsize": font_size - 1,
        "ytick.labelsize": font_size - 1,
        "legend.fontsize": font_size - 1,
    })
    mpl.rcParams.update(rc)
    return chosen


def get_font_config_info() -> Dict[str, object]:
    """当前字体相关的 rcParams 摘要"""
    rc = mpl.rcParams
    return {
        "font.family": list(rc["font.family"]),
        "font.sans-serif": list(rc["font.sans-serif"]),
        "font.size": rc["font.size"],
        "axes.unicode_minus": rc["axes.unicode_minus"],
    }


def reset_font_config() -> None:
    """恢复 Matplotlib 默认样式"""
    mpl.rcdefaults()
