"""
评估指标

    - iou / per_class_iou / IoUAccumulator: 二值栅格交并比
    - binarize / scores_to_semantic: 投影得分 -> 二值栅格
    - palette_decode: RGB 特征栅格按调色板色度解码为类别
    - oracle_agreement: 仿真真值对比统计（1 格切比雪夫容差）
"""

from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt
import pandas as pd
from scipy import ndimage

from bev.grid import BevGrid
from utils.errors import InvalidArgumentError

from .shapes import SemanticGrid


def iou(pred: npt.ArrayLike, gt: npt.ArrayLike) -> float:
    """
    二值通道交并比 |pred ∧ gt| / |pred ∨ gt|

    两者都为空时返回 1.0。

    异常:
        InvalidArgumentError: 形状不一致
    """
    pred = np.asarray(pred).astype(bool)
    gt = np.asarray(gt).astype(bool)
    if pred.shape != gt.shape:
        raise InvalidArgumentError(f"IoU 输入形状不一致: {pred.shape} vs {gt.shape}")
    union = int(np.count_nonzero(pred | gt))
    if union == 0:
        return 1.0
    return int(np.count_nonzero(pred & gt)) / union


def binarize(grid: Union[BevGrid, npt.ArrayLike], threshold: float) -> np.ndarray:
    """
    阈值二值化：value >= threshold 为 1

    参数:
        grid: BevGrid 或任意形状的得分数组
        threshold: 阈值（+inf 得到全零）

    返回:
        同形状 uint8 数组
    """
    values = grid.data if isinstance(grid, BevGrid) else np.asarray(grid, dtype=np.float64)
    return (values >= threshold).astype(np.uint8)


def scores_to_semantic(scores: BevGrid, class_ids: Sequence[int], threshold: float) -> SemanticGrid:
    """逐通道二值化得分栅格，通道 c 对应 class_ids[c]"""
    if scores.channels != len(class_ids):
        raise InvalidArgumentError(
            f"得分栅格通道数 {scores.channels} 与类别列表长度 {len(class_ids)} 不一致"
        )
    return SemanticGrid(binarize(scores, threshold), tuple(class_ids), scores.spec)


def _check_pair(pred: SemanticGrid, gt: SemanticGrid) -> None:
    if pred.spec != gt.spec:
        raise InvalidArgumentError("预测与真值的栅格几何不一致")


def per_class_iou(pred: SemanticGrid, gt: SemanticGrid) -> Dict[int, float]:
    """
    按类别计算 IoU

    只评估两者共有的类别，按真值的类别顺序输出。

    返回:
        {class_id: iou}
    """
    _check_pair(pred, gt)
    common = [c for c in gt.class_ids if c in pred.class_ids]
    if not common:
        raise InvalidArgumentError(f"预测 {pred.class_ids} 与真值 {gt.class_ids} 没有共同类别")
    return {c: iou(pred.channel(c), gt.channel(c)) for c in common}


class IoUAccumulator:
    """
    数据集级 IoU 累加器

    对多个样本累加每类的交集与并集像素数，最终 IoU = ΣI / ΣU（并集为零时为 1.0）。

    示例:
        >>> acc = IoUAccumulator()
        >>> acc.update(pred, gt)
        >>> acc.compute()
        {1: 0.83, 3: 0.41}
    """

    def __init__(self):
        self.reset()

    def reset(self) -> None:
        self.intersections: Dict[int, int] = {}
        self.unions: Dict[int, int] = {}
        self.samples = 0

    def update(self, pred: SemanticGrid, gt: SemanticGrid) -> None:
        _check_pair(pred, gt)
        for c in gt.class_ids:
            if c not in pred.class_ids:
                continue
            p = pred.channel(c).astype(bool)
            g = gt.channel(c).astype(bool)
            self.intersections[c] = self.intersections.get(c, 0) + int(np.count_nonzero(p & g))
            self.unions[c] = self.unions.get(c, 0) + int(np.count_nonzero(p | g))
        self.samples += 1

    def compute(self) -> Dict[int, float]:
        return {
            c: (self.intersections[c] / self.unions[c]) if self.unions[c] else 1.0
            for c in self.unions
        }

    def to_frame(self, class_names: Optional[Mapping[int, str]] = None) -> pd.DataFrame:
        """按类别输出 class_id / class_name / intersection / union / iou 表"""
        scores = self.compute()
        rows = [
            {
                "class_id": c,
                "class_name": (class_names or {}).get(c, str(c)),
                "intersection": self.intersections[c],
                "union": self.unions[c],
                "iou": scores[c],
            }
            for c in scores
        ]
        columns = ["class_id", "class_name", "intersection", "union", "iou"]
        return pd.DataFrame(rows, columns=columns)


def palette_decode(
    rgb_bev: BevGrid,
    palette: Mapping[int, Tuple[float, float, float]],
    threshold: float = 1.0,
) -> SemanticGrid:
    """
    RGB 特征栅格解码为语义栅格

    每个单元的 RGB 累加值归一化为色度，取色度最近的调色板类别；
    单元得分为累加值总和除以该类颜色的分量和（约等于投影到该单元的像素数），
    得分 >= threshold 的单元置 1。

    参数:
        rgb_bev: 3 通道 RGB 特征栅格
        palette: {class_id: (r, g, b)}，取值 [0, 1]，只包含前景类别
        threshold: 像素数阈值

    返回:
        通道顺序与 palette 键升序一致的 SemanticGrid
    """
    if rgb_bev.channels != 3:
        raise InvalidArgumentError(f"palette_decode 需要 3 通道 RGB 栅格，实际 {rgb_bev.channels}")
    class_ids = sorted(int(c) for c in palette)
    if not class_ids:
        raise InvalidArgumentError("调色板为空")
    colors = np.array([palette[c] for c in class_ids], dtype=np.float64)
    color_mass = colors.sum(axis=1)
    if np.any(color_mass <= 0):
        raise InvalidArgumentError("调色板颜色不能为纯黑")
    chroma = colors / color_mass[:, None]

    mass = rgb_bev.data.sum(axis=0)
    occupied = mass > 0
    cell_chroma = np.zeros_like(rgb_bev.data)
    cell_chroma[:, occupied] = rgb_bev.data[:, occupied] / mass[occupied]
    # (K, X, Y) 色度距离，平票取编号最小的类别
    dist = np.sum((cell_chroma[None] - chroma[:, :, None, None]) ** 2, axis=1)
    winner = np.argmin(dist, axis=0)
    score = mass / color_mass[winner]

    data = np.zeros((len(class_ids),) + rgb_bev.spec.shape, dtype=np.uint8)
    positive = occupied & (score >= threshold)
    xs, ys = np.nonzero(positive)
    data[winner[xs, ys], xs, ys] = 1
    return SemanticGrid(data, tuple(class_ids), rgb_bev.spec)


@dataclass(frozen=True)
class OracleAgreement:
    """
    仿真真值对比统计

    属性:
        predicted_cells (int): 掩码内至少一个类别为正的单元数
        positive_pairs (int): 掩码内 (单元, 类别) 正样本数
        slack_hits (int): 在 1 格容差内存在同类真值的正样本数
        majority_hits (int): 最高得分类别在 1 格容差内存在真值的单元数
        exact_hits (int): 最高得分类别与该单元真值完全一致的单元数
    """

    predicted_cells: int
    positive_pairs: int
    slack_hits: int
    majority_hits: int
    exact_hits: int

    @property
    def slack_ratio(self) -> float:
        return self.slack_hits / self.positive_pairs if self.positive_pairs else 1.0

    @property
    def majority_ratio(self) -> float:
        return self.majority_hits / self.predicted_cells if self.predicted_cells else 1.0

    @property
    def exact_ratio(self) -> float:
        return self.exact_hits / self.predicted_cells if self.predicted_cells else 1.0


def oracle_agreement(
    scores: BevGrid,
    gt: SemanticGrid,
    threshold: float = 1.0,
    mask: Optional[np.ndarray] = None,
    slack: int = 1,
) -> OracleAgreement:
    """
    预测得分与解析真值的一致性

    参数:
        scores: 得分栅格，通道 c 对应 gt.class_ids[c]
        gt: 解析真值
        threshold: 二值化阈值
        mask: (X, Y) bool 对比区域，None 表示全栅格
        slack: 切比雪夫距离容差（格）

    返回:
        OracleAgreement
    """
    if scores.spec != gt.spec or scores.channels != len(gt.class_ids):
        raise InvalidArgumentError("得分栅格与真值的几何或通道数不一致")
    if mask is None:
        mask = np.ones(gt.spec.shape, dtype=bool)
    mask = np.asarray(mask, dtype=bool)

    positive = (scores.data >= threshold) & mask[None]
    structure = np.ones((2 * slack + 1, 2 * slack + 1), dtype=bool)
    dilated = np.stack(
        [ndimage.binary_dilation(ch.astype(bool), structure=structure) for ch in gt.data]
    )

    predicted = np.any(positive, axis=0)
    # 只在正类别之间比较得分
    masked_scores = np.where(positive, scores.data, -np.inf)
    best = np.argmax(masked_scores, axis=0)
    xs, ys = np.nonzero(predicted)
    best_at = best[xs, ys]

    return OracleAgreement(
        predicted_cells=int(xs.size),
        positive_pairs=int(np.count_nonzero(positive)),
        slack_hits=int(np.count_nonzero(positive & dilated)),
        majority_hits=int(np.count_nonzero(dilated[best_at, xs, ys])),
        exact_hits=int(np.count_nonzero(gt.data[best_at, xs, ys])),
    )
