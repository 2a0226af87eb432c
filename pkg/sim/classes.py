"""
类别表与调色板

0 为背景，1..5 为评估的五个语义类别。调色板各颜色的色度互不相同，
RGB 池化特征投影到 BEV 后仍可按色度区分类别。
"""

from typing import Dict, Tuple

from utils.errors import InvalidArgumentError

BACKGROUND = 0
DRIVABLE_AREA = 1
WALKWAY = 2
VEHICLE = 3
HUMAN = 4
MOVABLE_OBJECT = 5

CLASS_NAMES: Dict[int, str] = {
    BACKGROUND: "background",
    DRIVABLE_AREA: "drivable_area",
    WALKWAY: "walkway",
    VEHICLE: "vehicle",
    HUMAN: "human",
    MOVABLE_OBJECT: "movable_object",
}

CLASS_IDS: Dict[str, int] = {name: cid for cid, name in CLASS_NAMES.items()}

FOREGROUND_CLASSES: Tuple[int, ...] = (DRIVABLE_AREA, WALKWAY, VEHICLE, HUMAN, MOVABLE_OBJECT)
NUM_CLASSES = len(FOREGROUND_CLASSES)

# 8 位 RGB；背景指地面多边形以外的地面
PALETTE_8BIT: Dict[int, Tuple[int, int, int]] = {
    BACKGROUND: (100, 130, 100),
    DRIVABLE_AREA: (90, 90, 150),
    WALKWAY: (200, 160, 60),
    VEHICLE: (220, 40, 40),
    HUMAN: (40, 200, 60),
    MOVABLE_OBJECT: (60, 170, 220),
}
SKY_8BIT: Tuple[int, int, int] = (235, 235, 245)

PALETTE: Dict[int, Tuple[float, float, float]] = {
    cid: tuple(c / 255.0 for c in rgb) for cid, rgb in PALETTE_8BIT.items()
}
SKY_COLOR: Tuple[float, float, float] = tuple(c / 255.0 for c in SKY_8BIT)


def class_id(name: str) -> int:
    """类别名 -> 编号"""
    try:
        return CLASS_IDS[name]
    except KeyError as exc:
        raise InvalidArgumentError(f"未知类别 {name!r}，可选: {sorted(CLASS_IDS)}") from exc
