"""
数据读写模块

标定、点云、图像、特征、栅格与标注的文件格式，以及样本目录布局。
字节布局见 docs/file_formats.md。
"""

from .annotations import Annotations, read_annotations, write_annotations
from .binary import (
    BEV_MAGIC,
    CLOUD_MAGIC,
    DEPTH_MAGIC,
    FEATURE_MAGIC,
    SEMANTIC_MAGIC,
    encode_cloud,
    read_cloud,
    read_depth,
    read_features,
    read_grid,
    read_semantic_grid,
    write_cloud,
    write_depth,
    write_features,
    write_grid,
)
from .calibration import read_calibration, rig_from_dict, rig_to_dict, write_calibration
from .images import read_image, read_rgb_image, read_semantic_image, write_image
from .sample_dir import SampleData, SampleDir

__all__ = [
    "CLOUD_MAGIC",
    "BEV_MAGIC",
    "SEMANTIC_MAGIC",
    "DEPTH_MAGIC",
    "FEATURE_MAGIC",
    "encode_cloud",
    "read_cloud",
    "write_cloud",
    "read_grid",
    "read_semantic_grid",
    "write_grid",
    "read_depth",
    "write_depth",
    "read_features",
    "write_features",
    "read_calibration",
    "write_calibration",
    "rig_to_dict",
    "rig_from_dict",
    "read_image",
    "read_rgb_image",
    "read_semantic_image",
    "write_image",
    "Annotations",
    "read_annotations",
    "write_annotations",
    "SampleData",
    "SampleDir",
]
