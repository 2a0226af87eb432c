"""
测试公共夹具

仿真样本生成较慢，整个测试会话只生成一次并在各测试间共享。
"""

from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pytest

from bev import GridSpec
from dataio import Annotations, SampleDir
from features import CameraView, RgbFeatureProvider
from geometry import CameraRig
from sim import (
    LidarPattern,
    SceneParams,
    analytic_bev,
    default_lidar_pattern,
    default_rig,
    generate_scene,
    render_views,
    sample_lidar,
)


def build_sample(
    root: Path,
    seed: int,
    params: Optional[SceneParams] = None,
    rig: Optional[CameraRig] = None,
    pattern: Optional[LidarPattern] = None,
    spec: Optional[GridSpec] = None,
    feature_factors=(8, 16),
) -> SampleDir:
    """渲染一个场景并写成样本目录（含 RGB 特征张量与解析真值）"""
    rig = rig or default_rig()
    pattern = pattern or default_lidar_pattern()
    scene = generate_scene(seed, params)
    views = render_views(scene, rig)
    cloud = sample_lidar(scene, pattern, rig.lidar_extrinsics)
    provider = RgbFeatureProvider(feature_factors)
    features = []
    for k, view in enumerate(views):
        features.extend(provider.extract(k, CameraView(view.image, view.semantic)).maps)
    return SampleDir(root).write(
        rig=rig,
        images=[v.image for v in views],
        cloud=cloud,
        semantics=[v.semantic for v in views],
        depths=[v.depth for v in views],
        features=features,
        annotations=Annotations(cuboids=list(scene.objects), polygons=list(scene.ground)),
        ground_truth=analytic_bev(scene, spec or GridSpec()),
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def small_spec() -> GridSpec:
    """20 m x 20 m、0.5 m 分辨率的小栅格"""
    return GridSpec(x_extent=20.0, y_extent=20.0, resolution=0.5)


@pytest.fixture(scope="session")
def make_sample(tmp_path_factory) -> Callable[..., SampleDir]:
    """样本目录工厂：make_sample(name, seed, params=None, ...)"""

    def factory(name: str, seed: int, **kwargs) -> SampleDir:
        root = tmp_path_factory.mktemp(name)
        return build_sample(root, seed, **kwargs)

    return factory


@pytest.fixture(scope="session")
def road_sample(make_sample) -> SampleDir:
    """默认相机配置、road 布局的仿真样本"""
    return make_sample("road_sample", seed=3)


@pytest.fixture(scope="session")
def plaza_sample(make_sample) -> SampleDir:
    """无物体的 plaza 样本：可见地面全部是可行驶区域"""
    return make_sample("plaza_sample", seed=5, params=SceneParams(counts={}, layout="plaza"))
