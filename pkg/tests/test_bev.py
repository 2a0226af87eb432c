"""
BEV 模块测试

栅格几何、体素求和投影、尺度与模态融合、MS_B 上采样以及激光雷达柱体统计。
"""

import math

import numpy as np
import pytest

from bev import (
    LIDAR_BEV_CHANNELS,
    BevGrid,
    FusionMethod,
    GridSpec,
    SplatJob,
    bilinear_upsample2x,
    count_projected_points,
    fuse_modalities,
    fuse_scales,
    lidar_occupancy_bev,
    project_coarse_then_upsample,
    splat_features,
    splat_views,
)
from depth import DepthImage
from features import FeatureMap
from geometry import CameraIntrinsics, RigidTransform, back_project_pixel
from sim.rig import camera_extrinsics
from utils.errors import InvalidArgumentError


def scalar_cell(spec, x, y, z):
    """单点落格（越界返回 None）"""
    if not (spec.z_min <= z < spec.z_max):
        return None
    ix = math.floor((x + spec.x_extent / 2.0) / spec.resolution)
    iy = math.floor((y + spec.y_extent / 2.0) / spec.resolution)
    if 0 <= ix < spec.cells_x and 0 <= iy < spec.cells_y:
        return ix, iy
    return None


def scalar_splat(features, depth, intr, extr, spec):
    """逐像素循环：块中心反投影、4x4 求逆变换到车体、落格累加"""
    inverse = np.linalg.inv(extr.matrix)
    out = np.zeros((features.channels, spec.cells_x, spec.cells_y))
    for row in range(depth.height):
        for col in range(depth.width):
            delta = depth.depth_at(col, row)
            if delta is None:
                continue
            u = features.factor * (col + 0.5)
            v = features.factor * (row + 0.5)
            p = back_project_pixel(u, v, delta, intr)
            q = inverse @ np.array([p.x, p.y, p.z, 1.0])
            cell = scalar_cell(spec, q[0], q[1], q[2])
            if cell is not None:
                out[:, cell[0], cell[1]] += features.data[:, row, col]
    return out


def scalar_bilinear2x(data):
    """半像素对齐、边缘钳制的双线性 x2 上采样（逐元素）"""
    channels, nx, ny = data.shape
    out = np.zeros((channels, 2 * nx, 2 * ny))

    def taps(i, n):
        src = (i + 0.5) / 2.0 - 0.5
        lo = math.floor(src)
        w = src - lo
        return min(max(lo, 0), n - 1), min(max(lo + 1, 0), n - 1), w

    for c in range(channels):
        for i in range(2 * nx):
            x0, x1, wx = taps(i, nx)
            for j in range(2 * ny):
                y0, y1, wy = taps(j, ny)
                top = data[c, x0, y0] * (1 - wy) + data[c, x0, y1] * wy
                bottom = data[c, x1, y0] * (1 - wy) + data[c, x1, y1] * wy
                out[c, i, j] = top * (1 - wx) + bottom * wx
    return out


def random_inputs(rng, factor=8, height=32, width=64, channels=3, fill=0.4):
    """随机特征图与同尺寸稀疏深度"""
    h, w = height // factor, width // factor
    features = FeatureMap(rng.random((channels, h, w)), factor)
    dense = np.full((h, w), np.inf)
    mask = rng.random((h, w)) < fill
    dense[mask] = rng.uniform(1.0, 12.0, int(mask.sum()))
    return features, DepthImage.from_dense(dense)


@pytest.fixture
def camera():
    intr = CameraIntrinsics.from_fov(64, 32, math.radians(70.0))
    extr = camera_extrinsics(math.radians(30.0), (0.5, 0.0, 1.5))
    return intr, extr


class TestGridSpec:
    """栅格几何测试类"""

    def test_default_size(self):
        """测试默认 100 m x 100 m、0.5 m 分辨率"""
        spec = GridSpec()
        assert spec.shape == (200, 200)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(x_extent=10.0, y_extent=10.0, resolution=0.3),
            dict(resolution=0.0),
            dict(z_min=1.0, z_max=1.0),
            dict(x_extent=-4.0),
        ],
    )
    def test_invalid(self, kwargs):
        """测试非法几何"""
        with pytest.raises(InvalidArgumentError):
            GridSpec(**kwargs)

    def test_cell_indices_boundaries(self, small_spec):
        """测试左闭右开的落格规则"""
        points = [
            [-10.0, -10.0, 0.0],
            [0.0, 0.0, 0.0],
            [10.0, 0.0, 0.0],
            [0.0, 0.0, 4.0],
            [0.0, 0.0, -2.0],
        ]
        ix, iy, inside = small_spec.cell_indices(points)
        assert inside.tolist() == [True, True, False, False, True]
        assert (ix[0], iy[0]) == (0, 0)
        assert (ix[1], iy[1]) == (20, 20)

    def test_coarsened(self, small_spec):
        """测试粗化"""
        coarse = small_spec.coarsened(2)
        assert coarse.shape == (20, 20)
        assert coarse.resolution == 1.0
        with pytest.raises(InvalidArgumentError):
            GridSpec(x_extent=1.5, y_extent=1.5, resolution=0.5).coarsened(2)

    def test_cell_centers(self, small_spec):
        """测试单元中心"""
        xs, ys = small_spec.cell_centers()
        assert xs[0] == pytest.approx(-9.75)
        assert ys[-1] == pytest.approx(9.75)

    def test_grid_rejects_non_finite(self, small_spec):
        """测试 BEV 数据必须有限"""
        data = np.zeros((1,) + small_spec.shape)
        data[0, 0, 0] = np.nan
        with pytest.raises(InvalidArgumentError):
            BevGrid(data, small_spec)


class TestSplatFeatures:
    """体素求和投影测试类"""

    def test_empty_depth(self, camera, small_spec):
        """测试无深度时输出全零"""
        intr, extr = camera
        features = FeatureMap(np.ones((3, 4, 8)), 8)
        grid = splat_features(features, DepthImage.empty(8, 4), intr, extr, small_spec)
        assert grid.total_mass() == 0.0
        assert grid.channels == 3

    def test_origin_cell(self):
        """测试落在车体原点的像素写入中心单元"""
        spec = GridSpec()
        intr = CameraIntrinsics(fx=1.0, fy=1.0, cx=0.5, cy=0.5, width=1, height=1)
        extr = RigidTransform.translation([0.0, 0.0, 1.0])
        features = FeatureMap(np.ones((2, 1, 1)), 1)
        depth = DepthImage.from_dense([[1.0]])

        grid = splat_features(features, depth, intr, extr, spec)
        assert grid.data[:, 100, 100].tolist() == [1.0, 1.0]
        assert grid.nonzero_cells() == 1

    def test_scalar_oracle(self, rng, camera, small_spec):
        """测试与逐像素标量实现一致"""
        intr, extr = camera
        for factor in (8, 16):
            features, depth = random_inputs(rng, factor=factor)
            grid = splat_features(features, depth, intr, extr, small_spec)
            expected = scalar_splat(features, depth, intr, extr, small_spec)
            assert np.allclose(grid.data, expected, atol=1e-12)

    def test_mass_conservation(self, rng, small_spec):
        """测试随机外参与内参下栅格总和等于落入栅格的像素特征之和"""
        landed = 0
        for _ in range(50):
            extr = RigidTransform.random(rng, max_translation=3.0)
            intr = CameraIntrinsics(
                fx=rng.uniform(20.0, 120.0),
                fy=rng.uniform(20.0, 120.0),
                cx=rng.uniform(0.0, 64.0),
                cy=rng.uniform(0.0, 32.0),
                width=64,
                height=32,
            )
            features, depth = random_inputs(rng, channels=2, fill=0.8)
            grid = splat_features(features, depth, intr, extr, small_spec)
            expected = scalar_splat(features, depth, intr, extr, small_spec).sum(axis=(1, 2))
            assert grid.data.sum(axis=(1, 2)) == pytest.approx(expected, rel=1e-9, abs=1e-12)

            ones = FeatureMap(np.ones((1, depth.height, depth.width)), features.factor)
            inside = count_projected_points(ones, depth, intr, extr, small_spec)
            assert splat_features(ones, depth, intr, extr, small_spec).total_mass() == inside
            assert inside <= depth.occupancy_count
            landed += inside
        assert landed > 0

    def test_intrinsics_size_mismatch(self, camera, small_spec):
        """测试特征图尺寸乘以因子与内参图像尺寸不一致"""
        intr, extr = camera
        wide = CameraIntrinsics(fx=50.0, fy=50.0, cx=64.0, cy=32.0, width=128, height=64)
        depth = DepthImage.empty(8, 4)
        for factor in (4, 16):
            fmap = FeatureMap(np.ones((3, 4, 8)), factor)
            with pytest.raises(InvalidArgumentError):
                splat_features(fmap, depth, intr, extr, small_spec)
        with pytest.raises(InvalidArgumentError):
            count_projected_points(
                FeatureMap(np.ones((3, 4, 8)), 8), depth, wide, extr, small_spec
            )

    def test_translation_equivariance(self, rng, camera, small_spec):
        """测试车体坐标系平移一个单元时输出栅格同向平移一个单元"""
        intr, extr = camera
        step = small_spec.resolution
        features, depth = random_inputs(rng, fill=0.9)
        grid = splat_features(features, depth, intr, extr, small_spec)
        moved = extr @ RigidTransform.translation([-step, 0.0, 0.0])
        shifted = splat_features(features, depth, intr, moved, small_spec)
        assert grid.total_mass() > 0
        assert np.allclose(shifted.data[:, 1:, :], grid.data[:, :-1, :], atol=1e-12)

        moved = extr @ RigidTransform.translation([0.0, step, 0.0])
        shifted = splat_features(features, depth, intr, moved, small_spec)
        assert np.allclose(shifted.data[:, :, :-1], grid.data[:, :, 1:], atol=1e-12)

    def test_size_mismatch(self, camera, small_spec):
        """测试特征图与深度图尺寸不一致"""
        intr, extr = camera
        with pytest.raises(InvalidArgumentError):
            splat_features(
                FeatureMap(np.ones((3, 4, 8)), 8), DepthImage.empty(4, 2), intr, extr, small_spec
            )

    def test_splat_views_worker_independent(self, rng, camera, small_spec):
        """测试多任务合并结果与线程数无关"""
        intr, extr = camera
        jobs = []
        for factor in (8, 16):
            for _ in range(3):
                features, depth = random_inputs(rng, factor=factor)
                jobs.append(SplatJob(features, depth, intr, extr))
        single = splat_views(jobs, small_spec, workers=1)
        parallel = splat_views(jobs, small_spec, workers=4)
        assert np.array_equal(single.data, parallel.data)

    def test_splat_views_errors(self, rng, camera, small_spec):
        """测试空任务与通道数不一致"""
        intr, extr = camera
        with pytest.raises(InvalidArgumentError):
            splat_views([], small_spec)
        a, depth = random_inputs(rng, channels=3)
        b = FeatureMap(np.ones((2, 4, 8)), 8)
        with pytest.raises(InvalidArgumentError):
            splat_views(
                [SplatJob(a, depth, intr, extr), SplatJob(b, depth, intr, extr)], small_spec
            )


class TestFusion:
    """融合算子测试类"""

    def test_fuse_scales_identity(self, rng, small_spec):
        """测试单个栅格与加零栅格"""
        grid = BevGrid(rng.random((3,) + small_spec.shape), small_spec)
        assert fuse_scales([grid]) == grid
        assert fuse_scales([grid, BevGrid.zeros(small_spec, 3)]) == grid

    def test_fuse_scales_scalar_sum(self, rng, small_spec):
        """测试逐单元求和"""
        a = BevGrid(rng.random((2,) + small_spec.shape), small_spec)
        b = BevGrid(rng.random((2,) + small_spec.shape), small_spec)
        fused = fuse_scales([a, b])
        for c in range(2):
            for i in range(0, small_spec.cells_x, 7):
                for j in range(small_spec.cells_y):
                    assert fused.data[c, i, j] == a.data[c, i, j] + b.data[c, i, j]

    def test_fuse_scales_associative_commutative(self, rng, small_spec):
        """测试多尺度求和满足交换律与结合律（容差 1e-9）"""
        a, b, c = (
            BevGrid(rng.uniform(0, 50, (3,) + small_spec.shape), small_spec) for _ in range(3)
        )
        reference = fuse_scales([a, b, c]).data
        for order in ([c, a, b], [b, c, a], [c, b, a]):
            assert np.allclose(fuse_scales(order).data, reference, rtol=0, atol=1e-9)
        left = fuse_scales([fuse_scales([a, b]), c]).data
        right = fuse_scales([a, fuse_scales([b, c])]).data
        assert np.allclose(left, reference, rtol=0, atol=1e-9)
        assert np.allclose(right, reference, rtol=0, atol=1e-9)

    def test_fuse_scales_mismatch(self, small_spec):
        """测试形状不一致与空列表"""
        with pytest.raises(InvalidArgumentError):
            fuse_scales([BevGrid.zeros(small_spec, 2), BevGrid.zeros(small_spec, 3)])
        with pytest.raises(InvalidArgumentError):
            fuse_scales([])

    def test_maxpool_idempotent(self, rng, small_spec):
        """测试栅格与自身 maxpool 不变"""
        grid = BevGrid(rng.random((3,) + small_spec.shape), small_spec)
        assert fuse_modalities(grid, grid, "maxpool") == grid

    def test_concat_slices(self, rng, small_spec):
        """测试拼接后可按通道切片恢复"""
        cam = BevGrid(rng.random((2,) + small_spec.shape), small_spec)
        lidar = BevGrid(rng.random((3,) + small_spec.shape), small_spec)
        fused = fuse_modalities(cam, lidar, FusionMethod.CONCAT)
        assert fused.channels == 5
        assert np.array_equal(fused.data[:2], cam.data)
        assert np.array_equal(fused.data[2:], lidar.data)

    def test_sum_commutative_and_bounds_maxpool(self, rng, small_spec):
        """测试 sum 可交换且非负输入下 maxpool <= sum"""
        a = BevGrid(rng.random((3,) + small_spec.shape), small_spec)
        b = BevGrid(rng.random((3,) + small_spec.shape), small_spec)
        assert fuse_modalities(a, b, "sum") == fuse_modalities(b, a, "sum")
        assert np.all(fuse_modalities(a, b, "maxpool").data <= fuse_modalities(a, b, "sum").data)

    def test_channel_mismatch(self, small_spec):
        """测试 sum/maxpool 通道数不一致"""
        a = BevGrid.zeros(small_spec, 3)
        b = BevGrid.zeros(small_spec, 2)
        for method in ("sum", "maxpool"):
            with pytest.raises(InvalidArgumentError):
                fuse_modalities(a, b, method)
        with pytest.raises(InvalidArgumentError):
            fuse_modalities(a, BevGrid.zeros(GridSpec(), 3), "concat")

    def test_unknown_method(self):
        """测试未知融合方式"""
        with pytest.raises(InvalidArgumentError):
            FusionMethod.parse("average")


class TestCoarseThenUpsample:
    """粗栅格投影后上采样测试类"""

    def test_constant_preserved(self, small_spec):
        """测试常数栅格上采样后仍为常数"""
        coarse = BevGrid(np.full((2, 10, 10), 3.5), GridSpec(20.0, 20.0, 2.0))
        fine = bilinear_upsample2x(coarse)
        assert fine.spec.shape == (20, 20)
        assert fine.spec.resolution == 1.0
        assert np.allclose(fine.data, 3.5)

    def test_upsample_scalar_oracle(self, rng):
        """测试与逐元素双线性实现一致"""
        coarse = BevGrid(rng.random((2, 6, 9)), GridSpec(6.0, 9.0, 1.0))
        fine = bilinear_upsample2x(coarse)
        assert np.allclose(fine.data, scalar_bilinear2x(coarse.data), atol=1e-12)

    def test_empty_depth(self, camera, small_spec):
        """测试无深度时输出全尺寸零栅格"""
        intr, extr = camera
        grid = project_coarse_then_upsample(
            FeatureMap(np.ones((3, 4, 8)), 8), DepthImage.empty(8, 4), intr, extr, small_spec
        )
        assert grid.spec == small_spec
        assert grid.total_mass() == 0.0

    def test_two_stage(self, rng, camera, small_spec):
        """测试等于半分辨率投影再双线性上采样"""
        intr, extr = camera
        features, depth = random_inputs(rng)
        grid = project_coarse_then_upsample(features, depth, intr, extr, small_spec)
        coarse = splat_features(features, depth, intr, extr, small_spec.coarsened(2))
        assert coarse.spec.shape == (20, 20)
        assert np.allclose(grid.data, scalar_bilinear2x(coarse.data), atol=1e-12)
        assert grid.total_mass() == pytest.approx(4.0 * coarse.total_mass())


class TestLidarOccupancy:
    """激光雷达柱体统计测试类"""

    def test_empty_cloud(self, small_spec):
        """测试空点云"""
        grid = lidar_occupancy_bev(np.empty((0, 3)), RigidTransform.identity(), small_spec)
        assert grid.channels == LIDAR_BEV_CHANNELS
        assert grid.total_mass() == 0.0

    def test_origin_point(self):
        """测试车体原点上方的一个点"""
        spec = GridSpec()
        grid = lidar_occupancy_bev([[0.0, 0.0, 1.25]], RigidTransform.identity(), spec)
        assert grid.data[:, 100, 100].tolist() == [1.0, 1.25, 1.25]
        assert grid.nonzero_cells() == 1

    def test_group_by_oracle(self, rng, small_spec):
        """测试与逐点分组统计一致"""
        e_p = RigidTransform.translation([0.0, 0.0, -1.84])
        cloud = np.column_stack(
            [rng.uniform(-12, 12, 3000), rng.uniform(-12, 12, 3000), rng.uniform(-4.5, 3.0, 3000)]
        )
        grid = lidar_occupancy_bev(cloud, e_p, small_spec)

        groups = {}
        for x, y, z in cloud:
            cell = scalar_cell(small_spec, x, y, z + 1.84)
            if cell is not None:
                groups.setdefault(cell, []).append(z + 1.84)
        assert grid.nonzero_cells() == len(groups)
        for (ix, iy), zs in groups.items():
            assert grid.data[0, ix, iy] == len(zs)
            assert grid.data[1, ix, iy] == pytest.approx(max(zs))
            assert grid.data[2, ix, iy] == pytest.approx(sum(zs) / len(zs))


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
