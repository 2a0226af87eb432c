"""
几何模块测试

刚体变换、投影与反投影；向量化实现与逐点标量实现交叉验证。
"""

import math
import time

import numpy as np
import pytest

from geometry import (
    Z_EPSILON,
    CameraIntrinsics,
    CameraMount,
    CameraRig,
    RigidTransform,
    Vec3,
    back_project_pixel,
    back_project_pixels,
    camera_to_vehicle,
    lidar_to_camera,
    lidar_to_vehicle,
    project_to_pixels,
)
from utils.errors import CalibrationError, InvalidDepthError


def scalar_apply(matrix, point):
    """4x4 齐次矩阵乘点（纯 Python 循环）"""
    p = [point[0], point[1], point[2], 1.0]
    return [sum(matrix[i][j] * p[j] for j in range(4)) for i in range(3)]


def scalar_matmul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(4)) for j in range(4)] for i in range(4)]


def scalar_project(point, intr):
    x, y, z = point
    if z <= Z_EPSILON:
        return None
    u = intr.fx * x / z + intr.cx
    v = intr.fy * y / z + intr.cy
    if not (0 <= u < intr.width and 0 <= v < intr.height):
        return None
    return u, v, z


@pytest.fixture
def intrinsics():
    return CameraIntrinsics(fx=100.0, fy=100.0, cx=50.0, cy=40.0, width=100, height=80)


def frustum_points(rng, intr, count, max_depth=60.0):
    """随机生成视锥内（像素落在图像内、z > z_epsilon）的相机坐标点"""
    u = rng.uniform(0.0, intr.width, count)
    v = rng.uniform(0.0, intr.height, count)
    z = rng.uniform(0.5, max_depth, count)
    x = (u - intr.cx) * z / intr.fx
    y = (v - intr.cy) * z / intr.fy
    return np.stack([x, y, z], axis=1)


class TestRigidTransform:
    """刚体变换测试类"""

    def test_identity_and_translation(self):
        """测试单位变换与纯平移"""
        assert np.allclose(RigidTransform.identity().apply([1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])
        shift = RigidTransform.translation([0.0, 0.0, -5.0])
        assert np.allclose(shift.apply([0.0, 0.0, 5.0]), [0.0, 0.0, 0.0])

    def test_inverse_roundtrip(self, rng):
        """测试逆变换的逆等于原变换"""
        for _ in range(20):
            t = RigidTransform.random(rng)
            assert np.max(np.abs(t.inverse().inverse().matrix - t.matrix)) <= 1e-9
            assert t.compose(t.inverse()).allclose(RigidTransform.identity(), atol=1e-9)

    def test_from_euler(self):
        """测试欧拉角构造：绕 z 轴 90°"""
        t = RigidTransform.from_euler("z", 90.0, translation=(1.0, 0.0, 0.0), degrees=True)
        assert np.allclose(t.apply([1.0, 0.0, 0.0]), [1.0, 1.0, 0.0])

    def test_rejects_non_orthonormal(self):
        """测试非正交旋转块"""
        m = np.eye(4)
        m[0, 0] = 1.1
        with pytest.raises(CalibrationError):
            RigidTransform(m)

    def test_rejects_reflection(self):
        """测试行列式为 -1 的旋转块"""
        m = np.diag([1.0, 1.0, -1.0, 1.0])
        with pytest.raises(CalibrationError):
            RigidTransform(m)

    def test_rejects_bad_bottom_row(self):
        """测试最后一行不是 [0, 0, 0, 1]"""
        m = np.eye(4)
        m[3, 0] = 1e-3
        with pytest.raises(CalibrationError):
            RigidTransform(m)

    def test_rejects_degenerate(self):
        """测试退化矩阵"""
        with pytest.raises(CalibrationError):
            lidar_to_camera([[1.0, 2.0, 3.0]], np.zeros((4, 4)), np.eye(4))

    def test_matrix_read_only(self):
        """测试矩阵只读"""
        t = RigidTransform.identity()
        with pytest.raises(ValueError):
            t.matrix[0, 3] = 1.0


class TestLidarToCamera:
    """激光雷达到相机坐标变换测试类"""

    def test_identity(self):
        """测试单位外参"""
        out = lidar_to_camera([[1.0, 2.0, 3.0]], np.eye(4), np.eye(4))
        assert np.allclose(out, [[1.0, 2.0, 3.0]])

    def test_translation_cancels(self):
        """测试相机平移抵消"""
        e_k = RigidTransform.translation([0.0, 0.0, -5.0])
        out = lidar_to_camera([[0.0, 0.0, 5.0]], RigidTransform.identity(), e_k)
        assert np.allclose(out, [[0.0, 0.0, 0.0]])

    def test_scalar_matrix_chain(self, rng):
        """测试与标量矩阵链乘一致"""
        for _ in range(10):
            e_p = RigidTransform.random(rng)
            e_k = RigidTransform.random(rng)
            points = rng.uniform(-50.0, 50.0, size=(20, 3))
            chain = scalar_matmul(e_k.to_list(), e_p.inverse().to_list())
            expected = np.array([scalar_apply(chain, p) for p in points])
            assert np.allclose(lidar_to_camera(points, e_p, e_k), expected, atol=1e-9)

    def test_order_and_length(self, rng):
        """测试输出长度与顺序"""
        points = rng.normal(size=(7, 3))
        out = lidar_to_camera(points, RigidTransform.identity(), RigidTransform.identity())
        assert out.shape == (7, 3)
        assert np.array_equal(out, points)

    def test_composition_with_camera_to_vehicle(self, rng):
        """测试先到相机再回车体等价于一次 E_P⁻¹"""
        e_p = RigidTransform.random(rng)
        e_k = RigidTransform.random(rng)
        points = rng.uniform(-30.0, 30.0, size=(200, 3))
        round_trip = camera_to_vehicle(lidar_to_camera(points, e_p, e_k), e_k)
        assert np.max(np.abs(round_trip - lidar_to_vehicle(points, e_p))) <= 1e-9


class TestCameraIntrinsics:
    """相机内参测试类"""

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(fx=0.0, fy=1.0, cx=1.0, cy=1.0, width=4, height=4),
            dict(fx=1.0, fy=-1.0, cx=1.0, cy=1.0, width=4, height=4),
            dict(fx=1.0, fy=1.0, cx=4.0, cy=1.0, width=4, height=4),
            dict(fx=1.0, fy=1.0, cx=1.0, cy=-0.5, width=4, height=4),
            dict(fx=1.0, fy=1.0, cx=0.0, cy=0.0, width=0, height=4),
        ],
    )
    def test_invalid(self, kwargs):
        """测试非法内参"""
        with pytest.raises(CalibrationError):
            CameraIntrinsics(**kwargs)

    def test_matrix_inverse(self, intrinsics):
        """测试内参矩阵闭式逆"""
        assert np.allclose(intrinsics.matrix @ intrinsics.inverse_matrix, np.eye(3))

    def test_from_fov(self):
        """测试由视场角构造"""
        intr = CameraIntrinsics.from_fov(352, 128, math.radians(70.0))
        assert intr.cx == 176.0 and intr.cy == 64.0
        assert intr.horizontal_fov == pytest.approx(math.radians(70.0))

    def test_rig_requires_camera(self):
        """测试空相机配置"""
        with pytest.raises(CalibrationError):
            CameraRig(cameras=[])


class TestProjectToPixels:
    """像素投影测试类"""

    def test_optical_axis(self, intrinsics):
        """测试光轴上的点投影到主点"""
        proj = project_to_pixels([[0.0, 0.0, 7.0]], intrinsics)
        assert np.allclose(proj.uv, [[intrinsics.cx, intrinsics.cy]])
        assert np.allclose(proj.depth, [7.0])

    def test_direct_substitution(self):
        """测试直接代入投影公式"""
        intr = CameraIntrinsics(fx=100.0, fy=100.0, cx=50.0, cy=50.0, width=101, height=101)
        proj = project_to_pixels([[1.0, 0.0, 2.0]], intr)
        assert np.allclose(proj.uv, [[100.0, 50.0]])
        assert np.allclose(proj.depth, [2.0])

    def test_filters_and_source_index(self, intrinsics):
        """测试丢弃相机后方与画面外的点并保留源下标"""
        points = [
            [0.0, 0.0, -1.0],
            [0.0, 0.0, 5.0],
            [0.0, 0.0, Z_EPSILON],
            [100.0, 0.0, 1.0],
            [0.1, 0.1, 2.0],
        ]
        proj = project_to_pixels(points, intrinsics)
        assert proj.source_index.tolist() == [1, 4]

    def test_scalar_oracle(self, rng, intrinsics):
        """测试与逐点标量实现的保留集合一致"""
        points = np.column_stack(
            [rng.uniform(-20, 20, 1000), rng.uniform(-20, 20, 1000), rng.uniform(-5, 30, 1000)]
        )
        proj = project_to_pixels(points, intrinsics)
        expected = {}
        for i, p in enumerate(points):
            result = scalar_project(p, intrinsics)
            if result is not None:
                expected[i] = result
        assert proj.source_index.tolist() == sorted(expected)
        for j, i in enumerate(proj.source_index):
            assert np.allclose([proj.u[j], proj.v[j], proj.depth[j]], expected[i])

    def test_output_bounds(self, rng, intrinsics):
        """测试输出始终在图像范围内"""
        proj = project_to_pixels(rng.normal(scale=20.0, size=(5000, 3)), intrinsics)
        assert np.all((proj.u >= 0) & (proj.u < intrinsics.width))
        assert np.all((proj.v >= 0) & (proj.v < intrinsics.height))
        assert np.all(proj.depth > Z_EPSILON)

    def test_empty(self, intrinsics):
        """测试空输入"""
        assert len(project_to_pixels(np.empty((0, 3)), intrinsics)) == 0


class TestBackProjection:
    """反投影测试类"""

    def test_unit_intrinsics(self):
        """测试单位内参"""
        intr = CameraIntrinsics(fx=1.0, fy=1.0, cx=0.0, cy=0.0, width=10, height=10)
        assert back_project_pixel(3.0, 4.0, 2.0, intr) == Vec3(6.0, 8.0, 2.0)

    def test_principal_point(self, intrinsics):
        """测试主点射线"""
        p = back_project_pixel(intrinsics.cx, intrinsics.cy, 3.5, intrinsics)
        assert p == Vec3(0.0, 0.0, 3.5)

    @pytest.mark.parametrize("delta", [0.0, -1.0, float("nan")])
    def test_invalid_depth(self, intrinsics, delta):
        """测试非正深度"""
        with pytest.raises(InvalidDepthError):
            back_project_pixel(1.0, 1.0, delta, intrinsics)
        with pytest.raises(InvalidDepthError):
            back_project_pixels([1.0], [1.0], [delta], intrinsics)

    def test_batch_matches_scalar(self, rng, intrinsics):
        """测试批量反投影与单点版本逐元素一致"""
        u = rng.uniform(0, 100, 50)
        v = rng.uniform(0, 80, 50)
        d = rng.uniform(1, 40, 50)
        batch = back_project_pixels(u, v, d, intrinsics)
        for i in range(50):
            single = back_project_pixel(u[i], v[i], d[i], intrinsics)
            assert np.allclose(batch[i], single.as_array())

    def test_round_trip(self, rng, intrinsics):
        """测试投影后反投影恢复原点"""
        points = frustum_points(rng, intrinsics, 1000)
        proj = project_to_pixels(points, intrinsics)
        assert len(proj) == 1000
        restored = back_project_pixels(proj.u, proj.v, proj.depth, intrinsics)
        assert np.max(np.abs(restored - points[proj.source_index])) <= 1e-6

    def test_camera_to_vehicle_identity(self):
        """测试单位外参下坐标不变"""
        assert np.allclose(camera_to_vehicle([1.0, -2.0, 3.0], np.eye(4)), [1.0, -2.0, 3.0])

    def test_camera_to_vehicle_scalar_solve(self, rng):
        """测试与 4x4 线性方程组求解一致"""
        e_k = RigidTransform.random(rng)
        points = rng.normal(size=(30, 3))
        homogeneous = np.column_stack([points, np.ones(30)])
        expected = np.linalg.solve(e_k.matrix, homogeneous.T).T[:, :3]
        assert np.allclose(camera_to_vehicle(points, e_k), expected, atol=1e-9)


class TestFullChainPerformance:
    """大规模往返测试类"""

    @pytest.mark.performance
    def test_million_point_round_trip(self):
        """测试 10^6 个视锥内点完整链路往返，误差 1e-6 m 内且 5 秒内完成"""
        rng = np.random.default_rng(7)
        intr = CameraIntrinsics.from_fov(352, 128, math.radians(70.0))
        e_p = RigidTransform.random(rng, max_translation=2.0)
        e_k = RigidTransform.random(rng, max_translation=2.0)
        mount = CameraMount("CAM", intr, e_k)
        points_cam = frustum_points(rng, intr, 1_000_000)
        points_lidar = e_p.apply(camera_to_vehicle(points_cam, mount.extrinsics))

        start = time.perf_counter()
        cam = lidar_to_camera(points_lidar, e_p, e_k)
        proj = project_to_pixels(cam, intr)
        restored = back_project_pixels(proj.u, proj.v, proj.depth, intr)
        vehicle = camera_to_vehicle(restored, e_k)
        lidar_again = e_p.apply(vehicle)
        elapsed = time.perf_counter() - start

        kept = proj.source_index
        assert kept.size >= 999_000
        assert np.max(np.abs(lidar_again - points_lidar[kept])) <= 1e-6
        assert elapsed < 5.0


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
