"""
数据读写模块测试

点云、栅格、深度、特征、图像、标定与标注文件格式，以及样本目录。
"""

import hashlib
import json
import struct

import numpy as np
import pytest

from bev import BevGrid, GridSpec
from dataio import (
    CLOUD_MAGIC,
    Annotations,
    SampleDir,
    encode_cloud,
    read_annotations,
    read_calibration,
    read_cloud,
    read_depth,
    read_features,
    read_grid,
    read_image,
    read_rgb_image,
    read_semantic_grid,
    read_semantic_image,
    rig_to_dict,
    write_annotations,
    write_calibration,
    write_cloud,
    write_depth,
    write_features,
    write_grid,
    write_image,
)
from depth import DepthImage
from evaluation import Cuboid, Polygon2D, SemanticGrid
from features import FeatureMap, Image, SemanticImage
from sim import default_rig, generate_scene
from utils.errors import CalibrationError, FormatError, LaptIOError, ValidationError


def f32(array):
    """取单精度可表示的值，保证读写后逐位相等"""
    return np.asarray(array, dtype=np.float32).astype(np.float64)


TWO_CAMERA_CALIBRATION = {
    "format": "lapt-calibration",
    "version": 1,
    "lidar": {"extrinsics": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, -1.8], [0, 0, 0, 1]]},
    "cameras": [
        {
            "name": "FRONT",
            "intrinsics": {"fx": 500.0, "fy": 510.0, "cx": 320.0, "cy": 240.0,
                           "width": 640, "height": 480},
            "extrinsics": [[0, -1, 0, 0], [0, 0, -1, 1.5], [1, 0, 0, 0], [0, 0, 0, 1]],
        },
        {
            "name": "BACK",
            "intrinsics": {"fx": 400.0, "fy": 400.0, "cx": 319.5, "cy": 239.5,
                           "width": 640, "height": 480},
            "extrinsics": [[0, 1, 0, 0], [0, 0, -1, 1.5], [-1, 0, 0, 0], [0, 0, 0, 1]],
        },
    ],
}


class TestCloudFormat:
    """点云文件测试类"""

    def test_empty_cloud(self, tmp_path):
        """测试空点云为 12 字节"""
        path = tmp_path / 'empty.bin'
        write_cloud(path, np.empty((0, 3)))
        assert path.read_bytes() == CLOUD_MAGIC + b'\x00\x00\x00\x00'
        assert read_cloud(path).shape == (0, 3)

    def test_single_point_bytes(self):
        """测试单点 (1, 2, 3) 的字节布局"""
        payload = encode_cloud([[1.0, 2.0, 3.0]])
        assert len(payload) == 24
        expected = b'LAPTPC01'.hex() + '01000000' + '0000803f' + '00000040' + '00004040'
        assert payload.hex() == expected

    def test_round_trip_hash(self, tmp_path, rng):
        """测试 10^5 个点读写后载荷逐位相同"""
        cloud = f32(rng.uniform(-70, 70, size=(100_000, 3)))
        path = tmp_path / 'cloud.bin'
        write_cloud(path, cloud)
        restored = read_cloud(path)
        assert np.array_equal(restored, cloud)
        assert hashlib.sha256(encode_cloud(restored)).hexdigest() == hashlib.sha256(
            path.read_bytes()
        ).hexdigest()

    def test_truncated_and_bad_magic(self, tmp_path):
        """测试截断文件与错误魔数"""
        path = tmp_path / 'bad.bin'
        path.write_bytes(encode_cloud([[1.0, 2.0, 3.0]])[:-2])
        with pytest.raises(FormatError):
            read_cloud(path)
        path.write_bytes(b'NOTCLOUD' + b'\x00' * 4)
        with pytest.raises(FormatError):
            read_cloud(path)

    @pytest.mark.parametrize('bad', [float('nan'), float('inf'), float('-inf')])
    def test_non_finite_coordinates(self, tmp_path, bad):
        """测试坐标含 NaN 或 inf 的点云"""
        path = tmp_path / 'bad.bin'
        payload = struct.pack('<6f', 1.0, 2.0, 3.0, 4.0, bad, 6.0)
        path.write_bytes(CLOUD_MAGIC + struct.pack('<I', 2) + payload)
        with pytest.raises(FormatError):
            read_cloud(path)

    def test_missing_file(self, tmp_path):
        """测试文件不存在"""
        with pytest.raises(LaptIOError):
            read_cloud(tmp_path / 'missing.bin')


class TestGridFormat:
    """栅格文件测试类"""

    def test_single_cell_bytes(self, tmp_path):
        """测试单单元 BEV 栅格的字节布局"""
        spec = GridSpec(x_extent=1.0, y_extent=1.0, resolution=1.0)
        path = tmp_path / 'one.grid'
        write_grid(path, BevGrid(np.array([[[2.5]]]), spec))
        expected = b'LAPTBEV1' + struct.pack('<3I5f', 1, 1, 1, 1.0, 1.0, 1.0, -2.0, 4.0)
        expected += struct.pack('<f', 2.5)
        assert path.read_bytes() == expected

    def test_bev_round_trip(self, tmp_path, rng):
        """测试 BEV 栅格读写"""
        spec = GridSpec()
        grid = BevGrid(f32(rng.random((3,) + spec.shape)), spec)
        path = tmp_path / 'bev.grid'
        write_grid(path, grid)
        assert read_grid(path) == grid

    def test_semantic_round_trip(self, tmp_path, rng):
        """测试语义栅格读写（含类别列表）"""
        spec = GridSpec(x_extent=20.0, y_extent=30.0, resolution=0.5)
        data = (rng.random((2,) + spec.shape) > 0.7).astype(np.uint8)
        grid = SemanticGrid(data, (3, 5), spec)
        path = tmp_path / 'sem.grid'
        write_grid(path, grid)
        restored = read_grid(path)
        assert isinstance(restored, SemanticGrid)
        assert restored == grid
        assert read_semantic_grid(path).class_ids == (3, 5)

    def test_semantic_reader_rejects_bev(self, tmp_path):
        """测试读取语义栅格时拒绝特征栅格"""
        path = tmp_path / 'bev.grid'
        write_grid(path, BevGrid.zeros(GridSpec(2.0, 2.0, 1.0), 1))
        with pytest.raises(FormatError):
            read_semantic_grid(path)

    def test_length_mismatch(self, tmp_path):
        """测试数据长度与头部不一致"""
        path = tmp_path / 'bad.grid'
        write_grid(path, BevGrid.zeros(GridSpec(2.0, 2.0, 1.0), 1))
        path.write_bytes(path.read_bytes() + b'\x00\x00\x00\x00')
        with pytest.raises(FormatError):
            read_grid(path)


class TestDepthAndFeatures:
    """深度与特征文件测试类"""

    def test_depth_round_trip(self, tmp_path, rng):
        """测试深度图读写，空像素保持为空"""
        dense = f32(rng.uniform(1, 50, (8, 12)))
        dense[rng.random((8, 12)) < 0.6] = np.inf
        depth = DepthImage.from_dense(dense)
        path = tmp_path / 'cam0.depth'
        write_depth(path, depth)
        assert read_depth(path) == depth

    def test_depth_rejects_negative(self, tmp_path):
        """测试负深度"""
        path = tmp_path / 'bad.depth'
        path.write_bytes(b'LAPTDEP1' + struct.pack('<2I', 1, 1) + struct.pack('<f', -1.0))
        with pytest.raises(FormatError):
            read_depth(path)

    @pytest.mark.parametrize('bad', [float('-inf'), float('nan'), 0.0])
    def test_depth_rejects_invalid(self, tmp_path, bad):
        """测试 -inf、NaN 与零深度"""
        path = tmp_path / 'bad.depth'
        payload = struct.pack('<4f', 2.0, bad, np.inf, 3.5)
        path.write_bytes(b'LAPTDEP1' + struct.pack('<2I', 2, 2) + payload)
        with pytest.raises(FormatError):
            read_depth(path)

    def test_depth_positive_inf_is_empty(self, tmp_path):
        """测试 +inf 读为空像素"""
        path = tmp_path / 'ok.depth'
        payload = struct.pack('<4f', 2.0, np.inf, np.inf, 3.5)
        path.write_bytes(b'LAPTDEP1' + struct.pack('<2I', 2, 2) + payload)
        depth = read_depth(path)
        assert depth.mask.tolist() == [[True, False], [False, True]]
        assert depth.values[1, 1] == 3.5

    def test_features_round_trip(self, tmp_path, rng):
        """测试特征图读写保留尺度与相机下标"""
        fmap = FeatureMap(f32(rng.random((4, 2, 3))), 16, camera=5)
        path = tmp_path / 'cam5_s16.feat'
        write_features(path, fmap)
        restored = read_features(path)
        assert (restored.factor, restored.camera) == (16, 5)
        assert np.array_equal(restored.data, fmap.data)


class TestImageFormat:
    """图像文件测试类"""

    def test_black_round_trip(self, tmp_path):
        """测试全黑图像读写"""
        path = tmp_path / 'black.ppm'
        write_image(path, Image(np.zeros((4, 6, 3))))
        restored = read_rgb_image(path)
        assert restored.pixels.shape == (4, 6, 3)
        assert np.all(restored.pixels == 0.0)

    def test_known_bytes(self, tmp_path):
        """测试手写的 2x2 P6 与 P5 文件"""
        rgb = tmp_path / 'fixture.ppm'
        rgb.write_bytes(b'P6\n2 2\n255\n' + bytes([255, 0, 0, 0, 255, 0, 0, 0, 255, 255, 255, 255]))
        image = read_image(rgb)
        assert isinstance(image, Image)
        assert image.pixels[0, 0].tolist() == [1.0, 0.0, 0.0]
        assert image.pixels[1, 1].tolist() == [1.0, 1.0, 1.0]

        sem = tmp_path / 'fixture.pgm'
        sem.write_bytes(b'P5\n2 2\n255\n' + bytes([0, 1, 3, 5]))
        labels = read_semantic_image(sem, num_classes=5)
        assert labels.labels.tolist() == [[0, 1], [3, 5]]

    def test_random_round_trip(self, tmp_path, rng):
        """测试 8 位可表示的随机图像读写后逐位相同"""
        pixels = rng.integers(0, 256, size=(16, 24, 3)) / 255.0
        path = tmp_path / 'random.ppm'
        write_image(path, Image(pixels))
        assert read_image(path) == Image(pixels)

        labels = SemanticImage(rng.integers(0, 6, size=(16, 24)), 5)
        write_image(tmp_path / 'random.pgm', labels)
        assert read_semantic_image(tmp_path / 'random.pgm', 5) == labels

    def test_unsupported_header(self, tmp_path):
        """测试无法识别的文件头"""
        path = tmp_path / 'garbage.ppm'
        path.write_bytes(b'not an image at all')
        with pytest.raises(FormatError):
            read_image(path)

    def test_kind_mismatch(self, tmp_path):
        """测试 RGB 与语义读取函数互相拒绝"""
        path = tmp_path / 'sem.pgm'
        write_image(path, SemanticImage(np.zeros((2, 2), dtype=int)))
        with pytest.raises(FormatError):
            read_rgb_image(path)


class TestCalibration:
    """标定文件测试类"""

    def test_round_trip(self, tmp_path):
        """测试默认配置读写后结构相等"""
        rig = default_rig()
        path = tmp_path / 'calibration.json'
        write_calibration(path, rig)
        restored = read_calibration(path)

        assert len(restored) == len(rig)
        assert restored.lidar_extrinsics.allclose(rig.lidar_extrinsics, atol=1e-12)
        for a, b in zip(restored.cameras, rig.cameras):
            assert a.name == b.name
            assert a.intrinsics == b.intrinsics
            assert a.extrinsics.allclose(b.extrinsics, atol=1e-12)

        raw = json.loads(path.read_text(encoding='utf-8'))
        assert 'vehicle' in raw['frames'] and 'extrinsics' in raw['frames']

    def test_two_camera_fixture(self, tmp_path):
        """测试手写的双相机标定文件"""
        path = tmp_path / 'calibration.json'
        path.write_text(json.dumps(TWO_CAMERA_CALIBRATION), encoding='utf-8')
        rig = read_calibration(path)

        assert [m.name for m in rig.cameras] == ['FRONT', 'BACK']
        front = rig.cameras[0].intrinsics
        assert (front.fx, front.fy, front.cx, front.cy) == (500.0, 510.0, 320.0, 240.0)
        assert (front.width, front.height) == (640, 480)
        assert rig.cameras[1].intrinsics.cx == 319.5
        assert np.allclose(rig.cameras[0].center, [0.0, 0.0, 1.5])

    def test_scaled_rotation(self, tmp_path):
        """测试旋转块放大 1.1 倍"""
        data = json.loads(json.dumps(TWO_CAMERA_CALIBRATION))
        data['cameras'][0]['extrinsics'][0][1] = -1.1
        path = tmp_path / 'calibration.json'
        path.write_text(json.dumps(data), encoding='utf-8')
        with pytest.raises(CalibrationError):
            read_calibration(path)

    def test_malformed(self, tmp_path):
        """测试 JSON 格式错误与字段缺失"""
        path = tmp_path / 'calibration.json'
        path.write_text('{"cameras": [', encoding='utf-8')
        with pytest.raises(FormatError):
            read_calibration(path)
        path.write_text(json.dumps({'cameras': []}), encoding='utf-8')
        with pytest.raises(FormatError):
            read_calibration(path)

    def test_dict_format_tag(self):
        """测试字典中的格式标记"""
        data = rig_to_dict(default_rig())
        assert data['format'] == 'lapt-calibration'
        assert data['version'] == 1
        assert len(data['cameras']) == 6


class TestAnnotations:
    """标注文件测试类"""

    def test_round_trip(self, tmp_path):
        """测试长方体与多边形读写"""
        annotations = Annotations(
            cuboids=[Cuboid((1.0, 2.0, 0.8), (4.2, 1.8, 1.6), 0.3, 3)],
            polygons=[Polygon2D([[0, 0], [4, 0], [4, 3], [0, 3]], 1)],
        )
        path = tmp_path / 'annotations.json'
        write_annotations(path, annotations)
        restored = read_annotations(path)
        assert restored.cuboids == annotations.cuboids
        assert restored.polygons == annotations.polygons

    def test_invalid_geometry(self, tmp_path):
        """测试自相交多边形"""
        path = tmp_path / 'annotations.json'
        bowtie = {'vertices': [[0, 0], [1, 1], [1, 0], [0, 1]], 'class_id': 1}
        path.write_text(json.dumps({'polygons': [bowtie]}), encoding='utf-8')
        with pytest.raises(FormatError):
            read_annotations(path)


class TestSampleDir:
    """样本目录测试类"""

    @pytest.fixture
    def two_camera_sample(self, tmp_path):
        rig = default_rig(height=32, width=64, yaws_deg=(0.0, 180.0))
        images = [Image(np.zeros((32, 64, 3))), Image(np.ones((32, 64, 3)))]
        cloud = f32(np.random.default_rng(1).uniform(-10, 10, (50, 3)))
        return SampleDir(tmp_path / 'sample').write(rig=rig, images=images, cloud=cloud)

    def test_load(self, two_camera_sample):
        """测试读取样本"""
        data = two_camera_sample.load()
        assert len(data.views) == 2
        assert data.cloud.shape == (50, 3)
        assert np.all(data.views[1].image.pixels == 1.0)
        assert data.views[0].semantic is None

    def test_missing_directory(self, tmp_path):
        """测试目录不存在"""
        with pytest.raises(LaptIOError):
            SampleDir(tmp_path / 'nowhere').validate()

    def test_camera_count_mismatch(self, two_camera_sample):
        """测试图像数与相机数不一致"""
        two_camera_sample.image_path(1).unlink()
        with pytest.raises(ValidationError):
            two_camera_sample.validate()

    def test_missing_semantics(self, two_camera_sample):
        """测试要求语义图像但缺失"""
        assert not two_camera_sample.has_semantics()
        with pytest.raises(ValidationError):
            two_camera_sample.load(with_semantics=True)

    def test_image_size_mismatch(self, two_camera_sample):
        """测试图像尺寸与内参不符"""
        write_image(two_camera_sample.image_path(0), Image(np.zeros((16, 16, 3))))
        with pytest.raises(ValidationError):
            two_camera_sample.load()

    def test_write_count_mismatch(self, tmp_path):
        """测试写出时图像数与相机数不一致"""
        with pytest.raises(ValidationError):
            SampleDir(tmp_path / 's').write(default_rig(), [], np.empty((0, 3)))

    def test_simulated_sample(self, road_sample):
        """测试仿真样本的完整内容"""
        rig = road_sample.validate()
        assert len(rig) == 6
        assert road_sample.has_semantics()
        assert road_sample.has_ground_truth()
        assert road_sample.read_ground_truth().spec == GridSpec()
        assert road_sample.read_depth(0).width == 352
        assert road_sample.read_features(2, 16).camera == 2
        assert len(road_sample.read_annotations().cuboids) == len(generate_scene(3).objects)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
