"""
命令行测试

通过 main(argv) 调用各子命令，检查输出文件、退出码与可复现性。
"""

import hashlib
import json
import shutil

import numpy as np
import pandas as pd
import pytest

from bev import GridSpec
from cli import EXIT_IO, EXIT_OK, EXIT_VALIDATION, build_parser, main
from dataio import SampleDir, read_grid, read_semantic_grid, write_grid
from evaluation import SemanticGrid

PNG_SIGNATURE = b'\x89PNG\r\n\x1a\n'


def simulate(out, seed=7, *extra):
    return main(['simulate', '--seed', str(seed), '--out', str(out), '--log-level', 'WARNING',
                 *extra])


def tree_digest(root):
    """目录下全部文件（相对路径与内容）的 SHA-256"""
    digest = hashlib.sha256()
    for path in sorted(root.rglob('*')):
        if path.is_file():
            digest.update(str(path.relative_to(root)).encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()


@pytest.fixture(scope='module')
def cli_sample(tmp_path_factory):
    """命令行生成的样本目录（含特征张量）"""
    out = tmp_path_factory.mktemp('cli') / 'sample'
    assert simulate(out, 7, '--write-features') == EXIT_OK
    return out


@pytest.fixture(scope='module')
def pipeline_out(cli_sample, tmp_path_factory):
    """默认参数的流水线输出目录"""
    out = tmp_path_factory.mktemp('pipeline_out')
    code = main(['pipeline', '--sample', str(cli_sample), '--out', str(out),
                 '--variant', 'lapt-fpn', '--log-level', 'WARNING'])
    assert code == EXIT_OK
    return out


class TestParser:
    """参数解析测试类"""

    def test_subcommands(self):
        """测试全部子命令可解析"""
        parser = build_parser()
        args = parser.parse_args(['pipeline', '--sample', 's', '--out', 'o', '--scales', '8,16'])
        assert args.scales == (8, 16)
        args = parser.parse_args(['ablate', '--samples', 'a', 'b'])
        assert args.features == 'rgb'
        assert args.variants == ['lapt', 'lapt-fpn', 'lapt-pp', 'lapt-fpn-pp']

    def test_usage_errors(self, capsys):
        """测试用法错误返回 1"""
        assert main([]) == EXIT_VALIDATION
        assert main(['pipeline', '--sample', 's']) == EXIT_VALIDATION
        assert main(['pipeline', '--sample', 's', '--out', 'o', '--scales', '0']) == EXIT_VALIDATION
        assert main(['simulate', '--out', 'o', '--layout', 'forest']) == EXIT_VALIDATION
        assert '错误' in capsys.readouterr().err


class TestSimulate:
    """simulate 命令测试类"""

    def test_outputs(self, cli_sample, capsys):
        """测试样本目录内容"""
        sample = SampleDir(cli_sample)
        rig = sample.validate()
        assert len(rig) == 6
        assert sample.has_semantics()
        assert sample.has_ground_truth()
        assert sample.annotations_path.exists()
        for k in range(6):
            assert sample.depth_path(k).exists()
            for factor in (8, 16):
                assert sample.feature_path(k, factor).exists()

    def test_summary_and_reproducible(self, cli_sample, tmp_path, capsys):
        """测试同一种子生成逐位相同的样本"""
        out = tmp_path / 'again'
        assert simulate(out, 7, '--write-features') == EXIT_OK
        summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert summary['seed'] == 7
        assert summary['cameras'] == 6
        for path in sorted(cli_sample.rglob('*')):
            if path.is_file():
                twin = out / path.relative_to(cli_sample)
                assert twin.read_bytes() == path.read_bytes(), path.name

    def test_counts(self, tmp_path, capsys):
        """测试物体数量参数"""
        out = tmp_path / 'empty'
        code = simulate(out, 1, '--vehicles', '0', '--humans', '0', '--movable', '0',
                        '--layout', 'plaza')
        assert code == EXIT_OK
        assert json.loads(capsys.readouterr().out.strip().splitlines()[-1])['objects'] == 0
        assert SampleDir(out).read_annotations().cuboids == []

    def test_tree_digest_stable(self, tmp_path):
        """测试两次独立运行的输出目录摘要相同，换种子后不同"""
        digests = []
        for name, seed in (('a', 3), ('b', 3), ('c', 4)):
            out = tmp_path / name
            assert simulate(out, seed) == EXIT_OK
            digests.append(tree_digest(out))
        assert digests[0] == digests[1]
        assert digests[0] != digests[2]


class TestPipelineCommand:
    """pipeline 命令测试类"""

    def test_outputs(self, pipeline_out):
        """测试预测栅格、BEV 与计时记录"""
        pred = read_semantic_grid(pipeline_out / 'pred.grid')
        assert pred.class_ids == (1, 2, 3, 4, 5)
        assert read_grid(pipeline_out / 'bev.grid').channels == 5
        timings = pd.read_json(pipeline_out / 'timings.jsonl', lines=True)
        assert 'total' in set(timings['stage'])

    def test_workers_bit_identical(self, cli_sample, pipeline_out, tmp_path):
        """测试多线程输出与单线程逐位相同"""
        for workers in ('1', '4'):
            out = tmp_path / f'w{workers}'
            code = main(['pipeline', '--sample', str(cli_sample), '--out', str(out),
                         '--variant', 'lapt-fpn', '--workers', workers, '--log-level', 'WARNING'])
            assert code == EXIT_OK
            for name in ('pred.grid', 'bev.grid'):
                assert (out / name).read_bytes() == (pipeline_out / name).read_bytes()

    def test_stats(self, cli_sample, tmp_path, capsys):
        """测试统计输出"""
        code = main(['pipeline', '--sample', str(cli_sample), '--out', str(tmp_path),
                     '--features', 'rgb', '--lidar-bev', '--fusion', 'maxpool', '--ms-b',
                     '--stats', '--log-level', 'WARNING'])
        assert code == EXIT_OK
        assert 'nonzero_cells=' in capsys.readouterr().out

    def test_incompatible_fusion(self, cli_sample, tmp_path):
        """测试语义特征与 sum 融合返回 1"""
        code = main(['pipeline', '--sample', str(cli_sample), '--out', str(tmp_path),
                     '--variant', 'lapt-pp', '--log-level', 'WARNING'])
        assert code == EXIT_VALIDATION

    def test_unknown_variant(self, cli_sample, tmp_path):
        """测试未知变体返回 1"""
        code = main(['pipeline', '--sample', str(cli_sample), '--out', str(tmp_path),
                     '--variant', 'lapt-huge', '--log-level', 'WARNING'])
        assert code == EXIT_VALIDATION

    def test_missing_sample(self, tmp_path):
        """测试样本目录不存在返回 2"""
        code = main(['pipeline', '--sample', str(tmp_path / 'nope'), '--out', str(tmp_path),
                     '--log-level', 'WARNING'])
        assert code == EXIT_IO

    def test_malformed_calibration(self, cli_sample, tmp_path):
        """测试标定文件损坏返回 2"""
        broken = tmp_path / 'broken'
        shutil.copytree(cli_sample, broken)
        (broken / 'calibration.json').write_text('{"cameras": [', encoding='utf-8')
        code = main(['pipeline', '--sample', str(broken), '--out', str(tmp_path / 'o'),
                     '--log-level', 'WARNING'])
        assert code == EXIT_IO


class TestEvalCommand:
    """eval 命令测试类"""

    def test_identical_grids(self, pipeline_out, tmp_path):
        """测试预测与自身比较时 IoU 全为 1"""
        out = tmp_path / 'iou.jsonl'
        code = main(['eval', '--pred', str(pipeline_out), '--gt', str(pipeline_out / 'pred.grid'),
                     '--out', str(out), '--log-level', 'WARNING'])
        assert code == EXIT_OK
        frame = pd.read_json(out, lines=True)
        assert list(frame['class_name'])[-1] == 'mean'
        assert (frame['iou'] == 1.0).all()

    @pytest.mark.parametrize('case, expected', [('disjoint', 0.0), ('half', 0.5)])
    def test_fixture_grids(self, tmp_path, case, expected):
        """测试不相交与一半重叠的栅格文件"""
        spec = GridSpec()
        pred = np.zeros((2,) + spec.shape, dtype=np.uint8)
        gt = np.zeros_like(pred)
        if case == 'disjoint':
            pred[0, :100], gt[0, 100:] = 1, 1
            pred[1, :, :50], gt[1, :, 50:100] = 1, 1
        else:
            pred[0, :, :100], gt[0] = 1, 1
            pred[1, :100], gt[1, :50] = 1, 1
        write_grid(tmp_path / 'pred.grid', SemanticGrid(pred, (1, 3), spec))
        write_grid(tmp_path / 'gt.grid', SemanticGrid(gt, (1, 3), spec))
        out = tmp_path / 'iou.jsonl'
        code = main(['eval', '--pred', str(tmp_path / 'pred.grid'),
                     '--gt', str(tmp_path / 'gt.grid'), '--out', str(out),
                     '--log-level', 'WARNING'])
        assert code == EXIT_OK
        frame = pd.read_json(out, lines=True)
        assert list(frame['class_name']) == ['drivable_area', 'vehicle', 'mean']
        assert frame['iou'].tolist() == [expected, expected, expected]

    def test_against_ground_truth(self, cli_sample, pipeline_out, capsys):
        """测试与真值比较输出逐类 IoU"""
        code = main(['eval', '--pred', str(pipeline_out), '--gt', str(cli_sample),
                     '--log-level', 'WARNING'])
        assert code == EXIT_OK
        assert 'drivable_area' in capsys.readouterr().out

    def test_missing_grid(self, tmp_path):
        """测试栅格文件不存在返回 2"""
        code = main(['eval', '--pred', str(tmp_path), '--gt', str(tmp_path),
                     '--log-level', 'WARNING'])
        assert code == EXIT_IO


class TestBenchCommand:
    """bench 命令测试类"""

    def test_bench(self, cli_sample, tmp_path, capsys):
        """测试计时汇总输出"""
        out = tmp_path / 'bench.jsonl'
        code = main(['bench', '--sample', str(cli_sample), '--iterations', '2', '--warmup', '0',
                     '--quiet', '--out', str(out), '--log-level', 'WARNING'])
        assert code == EXIT_OK
        assert 'FPS=' in capsys.readouterr().out
        frame = pd.read_json(out, lines=True)
        assert {'stage', 'mean_ms', 'p50_ms', 'p95_ms', 'fps'} <= set(frame.columns)
        assert (frame['samples'] == 2).all()

    def test_invalid_iterations(self, cli_sample):
        """测试迭代次数为零返回 1"""
        code = main(['bench', '--sample', str(cli_sample), '--iterations', '0',
                     '--log-level', 'WARNING'])
        assert code == EXIT_VALIDATION


class TestAblateCommand:
    """ablate 命令测试类"""

    def test_ablate(self, cli_sample, tmp_path):
        """测试变体对比记录"""
        out = tmp_path / 'ablate.jsonl'
        code = main(['ablate', '--samples', str(cli_sample), '--variants', 'lapt', 'lapt-fpn-pp',
                     '--out', str(out), '--log-level', 'WARNING'])
        assert code == EXIT_OK
        frame = pd.read_json(out, lines=True)
        assert set(frame['variant']) == {'lapt', 'lapt-fpn-pp'}
        summary = frame[frame['kind'] == 'summary']
        assert (summary['nonzero_cells'] > 0).all()

    def test_requires_ground_truth(self, cli_sample, tmp_path):
        """测试样本缺少真值返回 1"""
        copy = tmp_path / 'no_gt'
        shutil.copytree(cli_sample, copy)
        (copy / 'gt.grid').unlink()
        code = main(['ablate', '--samples', str(copy), '--variants', 'lapt',
                     '--log-level', 'WARNING'])
        assert code == EXIT_VALIDATION


class TestVisualizeCommand:
    """visualize 命令测试类"""

    @pytest.mark.parametrize('name', ['pred.grid', 'bev.grid'])
    def test_png(self, pipeline_out, tmp_path, name):
        """测试语义栅格与特征栅格渲染为 PNG"""
        out = tmp_path / f'{name}.png'
        code = main(['visualize', '--grid', str(pipeline_out / name), '--out', str(out),
                     '--log-level', 'WARNING'])
        assert code == EXIT_OK
        assert out.read_bytes()[:8] == PNG_SIGNATURE

    def test_not_a_grid(self, cli_sample, tmp_path):
        """测试输入不是栅格文件返回 2"""
        code = main(['visualize', '--grid', str(cli_sample / 'cloud.bin'),
                     '--out', str(tmp_path / 'x.png'), '--log-level', 'WARNING'])
        assert code == EXIT_IO


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
