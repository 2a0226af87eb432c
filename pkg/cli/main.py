"""
命令行入口

    lapt simulate   生成合成样本目录
    lapt pipeline   对样本运行投影流水线
    lapt eval       逐类 IoU 评估
    lapt bench      延迟与 FPS 测试
    lapt ablate     消融变体对比
    lapt visualize  栅格渲染为 PNG

退出码：0 成功；1 参数或数据校验失败；2 文件读写失败。
"""

import argparse
import sys
from typing import List, Optional, Sequence, Tuple

from config.config_loader import ConfigLoader
from config.logger import setup_logger
from pipeline.settings import FEATURE_SOURCES, variant_names
from sim.scene import LAYOUTS
from utils.errors import LaptIOError, ValidationError

from . import commands

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2

DEFAULT_ABLATION_VARIANTS = ("lapt", "lapt-fpn", "lapt-pp", "lapt-fpn-pp")


class UsageError(ValidationError):
    """命令行用法错误"""


class LaptArgumentParser(argparse.ArgumentParser):
    """用法错误抛出 UsageError，而不是直接以退出码 2 结束进程"""

    def error(self, message: str) -> None:
        raise UsageError(f"{self.prog}: {message}")


def parse_scales(value: str) -> Tuple[int, ...]:
    """'8,16' -> (8, 16)"""
    try:
        scales = tuple(int(part) for part in value.split(",") if part.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"无效的尺度列表: {value!r}") from exc
    if not scales or any(s < 1 for s in scales):
        raise argparse.ArgumentTypeError(f"尺度必须为正整数: {value!r}")
    return scales


def positive_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"需要整数: {value!r}") from exc
    if number < 1:
        raise argparse.ArgumentTypeError(f"需要正整数: {value!r}")
    return number


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML 配置文件（只需写出要覆盖的键）")
    parser.add_argument("--log-level", help="日志级别，覆盖配置与 LAPT_LOG_LEVEL")
    parser.add_argument("--workers", type=positive_int, help="线程数，覆盖配置与 LAPT_WORKERS")


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--variant", help=f"消融变体，例如 {', '.join(variant_names()[:4])}")
    parser.add_argument("--scales", type=parse_scales, help="特征下采样因子，例如 16 或 8,16")
    parser.add_argument("--fusion", choices=("sum", "concat", "maxpool"), help="模态融合方式")
    parser.add_argument("--lidar-bev", action="store_true", help="启用激光雷达 BEV 分支")
    parser.add_argument("--ms-b", action="store_true", help="最大尺度投影到半分辨率栅格后上采样")
    parser.add_argument("--threshold", type=float, help="二值化阈值")
    parser.add_argument("--features", choices=FEATURE_SOURCES, help="特征来源")


def build_parser() -> argparse.ArgumentParser:
    parser = LaptArgumentParser(
        prog="lapt", description="激光雷达辅助透视变换（LAPT）BEV 投影流水线"
    )
    sub = parser.add_subparsers(dest="command", parser_class=LaptArgumentParser)
    sub.required = True

    p = sub.add_parser("simulate", help="生成合成样本目录")
    _add_common(p)
    p.add_argument("--seed", type=int, help="场景随机种子")
    p.add_argument("--out", required=True, help="输出样本目录")
    p.add_argument("--rig", help="标定文件（默认使用六相机环视配置）")
    p.add_argument("--vehicles", type=int, help="车辆数量")
    p.add_argument("--humans", type=int, help="行人数量")
    p.add_argument("--movable", type=int, help="可移动障碍物数量")
    p.add_argument("--layout", choices=LAYOUTS, help="地面布局")
    p.add_argument("--scales", type=parse_scales, help="写出特征张量时使用的下采样因子")
    p.add_argument("--write-features", action="store_true", help="同时写出 RGB 池化特征张量")
    p.set_defaults(handler=commands.cmd_simulate)

    p = sub.add_parser("pipeline", help="对样本运行投影流水线")
    _add_common(p)
    _add_pipeline_flags(p)
    p.add_argument("--sample", required=True, help="样本目录")
    p.add_argument("--out", required=True, help="输出目录")
    p.add_argument("--stats", action="store_true", help="统计各尺度投影点数与非零单元数")
    p.set_defaults(handler=commands.cmd_pipeline)

    p = sub.add_parser("eval", help="逐类 IoU 评估")
    _add_common(p)
    p.add_argument("--pred", required=True, help="预测栅格文件或含 pred.grid 的目录")
    p.add_argument("--gt", required=True, help="真值栅格文件或含 gt.grid 的目录")
    p.add_argument("--out", help="JSON lines 输出文件")
    p.set_defaults(handler=commands.cmd_eval)

    p = sub.add_parser("bench", help="延迟与 FPS 测试")
    _add_common(p)
    _add_pipeline_flags(p)
    p.add_argument("--sample", required=True, help="样本目录")
    p.add_argument("--iterations", type=int, help="计时迭代次数")
    p.add_argument("--warmup", type=int, help="预热次数")
    p.add_argument("--out", help="JSON lines 输出文件")
    p.add_argument("--quiet", action="store_true", help="不显示进度条")
    p.set_defaults(handler=commands.cmd_bench)

    p = sub.add_parser("ablate", help="消融变体对比")
    _add_common(p)
    p.add_argument("--samples", nargs="+", required=True, help="样本目录（需含 gt.grid）")
    p.add_argument(
        "--variants",
        nargs="+",
        default=list(DEFAULT_ABLATION_VARIANTS),
        help=f"变体列表，可选: {', '.join(variant_names())}",
    )
    p.add_argument("--threshold", type=float, help="二值化阈值")
    p.add_argument(
        "--features", choices=FEATURE_SOURCES, default="rgb", help="特征来源（默认 rgb）"
    )
    p.add_argument("--out", help="JSON lines 输出文件")
    p.set_defaults(handler=commands.cmd_ablate)

    p = sub.add_parser("visualize", help="栅格渲染为 PNG")
    _add_common(p)
    p.add_argument("--grid", required=True, help=".grid 文件")
    p.add_argument("--out", required=True, help="输出 PNG")
    p.add_argument("--title", help="图标题")
    p.set_defaults(handler=commands.cmd_visualize)
    return parser


def _configure(args: argparse.Namespace) -> ConfigLoader:
    loader = ConfigLoader(args.config) if args.config else ConfigLoader()
    loader.apply_env_overrides()
    if args.log_level:
        loader.set("logging.level", args.log_level)
    setup_logger(
        level=loader.get("logging.level", "INFO"),
        log_dir=loader.get("logging.log_dir", "logs"),
        console_output=bool(loader.get("logging.console_output", True)),
        file_output=bool(loader.get("logging.file_output", False)),
    )
    return loader


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    命令行主函数

    参数:
        argv: 参数列表，None 时使用 sys.argv[1:]

    返回:
        退出码
    """
    arguments: List[str] = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(arguments)
        loader = _configure(args)
        return int(args.handler(args, loader))
    except ValidationError as exc:
        print(f"错误: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (LaptIOError, OSError) as exc:
        print(f"I/O 错误: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"错误: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
