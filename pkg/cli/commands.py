"""
命令实现

每个命令接收 argparse 解析结果与 ConfigLoader，返回退出码。
人读的表格打印到标准输出，机器可读的记录按 JSON lines 写入文件，
日志只写到标准错误。
"""

import argparse
import dataclasses
import json
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import pandas as pd
from tqdm import tqdm

from config.config_loader import ConfigLoader
from config.logger import get_logger
from dataio import (
    Annotations,
    SampleDir,
    read_calibration,
    read_grid,
    read_semantic_grid,
    write_grid,
)
from evaluation import IoUAccumulator, SemanticGrid
from features import CameraView, RgbFeatureProvider
from pipeline import (
    LaptPipeline,
    PipelineSettings,
    StageTimer,
    fps_from_latency,
    make_provider,
    summarize_latencies,
)
from sim import (
    CLASS_NAMES,
    PALETTE,
    LidarPattern,
    SceneParams,
    analytic_bev,
    default_rig,
    generate_scene,
    render_views,
    sample_lidar,
)
from utils.errors import InvalidArgumentError, LaptIOError, ValidationError

logger = get_logger("lapt.cli")

PRED_FILE = "pred.grid"
BEV_FILE = "bev.grid"
TIMINGS_FILE = "timings.jsonl"


def write_records(frame: pd.DataFrame, path: Optional[str]) -> None:
    """DataFrame 按 JSON lines 写出（path 为 None 时不写）"""
    if not path:
        return
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_json(path, orient="records", lines=True, force_ascii=False)
    except OSError as exc:
        raise LaptIOError(f"无法写入记录文件 {path}: {exc}") from exc


def print_table(frame: pd.DataFrame, float_format: str = "{:.4f}") -> None:
    print(frame.to_string(index=False, float_format=float_format.format))


def pipeline_settings(args: argparse.Namespace, loader: ConfigLoader) -> PipelineSettings:
    """
    配置 -> 变体 -> 显式命令行参数，依次覆盖

    异常:
        ValidationError: 参数组合无效
    """
    settings = PipelineSettings.from_config(loader)
    if getattr(args, "variant", None):
        settings = PipelineSettings.from_variant(args.variant, settings)
    changes = {}
    if getattr(args, "scales", None):
        changes["scales"] = args.scales
    if getattr(args, "fusion", None):
        changes["fusion"] = args.fusion
    if getattr(args, "lidar_bev", False):
        changes["lidar_bev"] = True
    if getattr(args, "ms_b", False):
        changes["ms_b"] = True
    if getattr(args, "threshold", None) is not None:
        changes["threshold"] = args.threshold
    if getattr(args, "features", None):
        changes["features"] = args.features
    if getattr(args, "workers", None) is not None:
        changes["workers"] = args.workers
    return settings.replace(**changes) if changes else settings


# ---------------------------------------------------------------- simulate
def cmd_simulate(args: argparse.Namespace, loader: ConfigLoader) -> int:
    """生成一个合成样本目录"""
    sim_cfg = loader.get("sim", {})
    seed = args.seed if args.seed is not None else int(sim_cfg.get("seed", 0))
    params = SceneParams.from_config(sim_cfg)
    overrides = {"vehicle": args.vehicles, "human": args.humans, "movable_object": args.movable}
    counts = {**params.counts, **{k: v for k, v in overrides.items() if v is not None}}
    params = dataclasses.replace(params, counts=counts, layout=args.layout or params.layout)

    if args.rig:
        rig = read_calibration(args.rig)
    else:
        lidar_cfg = sim_cfg.get("lidar", {})
        rig = default_rig(
            height=int(loader.get("image.height", 128)),
            width=int(loader.get("image.width", 352)),
            camera_height=float(sim_cfg.get("camera_height", 1.5)),
            horizontal_fov_deg=float(sim_cfg.get("horizontal_fov_deg", 70.0)),
            lidar_height=float(lidar_cfg.get("height", 1.84)),
        )
    settings = pipeline_settings(args, loader)
    workers = settings.workers

    scene = generate_scene(seed, params)
    views = render_views(scene, rig, workers)
    pattern = LidarPattern.from_config(sim_cfg.get("lidar", {}), seed=seed)
    cloud = sample_lidar(scene, pattern, rig.lidar_extrinsics)
    ground_truth = analytic_bev(scene, settings.grid)

    features = []
    if args.write_features:
        provider = RgbFeatureProvider(settings.scales)
        for k, view in enumerate(views):
            features.extend(provider.extract(k, CameraView(view.image, view.semantic)).maps)

    SampleDir(args.out).write(
        rig=rig,
        images=[v.image for v in views],
        cloud=cloud,
        semantics=[v.semantic for v in views],
        depths=[v.depth for v in views],
        features=features,
        annotations=Annotations(cuboids=list(scene.objects), polygons=list(scene.ground)),
        ground_truth=ground_truth,
    )
    summary = {
        "sample": str(args.out),
        "seed": seed,
        "cameras": len(rig),
        "points": int(cloud.shape[0]),
        "objects": len(scene.objects),
    }
    logger.info(f"样本已写出: {args.out}")
    print(json.dumps(summary, ensure_ascii=False))
    return 0


# ---------------------------------------------------------------- pipeline
def cmd_pipeline(args: argparse.Namespace, loader: ConfigLoader) -> int:
    """对一个样本目录运行流水线并写出预测栅格"""
    settings = pipeline_settings(args, loader)
    pipeline = LaptPipeline(settings)
    result = pipeline.run_dir(args.sample, collect_stats=args.stats)

    out = Path(args.out)
    write_grid(out / PRED_FILE, result.semantic)
    write_grid(out / BEV_FILE, result.bev)
    timings = pd.DataFrame(
        [{"stage": stage, "ms": ms} for stage, ms in result.timings.items()]
        + [{"stage": "total", "ms": sum(result.timings.values())}],
        columns=["stage", "ms"],
    )
    write_records(timings, str(out / TIMINGS_FILE))

    print_table(timings, "{:.3f}")
    if args.stats:
        stats = pd.DataFrame(
            [
                {
                    "scale": f,
                    "projected_points": result.projected_points.get(f, 0),
                    "nonzero_cells": n,
                }
                for f, n in result.scale_nonzero_cells().items()
            ]
        )
        print_table(stats)
        print(f"nonzero_cells={result.nonzero_cells}")
    return 0


# ---------------------------------------------------------------- eval
def _resolve_grid_path(path: str, default_name: str) -> Path:
    path = Path(path)
    if path.is_dir():
        path = path / default_name
    if not path.exists():
        raise LaptIOError(f"栅格文件不存在: {path}")
    return path


def iou_frame(accumulator: IoUAccumulator) -> pd.DataFrame:
    """逐类 IoU 表，末行为各类平均（mIoU）"""
    frame = accumulator.to_frame(CLASS_NAMES)
    if len(frame):
        mean = {
            "class_id": -1,
            "class_name": "mean",
            "intersection": int(frame["intersection"].sum()),
            "union": int(frame["union"].sum()),
            "iou": float(frame["iou"].mean()),
        }
        frame = pd.concat([frame, pd.DataFrame([mean])], ignore_index=True)
    return frame


def cmd_eval(args: argparse.Namespace, loader: ConfigLoader) -> int:
    """比较预测栅格与真值栅格，输出逐类 IoU"""
    pred = read_semantic_grid(_resolve_grid_path(args.pred, PRED_FILE))
    gt = read_semantic_grid(_resolve_grid_path(args.gt, SampleDir.GROUND_TRUTH))
    accumulator = IoUAccumulator()
    accumulator.update(pred, gt)
    frame = iou_frame(accumulator)
    print_table(frame)
    write_records(frame, args.out)
    return 0


# ---------------------------------------------------------------- bench
def cmd_bench(args: argparse.Namespace, loader: ConfigLoader) -> int:
    """重复运行流水线，统计各阶段 p50 / p95 与端到端 FPS"""
    iterations = args.iterations if args.iterations is not None else loader.get("bench.iterations")
    warmup = args.warmup if args.warmup is not None else loader.get("bench.warmup")
    iterations, warmup = int(iterations), int(warmup)
    if iterations < 1 or warmup < 0:
        raise InvalidArgumentError(f"迭代次数必须 >= 1、预热次数必须 >= 0: {iterations}, {warmup}")

    settings = pipeline_settings(args, loader)
    pipeline = LaptPipeline(settings)
    sample = pipeline.load(args.sample)
    provider = make_provider(settings, args.sample)

    for _ in range(warmup):
        pipeline.run(sample, provider=provider)
    records = []
    for _ in tqdm(range(iterations), desc="bench", unit="it", disable=args.quiet):
        timer = StageTimer()
        pipeline.run(sample, provider=provider, timer=timer)
        records.append(timer.record())

    frame = summarize_latencies(records)
    total = frame[frame["stage"] == "total"].iloc[0]
    fps = fps_from_latency(float(total["mean_ms"]))
    target = float(loader.get("bench.target_fps", 20.0))
    print_table(frame, "{:.3f}")
    print(f"FPS={fps:.2f} (target {target:.1f}, {'OK' if fps >= target else 'BELOW TARGET'})")
    write_records(frame, args.out)
    return 0


# ---------------------------------------------------------------- ablate
def _ablate_variant(
    settings: PipelineSettings, samples: List[str]
) -> Tuple[IoUAccumulator, Dict[str, float]]:
    pipeline = LaptPipeline(settings)
    accumulator = IoUAccumulator()
    nonzero = 0
    points: Dict[int, int] = {}
    for root in samples:
        sample = SampleDir(root)
        if not sample.has_ground_truth():
            raise ValidationError(f"样本 {root} 缺少真值栅格 {SampleDir.GROUND_TRUTH}")
        result = pipeline.run_dir(root, collect_stats=True)
        gt = sample.read_ground_truth()
        accumulator.update(result.semantic, gt.select(result.semantic.class_ids))
        nonzero += result.nonzero_cells
        for f, n in result.projected_points.items():
            points[f] = points.get(f, 0) + n
    summary: Dict[str, float] = {"nonzero_cells": nonzero / len(samples)}
    for f, n in sorted(points.items()):
        summary[f"points_s{f}"] = n / len(samples)
    return accumulator, summary


def cmd_ablate(args: argparse.Namespace, loader: ConfigLoader) -> int:
    """在一组样本上对比多个变体"""
    base = pipeline_settings(args, loader)
    iou_rows = []
    summary_rows = []
    for name in args.variants:
        settings = PipelineSettings.from_variant(name, base)
        accumulator, summary = _ablate_variant(settings, args.samples)
        frame = iou_frame(accumulator)
        frame.insert(0, "variant", name)
        iou_rows.append(frame)
        summary_rows.append({"variant": name, **summary})
        logger.info(f"变体 {name} 完成")

    iou_table = pd.concat(iou_rows, ignore_index=True)
    pivot = iou_table.pivot(index="variant", columns="class_name", values="iou")
    pivot = pivot.reindex(index=list(args.variants))
    summary_table = pd.DataFrame(summary_rows)
    print(pivot.to_string(float_format="{:.4f}".format))
    print_table(summary_table, "{:.1f}")

    records = pd.concat(
        [iou_table.assign(kind="iou"), summary_table.assign(kind="summary")],
        ignore_index=True,
    )
    write_records(records, args.out)
    return 0


# ---------------------------------------------------------------- visualize
def cmd_visualize(args: argparse.Namespace, loader: ConfigLoader) -> int:
    """把栅格文件渲染为 PNG"""
    from utils.bev_plot import render_grid_figure, save_figure

    grid = read_grid(args.grid)
    title = args.title or Path(args.grid).name
    if isinstance(grid, SemanticGrid):
        fig = render_grid_figure(grid, PALETTE, CLASS_NAMES, title=title)
    else:
        fig = render_grid_figure(grid, title=title)
    save_figure(fig, args.out)
    logger.info(f"图像已保存: {args.out}")
    return 0
