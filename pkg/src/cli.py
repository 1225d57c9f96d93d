"""
Command-Line Interface

Subcommands:
    extract    object-LiDAR-points per frame from scans and 2D detections
    fit        KITTI pseudo-labels from scans or extracted points
    eval       AP of a label directory against ground truth
    simulate   synthetic KITTI-format dataset from a scene spec file
    gradcheck  finite-difference consistency suite for the loss gradients

Exit codes: 0 success (per-object skips allowed), 2 bad arguments or
configuration, 3 I/O or file-format error, 4 gradcheck failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from dotenv import load_dotenv

from . import __version__
from .fitting import FitConfig, GradCheckConfig, gradcheck
from .kitti import EvalConfig, evaluate, format_report, parse_detections, parse_label_dir, report_json
from .pipeline import ParallelPipeline, SequentialPipeline
from .settings import Settings, environment_settings, load_settings
from .synth import export_kitti, generate_scene, parse_scene_spec
from .utils.errors import ConfigError, KittiFormatError
from .utils.logger import configure_logging, get_logger
from .utils.manifest import RunManifest

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_BAD_ARGS = 2
EXIT_IO = 3
EXIT_GRADCHECK = 4

MANIFEST_NAME = "manifest.json"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weakbox3d",
        description="3D box pseudo-labels from LiDAR points and 2D detections",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="TOML config file or a previous run manifest (JSON)")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
                        help="overrides logging.level")
    parser.add_argument("--jobs", type=int,
                        help="worker processes (default: run.jobs from --config, else WEAKBOX3D_JOBS, else 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract object-LiDAR-points")
    p.add_argument("--scans", required=True, help="velodyne directory (*.bin)")
    p.add_argument("--calib", required=True, help="calibration directory")
    p.add_argument("--dets", required=True, help="detections CSV")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("fit", help="fit 3D pseudo-labels")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--scans", help="velodyne directory; extraction runs first")
    source.add_argument("--points", help="directory of `extract` outputs")
    p.add_argument("--calib", required=True, help="calibration directory")
    p.add_argument("--dets", required=True, help="detections CSV")
    p.add_argument("--out", required=True, help="label output directory")
    p.add_argument("--no-ray", action="store_true", help="drop the ray tracing loss")
    p.add_argument("--no-balancing", action="store_true", help="uniform point weights")
    p.add_argument("--center-only", action="store_true", help="center distance loss only")
    p.add_argument("--class-dims", help="YAML/JSON mapping class -> [h, w, l]; replaces the defaults")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("eval", help="evaluate labels against ground truth")
    p.add_argument("--dets", required=True, help="label directory with scores")
    p.add_argument("--gt", required=True, help="ground-truth label directory")
    p.add_argument("--iou", type=float, help="IoU threshold")
    p.add_argument("--metric", type=str.upper, choices=["AP11", "AP40"])
    p.add_argument("--mode", type=str.upper, choices=["BEV", "3D"])
    p.add_argument("--cls", help="class to evaluate")
    p.add_argument("--json-out", help="write the JSON report to this file")

    p = sub.add_parser("simulate", help="write a synthetic KITTI-format dataset")
    p.add_argument("--spec", help="scene spec file (key = value lines)")
    p.add_argument("--out", required=True, help="dataset root")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("gradcheck", help="check loss gradients against Richardson differences")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-configs", type=int, default=GradCheckConfig().n_configs)
    return parser


def load_class_dims(path: str) -> Dict[str, List[float]]:
    """Read a class -> [h, w, l] mapping (YAML, so JSON works too)."""
    with open(path, "r") as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping of class -> [h, w, l]")
    return data


def collect_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Section dicts for the flags that were actually given."""
    overrides: Dict[str, Dict[str, Any]] = {}

    def put(section: str, key: str, value: Any) -> None:
        if value is not None:
            overrides.setdefault(section, {})[key] = value

    put("logging", "level", args.log_level)
    put("run", "jobs", args.jobs)
    seed = getattr(args, "seed", None)
    put("run", "seed", seed)
    if args.command == "simulate":
        put("synth", "seed", seed)
    if args.command == "fit":
        if args.no_ray:
            put("fit", "use_ray", False)
        if args.no_balancing:
            put("fit", "use_balancing", False)
        if args.center_only:
            put("fit", "use_center_only", True)
    if args.command == "eval":
        put("eval", "iou_threshold", args.iou)
        put("eval", "metric", args.metric)
        put("eval", "mode", args.mode)
        put("eval", "cls", args.cls)
    return overrides


def resolve_settings(args: argparse.Namespace) -> Settings:
    settings = load_settings(args.config, collect_overrides(args), environment=environment_settings())
    class_dims = getattr(args, "class_dims", None)
    if class_dims:
        # replaces the mapping instead of merging into the defaults
        data = settings.fit.model_dump(by_alias=True)
        data["class_dims"] = load_class_dims(class_dims)
        try:
            fit = FitConfig(**data)
        except ValueError as e:
            raise ConfigError(f"invalid class dims in {class_dims}: {e}") from e
        settings = settings.model_copy(update={"fit": fit})
    return settings


def make_pipeline(settings: Settings, manifest: RunManifest):
    kwargs = dict(fit_config=settings.fit, extraction_config=settings.extraction,
                  seed=settings.run.seed, manifest=manifest)
    if settings.run.jobs > 1:
        return ParallelPipeline(jobs=settings.run.jobs, **kwargs)
    return SequentialPipeline(**kwargs)


def print_summary(title: str, lines: List[str]) -> None:
    print("\n" + "=" * 60)
    print(title)
    print("=" * 60)
    for line in lines:
        print(f"   {line}")
    print("=" * 60)


def run_frames(args: argparse.Namespace, settings: Settings) -> int:
    """Shared driver of `extract` and `fit`."""
    inputs = {"calib": args.calib, "dets": args.dets}
    scans = getattr(args, "scans", None)
    points = getattr(args, "points", None)
    if scans is not None:
        inputs["scans"] = scans
    if points is not None:
        inputs["points"] = points
    for name, path in inputs.items():
        if not Path(path).exists():
            raise FileNotFoundError(f"--{name} not found: {path}")

    manifest = RunManifest(args.command, seed=settings.run.seed,
                           config=settings.snapshot(), inputs=inputs)
    detections = parse_detections(args.dets, strict=False)
    pipeline = make_pipeline(settings, manifest)
    command = "extract" if args.command == "extract" else "fit"
    tasks = pipeline.build_tasks(command, args.out, args.calib, detections,
                                 scans_dir=scans, points_dir=points)
    results = pipeline.run(tasks)

    manifest.outputs["dir"] = args.out
    path = manifest.write(Path(args.out) / MANIFEST_NAME)
    summary = pipeline.get_summary(results)
    print_summary(f"{args.command.upper()} SUMMARY", [
        f"Frames: {summary['successful_frames']}/{summary['total_frames']}",
        f"Objects written: {summary['total_outputs']}",
        f"Objects skipped: {summary['total_skipped']}",
        f"Duration: {summary['duration_seconds']:.2f}s",
        f"Manifest: {path}",
    ])
    failed = results["metadata"]["failed_frames"]
    return EXIT_IO if failed else EXIT_OK


def cmd_eval(args: argparse.Namespace, settings: Settings) -> int:
    dets = parse_label_dir(args.dets)
    gts = parse_label_dir(args.gt)
    result = evaluate(dets, gts, settings.eval)
    sys.stdout.write(format_report([result]))
    text = report_json([result])
    if args.json_out:
        Path(args.json_out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.json_out, "w") as f:
            f.write(text + "\n")
        logger.info(f"✓ JSON report written to {args.json_out}")
    else:
        sys.stdout.write(text + "\n")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, settings: Settings) -> int:
    spec = settings.synth
    if args.spec:
        with open(args.spec, "r") as f:
            spec = parse_scene_spec(f.read(), base=spec)
    scenes = [generate_scene(spec, frame_index=k) for k in range(spec.n_frames)]
    frame_ids = export_kitti(scenes, args.out)

    inputs = {"spec": args.spec} if args.spec else {}
    manifest = RunManifest("simulate", seed=spec.seed, config=settings.snapshot(), inputs=inputs)
    manifest.outputs.update({"dir": args.out, "frames": frame_ids})
    manifest.write(Path(args.out) / MANIFEST_NAME)
    print_summary("SIMULATE SUMMARY", [
        f"Frames: {len(frame_ids)}",
        f"Boxes per frame: {[len(s.gt_boxes) for s in scenes]}",
        f"Dataset: {args.out}",
    ])
    return EXIT_OK


def cmd_gradcheck(args: argparse.Namespace, settings: Settings) -> int:
    cfg = GradCheckConfig(n_configs=args.n_configs)
    report = gradcheck(cfg, seed=settings.run.seed, loss_cfg=settings.fit.loss_config())
    print(f"max relative error: {report.max_rel_error:.3e} "
          f"({report.n_checked} configurations, {report.n_unstable} unstable skipped)")
    return EXIT_OK if report.passed else EXIT_GRADCHECK


COMMANDS = {
    "extract": run_frames,
    "fit": run_frames,
    "eval": cmd_eval,
    "simulate": cmd_simulate,
    "gradcheck": cmd_gradcheck,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, configure logging and dispatch a subcommand.

    Args:
        argv: arguments without the program name (sys.argv[1:] by default)

    Returns:
        Process exit code
    """
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings = resolve_settings(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BAD_ARGS
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO

    configure_logging(
        level=getattr(logging, settings.logging.level.upper(), logging.INFO),
        log_file=settings.logging.log_file,
        format=settings.logging.format,
    )
    logger.info(f"weakbox3d {__version__}: {args.command}")

    try:
        return COMMANDS[args.command](args, settings)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_BAD_ARGS
    except (OSError, KittiFormatError) as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_BAD_ARGS
