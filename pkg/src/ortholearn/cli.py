"""Command-line entry points: project, entropy, convert, embed, simulate,
memory, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import colorspaces
from .clouds import load_cloud, load_dataset_index
from .config import PipelineConfig, load_config
from .errors import OrthoLearnError
from .features import ObjectRepresentation
from .learner import PerceptualMemory
from .projection import ColorImage, VIEW_IDS, render_views, save_view_images
from .teacher import (PipelineAgent, TeacherConfig, compute_metrics,
                      run_experiments, summarize_runs)


def _parse_gravity(text):
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("gravity must be three comma-separated floats")
    return parts


def _pipeline(args) -> ObjectRepresentation:
    config = load_config(args.config) if getattr(args, "config", None) else PipelineConfig()
    return ObjectRepresentation(config)


def cmd_project(args) -> int:
    cloud = load_cloud(args.cloud, gravity=args.gravity)
    from .frames import construct_lrf, transform_to_lrf

    local = transform_to_lrf(cloud, construct_lrf(cloud))
    triplet = render_views(local, resolution=args.resolution,
                           splat_radius=args.splat_radius, margin=args.margin)
    written = save_view_images(triplet, args.out, cloud.source_id or Path(args.cloud).stem)
    for path in written:
        print(path)
    return 0


def cmd_entropy(args) -> int:
    from .entropy import select_max_entropy
    from .frames import construct_lrf, transform_to_lrf

    cloud = load_cloud(args.cloud, gravity=args.gravity)
    local = transform_to_lrf(cloud, construct_lrf(cloud))
    triplet = render_views(local, resolution=args.resolution)
    selected, report = select_max_entropy(triplet.color)
    for view_id in VIEW_IDS:
        h = report.entropies.get(view_id)
        print(f"{view_id}: {'empty' if h is None else format(h, '.6f')}")
    print(f"selected: {selected}")
    return 0


def cmd_convert(args) -> int:
    from PIL import Image

    rgb = np.asarray(Image.open(args.image).convert("RGB"))
    img = ColorImage(pixels=rgb, mask=np.ones(rgb.shape[:2], dtype=bool), view_id="input")
    converted = colorspaces.convert(img, args.space)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    scaled = np.empty_like(converted.pixels)
    for c, (lo, hi) in enumerate(converted.ranges):
        scaled[..., c] = (converted.pixels[..., c] - lo) / (hi - lo) * 255.0
    Image.fromarray(np.clip(np.round(scaled), 0, 255).astype(np.uint8), mode="RGB") \
        .save(out.with_suffix(".png"))
    range_lines = [f"space = {converted.space}"]
    for c, (lo, hi) in enumerate(converted.ranges):
        range_lines.append(f"channel_{c} = [{lo!r}, {hi!r}]")
    range_path = out.with_suffix(".range.txt")
    range_path.write_text("\n".join(range_lines) + "\n")
    print(out.with_suffix(".png"))
    print(range_path)
    return 0


def cmd_embed(args) -> int:
    pipeline = _pipeline(args)
    cloud = load_cloud(args.cloud, gravity=args.gravity)
    feature = pipeline(cloud)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    bin_path = out.with_suffix(".bin")
    bin_path.write_bytes(feature.values.astype("<f4").tobytes())
    header = {
        "dtype": "<f4",
        "length": int(feature.values.shape[0]),
        "shape_length": feature.layout.shape_length,
        "color_length": feature.layout.color_length,
        "spaces": list(feature.layout.spaces),
        "color_weight": feature.layout.color_weight,
        "shape_backend": pipeline.shape_backend.spec.name,
        "color_backend": pipeline.color_backend.spec.name,
        "source_id": cloud.source_id,
    }
    head_path = out.with_suffix(".json")
    head_path.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
    print(bin_path)
    print(head_path)
    return 0


def _format_metrics_table(summary) -> str:
    header = f"{'run':>4} {'QCI':>6} {'NLC':>5} {'AIC':>7} {'GCA':>7} {'APA':>7}  stop"
    lines = [header]
    for i, report in enumerate(summary.runs):
        lines.append(f"{i:>4} {report.QCI:>6} {report.NLC:>5} {report.AIC:>7.3f} "
                     f"{report.GCA:>7.3f} {report.APA:>7.3f}  {report.stop_reason}")
    mean = summary.mean
    lines.append(f"{'mean':>4} {mean.QCI:>6.1f} {mean.NLC:>5.1f} {mean.AIC:>7.3f} "
                 f"{mean.GCA:>7.3f} {mean.APA:>7.3f}")
    return "\n".join(lines)


def cmd_simulate(args) -> int:
    pipeline = _pipeline(args)
    index = load_dataset_index(args.dataset)
    for warning in index.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    teacher = TeacherConfig(seed=args.seed, runs=args.runs, tau=args.tau,
                            max_idle_iterations=args.max_idle)
    logs = run_experiments(index,
                           lambda: PipelineAgent(pipeline=pipeline),
                           teacher)
    reports = [compute_metrics(log) for log in logs]
    summary = summarize_runs(reports)
    mean_dict = {k: v for k, v in summary.mean.__dict__.items()
                 if k != "stop_reason"}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for i, log in enumerate(logs):
            (out / f"run_{i:02d}.jsonl").write_bytes(log.to_jsonl())
        (out / "summary.json").write_text(json.dumps({
            "mean": mean_dict,
            "runs": [r.__dict__ for r in reports],
        }, indent=2, sort_keys=True) + "\n")
    print(_format_metrics_table(summary))
    print(json.dumps({"mean": mean_dict}, sort_keys=True))
    return 0


def cmd_memory_export(args) -> int:
    pipeline = _pipeline(args)
    index = load_dataset_index(args.dataset)
    memory = PerceptualMemory()
    per_category: dict[str, int] = {}
    for view in index.views:
        if args.limit and per_category.get(view.category_label, 0) >= args.limit:
            continue
        cloud = load_cloud(view.path)
        memory.teach(view.category_label, pipeline(cloud))
        per_category[view.category_label] = per_category.get(view.category_label, 0) + 1
    memory.save(args.out)
    print(f"{args.out}: {len(memory)} categories, {memory.total_instances} instances")
    return 0


def cmd_memory_import(args) -> int:
    memory = PerceptualMemory.load(args.file)
    print(f"categories: {len(memory)}")
    print(f"instances: {memory.total_instances}")
    for label, count in sorted(memory.counts().items()):
        print(f"  {label}: {count}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = load_config(args.config) if args.config else PipelineConfig()
    app = create_app(config, default_dataset=args.dataset,
                     memory_snapshot=args.memory,
                     snapshot_dir=args.snapshot_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ortholearn",
        description="Open-ended 3D object categorization from orthographic views.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("project", help="render the six orthographic views as PNGs")
    p.add_argument("cloud")
    p.add_argument("--out", required=True)
    p.add_argument("--resolution", type=int, default=224)
    p.add_argument("--splat-radius", type=int, default=1)
    p.add_argument("--margin", type=float, default=0.1)
    p.add_argument("--gravity", type=_parse_gravity, default=None)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("entropy", help="print per-view entropy and the selected view")
    p.add_argument("cloud")
    p.add_argument("--resolution", type=int, default=224)
    p.add_argument("--gravity", type=_parse_gravity, default=None)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("convert", help="convert an RGB image into a colorspace")
    p.add_argument("image")
    p.add_argument("--space", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("embed", help="emit the fused feature vector of a cloud")
    p.add_argument("cloud")
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--gravity", type=_parse_gravity, default=None)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("simulate", help="run the simulated-teacher protocol")
    p.add_argument("--dataset", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--tau", type=float, default=0.67)
    p.add_argument("--max-idle", type=int, default=100)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("memory", help="export/import perceptual-memory snapshots")
    mem_sub = p.add_subparsers(dest="memory_command", required=True)
    pe = mem_sub.add_parser("export", help="teach a labeled dataset into a snapshot")
    pe.add_argument("--dataset", required=True)
    pe.add_argument("--config", default=None)
    pe.add_argument("--out", required=True)
    pe.add_argument("--limit", type=int, default=None,
                    help="max instances per category")
    pe.set_defaults(func=cmd_memory_export)
    pi = mem_sub.add_parser("import", help="load and summarize a snapshot")
    pi.add_argument("file")
    pi.set_defaults(func=cmd_memory_import)

    p = sub.add_parser("serve", help="start the teaching-console HTTP service")
    p.add_argument("--config", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.add_argument("--dataset", default=None)
    p.add_argument("--memory", default=None,
                   help="memory snapshot seeding every new session")
    p.add_argument("--snapshot-dir", default=None,
                   help="persist each session's memory here on shutdown")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OrthoLearnError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
