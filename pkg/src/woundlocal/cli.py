"""Command-line entry point: convert, augment, detect, eval, serve.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 internal error.
"""
from __future__ import annotations

import sys
from pathlib import Path

import click

from . import annotations as ann
from .augment import AugmentError, AugmentSpec, RasterImage, expand_dataset
from .evaluation import (
    EvaluationError,
    evaluate,
    ground_truth_index,
    read_detections_jsonl,
    write_detections_jsonl,
)
from .geometry import GeometryError
from .inference import (
    BackendError,
    ConfigError,
    DecodeError,
    ModelConfig,
    TensorFormatError,
    builtin_models,
    detect,
    open_backend,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_INTERNAL = 3

VALIDATION_ERRORS = (
    ann.AnnotationError,
    GeometryError,
    AugmentError,
    ConfigError,
    DecodeError,
    EvaluationError,
    TensorFormatError,
    click.UsageError,
)
IO_ERRORS = (OSError, BackendError)


@click.group()
@click.option("--classes", "classes_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Class-name file, one name per line (default: single class 'wound').")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Model config TOML (default: built-in yolov3-416).")
@click.option("--log-level", default="info", show_default=True)
@click.pass_context
def cli(ctx: click.Context, classes_path: str | None, config_path: str | None, log_level: str) -> None:
    """Wound-localization detection toolkit."""
    ctx.ensure_object(dict)
    ctx.obj["classes"] = ann.ClassMap.from_file(classes_path) if classes_path else ann.ClassMap()
    ctx.obj["config"] = ModelConfig.from_toml(config_path) if config_path else None


def _resolve_config(ctx: click.Context, model: str | None) -> ModelConfig:
    if ctx.obj["config"] is not None:
        return ctx.obj["config"]
    registry = builtin_models()
    name = model or "yolov3-416"
    if name not in registry:
        raise click.UsageError(f"unknown model {name!r}; known: {sorted(registry)}")
    return registry[name]


@cli.command("convert")
@click.option("--from", "src_fmt", type=click.Choice(["yolo", "voc"]), required=True)
@click.option("--to", "dst_fmt", type=click.Choice(["yolo", "voc"]), required=True)
@click.option("--in", "in_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--images", "image_dir", type=click.Path(file_okay=False), default=None,
              help="Image directory for dimension recovery (default: the input directory).")
@click.pass_context
def cmd_convert(ctx: click.Context, src_fmt: str, dst_fmt: str, in_dir: str, out_dir: str, image_dir: str | None) -> None:
    """Convert a directory of annotations between YOLO txt and VOC XML."""
    classes = ctx.obj["classes"]
    in_path = Path(in_dir)
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    images = Path(image_dir) if image_dir else in_path

    src_ext = ".txt" if src_fmt == "yolo" else ".xml"
    failures = 0
    converted = 0
    dims = ann._load_dims(images)
    for path in sorted(in_path.glob(f"*{src_ext}")):
        try:
            text = path.read_text(encoding="utf-8")
            if src_fmt == "yolo":
                img_w, img_h = ann._image_dims(path.stem, images, dims)
                a = ann.parse_yolo_txt(text, img_w, img_h, image_id=path.stem)
            else:
                parsed = ann.parse_voc_xml(text, classes)
                a = ann.ImageAnnotation(path.stem, parsed.img_w, parsed.img_h, parsed.boxes)
            if dst_fmt == "yolo":
                (out_path / f"{a.image_id}.txt").write_text(ann.emit_yolo_txt(a), encoding="utf-8")
            else:
                (out_path / f"{a.image_id}.xml").write_text(ann.emit_voc_xml(a, classes), encoding="utf-8")
            converted += 1
        except (ann.AnnotationError, GeometryError, OSError) as exc:
            failures += 1
            click.echo(f"FAILED {path.name}: {exc}", err=True)
    click.echo(f"{converted} files converted, {failures} failed")
    if failures:
        sys.exit(EXIT_VALIDATION)


@cli.command("augment")
@click.option("--in", "in_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--ops", required=True, help="Comma-separated ops, e.g. rot90,flip_up,flip_right,blur:2")
@click.option("--force", is_flag=True, help="Overwrite a non-empty output directory.")
def cmd_augment(in_dir: str, out_dir: str, ops: str, force: bool) -> None:
    """Expand an image + YOLO-annotation directory with deterministic augmentations."""
    specs = [AugmentSpec.parse(tok) for tok in ops.split(",") if tok.strip()]
    out_path = Path(out_dir)
    if out_path.exists() and any(out_path.iterdir()) and not force:
        raise click.UsageError(f"output directory {out_path} is not empty; pass --force to overwrite")
    out_path.mkdir(parents=True, exist_ok=True)

    dataset = ann.load_dataset(in_dir, in_dir, format="yolo")
    items = []
    for a in dataset:
        img = _find_image(Path(in_dir), a.image_id)
        items.append((RasterImage.from_file(img), a))
    expanded = expand_dataset(items, specs)
    for img, a in expanded:
        img.to_file(out_path / f"{a.image_id}.png")
        (out_path / f"{a.image_id}.txt").write_text(ann.emit_yolo_txt(a), encoding="utf-8")
    click.echo(f"{len(items)} images in, {len(expanded)} images out")


@cli.command("detect")
@click.option("--image", "image_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--backend", "backend_spec", required=True, help="Backend spec, e.g. replay:TENSOR_DIR")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--model", default=None, help="Built-in model name (ignored with --config).")
@click.option("--conf", type=click.FloatRange(0, 1), default=None)
@click.option("--nms-iou", type=click.FloatRange(0, 1), default=None)
@click.pass_context
def cmd_detect(ctx: click.Context, image_path: str, backend_spec: str, out_path: str,
               model: str | None, conf: float | None, nms_iou: float | None) -> None:
    """Run the detection pipeline on one image and write interchange JSONL."""
    cfg = _resolve_config(ctx, model).with_thresholds(conf=conf, nms_iou=nms_iou)
    backend = open_backend(backend_spec)
    img = RasterImage.from_file(image_path)
    image_id = Path(image_path).stem
    dets = detect(img, backend, cfg, image_id)
    write_detections_jsonl({image_id: dets}, out_path)
    click.echo(f"{len(dets)} detections written to {out_path}")


@cli.command("eval")
@click.option("--dets", "dets_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--gt", "gt_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--images", "image_dir", type=click.Path(file_okay=False), default=None)
@click.option("--gt-format", type=click.Choice(["yolo", "voc"]), default="yolo", show_default=True)
@click.option("--iou", type=click.FloatRange(0, 1), default=0.5, show_default=True)
@click.option("--conf", type=click.FloatRange(0, 1), default=0.2, show_default=True)
@click.option("--format", "out_format", type=click.Choice(["table", "json"]), default="table", show_default=True)
@click.pass_context
def cmd_eval(ctx: click.Context, dets_path: str, gt_dir: str, image_dir: str | None,
             gt_format: str, iou: float, conf: float, out_format: str) -> None:
    """Score interchange detections against a ground-truth directory."""
    classes = ctx.obj["classes"]
    gts = ground_truth_index(
        ann.load_dataset(gt_dir, image_dir or gt_dir, format=gt_format, classes=classes)
    )
    dets = read_detections_jsonl(dets_path)
    report = evaluate(dets, gts, classes, iou_threshold=iou, conf_threshold=conf)
    click.echo(report.to_json() if out_format == "json" else report.to_table(), nl=False)


@cli.command("serve")
@click.option("--addr", default="127.0.0.1:8000", show_default=True)
@click.option("--backend", "backend_spec", default=None, help="Backend spec, e.g. replay:TENSOR_DIR")
@click.pass_context
def cmd_serve(ctx: click.Context, addr: str, backend_spec: str | None) -> None:
    """Run the HTTP detection service until interrupted."""
    import uvicorn

    from .service import create_app

    host, _, port_txt = addr.rpartition(":")
    if not host or not port_txt.isdigit() or not 0 < int(port_txt) < 65536:
        raise click.UsageError(f"invalid --addr {addr!r}; expected HOST:PORT")
    backend = open_backend(backend_spec) if backend_spec else None
    models = builtin_models()
    if ctx.obj["config"] is not None:
        models[ctx.obj["config"].name] = ctx.obj["config"]
    app = create_app(backend=backend, models=models, classes=ctx.obj["classes"])
    uvicorn.run(app, host=host, port=int(port_txt), log_level="info")


def _find_image(directory: Path, stem: str) -> Path:
    for ext in ann.IMAGE_EXTENSIONS:
        candidate = directory / f"{stem}{ext}"
        if candidate.exists():
            return candidate
    raise ann.AnnotationError(f"no image found for {stem!r} in {directory}")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False, obj={})
        return EXIT_OK
    except VALIDATION_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_VALIDATION
    except IO_ERRORS as exc:
        click.echo(f"I/O error: {exc}", err=True)
        return EXIT_IO
    except SystemExit as exc:
        return int(exc.code or 0)
    except click.Abort:
        return EXIT_OK
    except Exception as exc:  # pragma: no cover - defensive
        click.echo(f"internal error: {exc}", err=True)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
