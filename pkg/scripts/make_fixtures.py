#!/usr/bin/env python3
"""Regenerate the committed test fixtures.

The golden detection JSONL is produced by the independent scalar pipeline
in tests/oracles.py; generation fails if the library pipeline does not
reproduce it byte-for-byte, so a committed mismatch can never happen
silently.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from oracles import average_precision_exhaustive, detect_scalar  # noqa: E402

from woundlocal.annotations import ImageAnnotation, emit_yolo_txt  # noqa: E402
from woundlocal.augment import RasterImage  # noqa: E402
from woundlocal.evaluation import (  # noqa: E402
    evaluate,
    format_detection_line,
    ground_truth_index,
    match,
    pr_curve,
    write_detections_jsonl,
)
from woundlocal.geometry import BBox  # noqa: E402
from woundlocal.inference import Detection, ReplayBackend, detect, tiny_yolov3, write_tensor  # noqa: E402

FIXTURES = ROOT / "tests" / "fixtures"

GOLDEN_IMAGE_W, GOLDEN_IMAGE_H = 96, 64


def make_golden_detect() -> None:
    out = FIXTURES / "golden"
    out.mkdir(parents=True, exist_ok=True)
    cfg = tiny_yolov3()

    # Deterministic gradient image.
    yy, xx = np.mgrid[0:GOLDEN_IMAGE_H, 0:GOLDEN_IMAGE_W]
    pixels = np.stack(
        [(xx * 255 // GOLDEN_IMAGE_W), (yy * 255 // GOLDEN_IMAGE_H), ((xx + yy) % 256)], axis=-1
    ).astype(np.uint8)
    img = RasterImage(pixels)
    img.to_file(out / "wound01.png")

    tensors: dict[int, np.ndarray] = {}
    for stride in cfg.strides:
        gh, gw = cfg.net_h // stride, cfg.net_w // stride
        tensors[stride] = np.full((gh, gw, 3, 6), -20.0, dtype=np.float32)

    t32 = tensors[32]
    # Strong hit dead center, plus an overlapping weaker duplicate for NMS.
    t32[6, 6, 0] = [0.0, 0.0, 0.0, 0.0, 8.0, 8.0]
    t32[6, 7, 0] = [-3.0, 0.0, 0.0, 0.0, 4.0, 4.0]
    # A distinct second object on the fine grid.
    tensors[16][20, 5, 2] = [0.0, 0.0, 0.5, -0.2, 3.1, 2.9]
    # Below the 0.2 confidence threshold: must not appear.
    tensors[16][3, 3, 0] = [0.0, 0.0, 0.0, 0.0, -1.0, -1.0]

    for stride, values in tensors.items():
        write_tensor(out / f"wound01.stride{stride}.wlt1", values)

    oracle_dets = detect_scalar(
        tensors,
        cfg.anchors,
        {
            "net_w": cfg.net_w,
            "net_h": cfg.net_h,
            "conf_threshold": cfg.conf_threshold,
            "nms_iou_threshold": cfg.nms_iou_threshold,
        },
        GOLDEN_IMAGE_W,
        GOLDEN_IMAGE_H,
    )
    oracle_lines = "".join(
        format_detection_line("wound01", Detection(BBox(d["cx"], d["cy"], d["w"], d["h"]), d["class_id"], d["score"]))
        for d in oracle_dets
    )

    lib_dets = detect(img, ReplayBackend(out), cfg, "wound01")
    lib_lines = "".join(format_detection_line("wound01", d) for d in lib_dets)
    if lib_lines != oracle_lines:
        raise SystemExit(
            "library pipeline disagrees with the scalar oracle at 6 decimals:\n"
            f"--- oracle ---\n{oracle_lines}--- library ---\n{lib_lines}"
        )
    (out / "expected_detections.jsonl").write_text(oracle_lines, encoding="utf-8")
    print(f"golden detect fixture: {len(oracle_dets)} detections")


def make_eval_golden() -> None:
    out = FIXTURES / "eval_golden"
    gt_dir = out / "gt"
    gt_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(2024)

    annotations: list[ImageAnnotation] = []
    dets: dict[str, list[Detection]] = {}
    dims_lines = []
    for i in range(20):
        image_id = f"synth{i:02d}"
        img_w, img_h = 320, 240
        dims_lines.append(f"{image_id}\t{img_w}\t{img_h}\n")
        boxes = []
        image_dets: list[Detection] = []
        for _ in range(int(rng.integers(0, 4))):
            w = float(rng.uniform(0.1, 0.3))
            h = float(rng.uniform(0.1, 0.3))
            cx = float(rng.uniform(w / 2, 1 - w / 2))
            cy = float(rng.uniform(h / 2, 1 - h / 2))
            boxes.append((0, BBox(cx, cy, w, h)))
            roll = rng.uniform()
            if roll < 0.75:  # good detection with jitter
                jx = float(rng.uniform(-0.02, 0.02))
                jy = float(rng.uniform(-0.02, 0.02))
                image_dets.append(
                    Detection(BBox(cx + jx, cy + jy, w, h), 0, float(rng.uniform(0.5, 1.0)))
                )
            if roll > 0.6:  # stray false positive somewhere else
                fw = float(rng.uniform(0.05, 0.15))
                image_dets.append(
                    Detection(
                        BBox(float(rng.uniform(fw / 2, 1 - fw / 2)), float(rng.uniform(fw / 2, 1 - fw / 2)), fw, fw),
                        0,
                        float(rng.uniform(0.1, 0.6)),
                    )
                )
        ann = ImageAnnotation(image_id, img_w, img_h, tuple(boxes))
        annotations.append(ann)
        (gt_dir / f"{image_id}.txt").write_text(emit_yolo_txt(ann), encoding="utf-8")
        if image_dets:
            dets[image_id] = image_dets
    (gt_dir / "dims.tsv").write_text("".join(dims_lines), encoding="utf-8")
    write_detections_jsonl(dets, out / "detections.jsonl")

    gts = ground_truth_index(annotations)
    report = evaluate(dets, gts, iou_threshold=0.5, conf_threshold=0.2)

    # Cross-check the AP against the exhaustive-integration oracle.
    labeled, _ = match(dets, gts, 0.5)
    total_gt = sum(len(v) for v in gts.values())
    oracle_ap = average_precision_exhaustive(
        [d.score for d in labeled], [d.is_tp for d in labeled], total_gt
    )
    lib_ap = report.per_class_ap["wound"]
    if abs(lib_ap - oracle_ap) > 1e-9:
        raise SystemExit(f"AP mismatch: library {lib_ap!r} vs oracle {oracle_ap!r}")

    (out / "expected_report.json").write_text(report.to_json(), encoding="utf-8")
    print(f"eval golden fixture: {total_gt} GT boxes, mAP {report.map:.6f}")


if __name__ == "__main__":
    make_golden_detect()
    make_eval_golden()
