"""Detection scoring: greedy matching, P/R/F1, interpolated precision, AP/mAP.

Matching is greedy in descending score order: a detection is a true
positive when its best-IoU unmatched same-class ground-truth box in the
same image overlaps strictly above the IoU threshold; duplicates count
as false positives and unmatched ground truths as false negatives.

AP uses all-point interpolation: the area under the running-max
precision curve, summed over achieved recall levels.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .annotations import ClassMap, ImageAnnotation
from .geometry import BBox, iou
from .inference import Detection


class EvaluationError(ValueError):
    """Raised for inconsistent evaluation inputs."""


@dataclass(frozen=True)
class MatchCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn) < 0:
            raise EvaluationError(f"negative counts: {self}")


@dataclass(frozen=True)
class LabeledDetection:
    """A detection with its TP/FP verdict from matching."""

    image_id: str
    class_id: int
    score: float
    is_tp: bool


@dataclass(frozen=True)
class PRPoint:
    recall: float
    precision: float
    score_threshold: float


@dataclass(frozen=True)
class EvalReport:
    per_class_ap: dict[str, float]
    map: float
    precision: float
    recall: float
    f1: float
    counts: MatchCounts
    iou_threshold: float
    conf_threshold: float
    num_images: int

    def to_dict(self) -> dict:
        return {
            "per_class_ap": dict(self.per_class_ap),
            "mAP": self.map,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "counts": {"tp": self.counts.tp, "fp": self.counts.fp, "fn": self.counts.fn},
            "iou_threshold": self.iou_threshold,
            "conf_threshold": self.conf_threshold,
            "num_images": self.num_images,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_table(self) -> str:
        header = f"{'Class':<12}{'Precision':>10}{'Recall':>10}{'F1-Score':>10}{'mAP':>10}"
        rows = [header, "-" * len(header)]
        for name, ap in self.per_class_ap.items():
            rows.append(f"{name:<12}{'':>10}{'':>10}{'':>10}{ap:>10.3f}")
        rows.append(f"{'all':<12}{self.precision:>10.3f}{self.recall:>10.3f}{self.f1:>10.3f}{self.map:>10.3f}")
        return "\n".join(rows) + "\n"


def match(
    dets: dict[str, list[Detection]],
    gts: dict[str, list[tuple[int, BBox]]],
    iou_thresh: float,
) -> tuple[list[LabeledDetection], MatchCounts]:
    """Label every detection TP/FP against the ground truth.

    Detection image ids must be a subset of ground-truth image ids;
    ground-truth images with no detections simply contribute FNs.
    """
    extra = sorted(set(dets) - set(gts))
    if extra:
        raise EvaluationError(f"detections reference unknown image ids: {extra}")

    labeled: list[LabeledDetection] = []
    tp = 0
    total_dets = 0
    matched_total = 0
    total_gt = sum(len(v) for v in gts.values())

    for image_id in sorted(gts):
        image_dets = dets.get(image_id, [])
        image_gts = gts[image_id]
        matched = [False] * len(image_gts)
        total_dets += len(image_dets)
        # Descending score, stable in input order on ties.
        order = sorted(range(len(image_dets)), key=lambda i: (-image_dets[i].score, i))
        verdicts: dict[int, bool] = {}
        for i in order:
            d = image_dets[i]
            best_iou, best_g = 0.0, -1
            for g, (gt_class, gt_box) in enumerate(image_gts):
                if matched[g] or gt_class != d.class_id:
                    continue
                overlap = iou(d.bbox, gt_box)
                if overlap > best_iou:  # ties keep the lower GT index
                    best_iou, best_g = overlap, g
            if best_g >= 0 and best_iou > iou_thresh:
                matched[best_g] = True
                verdicts[i] = True
                tp += 1
            else:
                verdicts[i] = False
        matched_total += sum(matched)
        labeled.extend(
            LabeledDetection(image_id, image_dets[i].class_id, image_dets[i].score, verdicts[i])
            for i in range(len(image_dets))
        )

    return labeled, MatchCounts(tp=tp, fp=total_dets - tp, fn=total_gt - matched_total)


def precision_recall_f1(c: MatchCounts) -> tuple[float, float, float]:
    """Eq.-style P/R/F1 with the zero-denominator convention of 0."""
    p = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    r = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f1


def pr_curve(labeled: list[LabeledDetection], total_gt: int) -> list[PRPoint]:
    """Precision/recall point per distinct score threshold, descending.

    Detections with equal scores enter the cumulative counts together.
    """
    if total_gt < 0:
        raise EvaluationError(f"total_gt must be >= 0, got {total_gt}")
    ordered = sorted(labeled, key=lambda d: -d.score)
    points: list[PRPoint] = []
    tp = fp = 0
    i = 0
    while i < len(ordered):
        j = i
        while j < len(ordered) and ordered[j].score == ordered[i].score:
            tp += ordered[j].is_tp
            fp += not ordered[j].is_tp
            j += 1
        recall = tp / total_gt if total_gt else 0.0
        points.append(PRPoint(recall, tp / (tp + fp), ordered[i].score))
        i = j
    return points


def interp_precision(curve: list[PRPoint], r: float) -> float:
    """Highest precision among points at recall >= r; 0 when none."""
    return max((pt.precision for pt in curve if pt.recall >= r), default=0.0)


def average_precision(curve: list[PRPoint]) -> float:
    """Area under the interpolated PR curve over achieved recall levels."""
    recalls = sorted({pt.recall for pt in curve})
    ap = 0.0
    prev = 0.0
    for r in recalls:
        ap += (r - prev) * interp_precision(curve, r)
        prev = r
    return ap


def evaluate(
    dets: dict[str, list[Detection]],
    gts: dict[str, list[tuple[int, BBox]]],
    classes: ClassMap | None = None,
    iou_threshold: float = 0.5,
    conf_threshold: float = 0.2,
) -> EvalReport:
    """Full report: operating-point P/R/F1 plus per-class AP and mAP.

    The operating point uses only detections scoring >= conf_threshold;
    AP sweeps every score. Classes with no ground truth are excluded
    from the mean.
    """
    classes = classes or ClassMap()
    at_conf = {
        image_id: [d for d in image_dets if d.score >= conf_threshold]
        for image_id, image_dets in dets.items()
    }
    _, counts = match(at_conf, gts, iou_threshold)
    p, r, f1 = precision_recall_f1(counts)

    labeled, _ = match(dets, gts, iou_threshold)
    per_class_ap: dict[str, float] = {}
    for class_id, name in enumerate(classes.names):
        total_gt = sum(1 for boxes in gts.values() for cid, _ in boxes if cid == class_id)
        if total_gt == 0:
            continue
        class_labeled = [d for d in labeled if d.class_id == class_id]
        per_class_ap[name] = average_precision(pr_curve(class_labeled, total_gt))

    mean_ap = sum(per_class_ap.values()) / len(per_class_ap) if per_class_ap else 0.0
    return EvalReport(
        per_class_ap=per_class_ap,
        map=mean_ap,
        precision=p,
        recall=r,
        f1=f1,
        counts=counts,
        iou_threshold=iou_threshold,
        conf_threshold=conf_threshold,
        num_images=len(gts),
    )


def ground_truth_index(annotations: list[ImageAnnotation]) -> dict[str, list[tuple[int, BBox]]]:
    return {a.image_id: list(a.boxes) for a in annotations}


def format_detection_line(image_id: str, d: Detection) -> str:
    """One interchange JSONL line; fixed 6-decimal floats for byte stability."""
    return (
        f'{{"image_id": {json.dumps(image_id)}, "class_id": {d.class_id}, '
        f'"score": {d.score:.6f}, "cx": {d.bbox.cx:.6f}, "cy": {d.bbox.cy:.6f}, '
        f'"w": {d.bbox.w:.6f}, "h": {d.bbox.h:.6f}}}\n'
    )


def write_detections_jsonl(dets: dict[str, list[Detection]], path: str | Path) -> None:
    lines = [
        format_detection_line(image_id, d)
        for image_id in sorted(dets)
        for d in dets[image_id]
    ]
    Path(path).write_text("".join(lines), encoding="utf-8")


def read_detections_jsonl(path: str | Path) -> dict[str, list[Detection]]:
    dets: dict[str, list[Detection]] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            d = Detection(
                BBox(obj["cx"], obj["cy"], obj["w"], obj["h"]),
                int(obj["class_id"]),
                float(obj["score"]),
            )
            dets.setdefault(str(obj["image_id"]), []).append(d)
        except (ValueError, KeyError, TypeError) as exc:
            raise EvaluationError(f"{path}: line {lineno}: {exc}") from exc
    return dets
