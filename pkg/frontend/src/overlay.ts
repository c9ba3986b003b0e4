/** Pure geometry for drawing detections over a rendered video frame. */

import type { Detection } from "./types.js";

export interface PixelRect {
  x: number;
  y: number;
  width: number;
  height: number;
}

/**
 * Map a detection's normalized center-format box onto the rendered element.
 * All detection math stays server-side; this is only a linear scale.
 */
export function toPixelRect(det: Detection, renderedWidth: number, renderedHeight: number): PixelRect {
  const width = det.w * renderedWidth;
  const height = det.h * renderedHeight;
  return {
    x: det.cx * renderedWidth - width / 2,
    y: det.cy * renderedHeight - height / 2,
    width,
    height,
  };
}

/** Label shown next to a box: class name plus score to 2 decimals. */
export function labelFor(det: Detection): string {
  return `${det.class_name} ${det.score.toFixed(2)}`;
}

/** Detections still visible at the given confidence threshold. */
export function visibleDetections(dets: Detection[], confThreshold: number): Detection[] {
  return dets.filter((d) => d.score >= confThreshold);
}

/** Redraw the transparent overlay canvas from scratch. */
export function drawDetections(
  ctx: CanvasRenderingContext2D,
  dets: Detection[],
  renderedWidth: number,
  renderedHeight: number,
): void {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  drawBoxes(ctx, dets, renderedWidth, renderedHeight);
}

/** Stroke boxes and labels on top of whatever the canvas already shows. */
export function drawBoxes(
  ctx: CanvasRenderingContext2D,
  dets: Detection[],
  renderedWidth: number,
  renderedHeight: number,
): void {
  ctx.lineWidth = 2;
  ctx.font = "14px sans-serif";
  for (const det of dets) {
    const r = toPixelRect(det, renderedWidth, renderedHeight);
    ctx.strokeStyle = "#00e676";
    ctx.strokeRect(r.x, r.y, r.width, r.height);

    const label = labelFor(det);
    const textWidth = ctx.measureText(label).width + 8;
    const labelY = Math.max(0, r.y - 18);
    ctx.fillStyle = "rgba(0, 0, 0, 0.6)";
    ctx.fillRect(r.x, labelY, textWidth, 18);
    ctx.fillStyle = "#fff";
    ctx.fillText(label, r.x + 4, labelY + 13);
  }
}
