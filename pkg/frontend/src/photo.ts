/** Photo mode: single-shot detect, annotated display, PNG download. */

import { drawBoxes } from "./overlay.js";
import type { Detection } from "./types.js";

const IMAGE_TYPES = new Set(["image/png", "image/jpeg", "image/webp", "image/bmp"]);

export function isSupportedImage(file: { type: string }): boolean {
  return IMAGE_TYPES.has(file.type);
}

/**
 * Burn detections into a copy of the image and return it as a canvas,
 * ready for display or `toDataURL("image/png")` download.
 */
export function renderAnnotated(
  image: HTMLImageElement | HTMLCanvasElement | ImageBitmap,
  dets: Detection[],
): HTMLCanvasElement {
  const canvas = document.createElement("canvas");
  canvas.width = image.width;
  canvas.height = image.height;
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("2d canvas context unavailable");
  ctx.drawImage(image, 0, 0);
  drawBoxes(ctx, dets, canvas.width, canvas.height);
  return canvas;
}

export function downloadFilename(originalName: string): string {
  const stem = originalName.replace(/\.[^.]+$/, "") || "photo";
  return `${stem}__detections.png`;
}
