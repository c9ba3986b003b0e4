/** Wire types mirroring the detection service's JSON API. */

export interface Detection {
  class_id: number;
  class_name: string;
  score: number;
  /** Normalized center-format coordinates in [0, 1]. */
  cx: number;
  cy: number;
  w: number;
  h: number;
}

export interface DetectResponse {
  image_id: string;
  model: string;
  elapsed_ms: number;
  detections: Detection[];
}

export interface Settings {
  model: string;
  conf_threshold: number;
  nms_iou_threshold: number;
}

export interface ModelInfo {
  name: string;
  strides: number[];
  grids: [number, number][];
}

export type Mode = "live" | "photo" | "settings";

export interface UiState {
  mode: Mode;
  settings: Settings;
  lastResponse: DetectResponse | null;
  fps: number;
}
