/**
 * Live-detection frame loop.
 *
 * At most one request is in flight: while the server is busy, ticks are
 * dropped (never queued), so a slow server only lowers the effective fps
 * and the UI thread stays responsive.
 */

import type { DetectResponse } from "./types.js";

export interface FrameLoopCallbacks {
  /** Grab the current frame; null when the camera is not ready. */
  captureFrame: () => Blob | null;
  /** Send one frame to the server. */
  detect: (frame: Blob) => Promise<DetectResponse>;
  /** Fresh detections arrived. */
  onResult: (response: DetectResponse, fps: number) => void;
  /** A request failed; the loop keeps running. */
  onError: (error: unknown) => void;
  /** Clock in milliseconds; injectable for tests. */
  now?: () => number;
}

export class FrameLoop {
  private busy = false;
  private running = false;
  private lastResultAt: number | null = null;
  private fpsEstimate = 0;

  constructor(private readonly callbacks: FrameLoopCallbacks) {}

  get inFlight(): boolean {
    return this.busy;
  }

  get fps(): number {
    return this.fpsEstimate;
  }

  start(): void {
    this.running = true;
  }

  stop(): void {
    this.running = false;
  }

  /**
   * Advance the loop by one frame; call on each animation tick.
   * Returns true when a request was started, false when the tick was
   * dropped (loop stopped, camera not ready, or a request in flight).
   */
  tick(): boolean {
    if (!this.running || this.busy) return false;
    const frame = this.callbacks.captureFrame();
    if (frame === null) return false;

    this.busy = true;
    this.callbacks
      .detect(frame)
      .then((response) => {
        const now = (this.callbacks.now ?? Date.now)();
        if (this.lastResultAt !== null && now > this.lastResultAt) {
          const instant = 1000 / (now - this.lastResultAt);
          // Exponential smoothing keeps the readout steady.
          this.fpsEstimate = this.fpsEstimate === 0 ? instant : 0.8 * this.fpsEstimate + 0.2 * instant;
        }
        this.lastResultAt = now;
        if (this.running) this.callbacks.onResult(response, this.fpsEstimate);
      })
      .catch((error) => {
        if (this.running) this.callbacks.onError(error);
      })
      .finally(() => {
        this.busy = false;
      });
    return true;
  }
}
