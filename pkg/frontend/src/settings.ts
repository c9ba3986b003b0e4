/**
 * Settings-panel state: slider clamping and optimistic updates that
 * revert when the server rejects a value.
 */

import type { ApiClient } from "./api.js";
import type { Settings } from "./types.js";

export const THRESHOLD_MIN = 0;
export const THRESHOLD_MAX = 1;

/** Keep slider values inside the server-accepted [0, 1] range. */
export function clampThreshold(value: number): number {
  if (Number.isNaN(value)) return THRESHOLD_MIN;
  return Math.min(THRESHOLD_MAX, Math.max(THRESHOLD_MIN, value));
}

export interface SettingsChange {
  settings: Settings;
  /** Present when the server rejected the update and the panel reverted. */
  error?: string;
}

export class SettingsPanel {
  private current: Settings;

  constructor(
    private readonly api: ApiClient,
    initial: Settings,
  ) {
    this.current = { ...initial };
  }

  get settings(): Settings {
    return { ...this.current };
  }

  /** Re-read server state, e.g. on page load. */
  async reload(): Promise<Settings> {
    this.current = await this.api.getSettings();
    return this.settings;
  }

  /**
   * Apply one changed field. On rejection the previous value is restored
   * and the server's message is surfaced.
   */
  async apply(patch: Partial<Settings>): Promise<SettingsChange> {
    const previous = { ...this.current };
    const next: Settings = { ...this.current, ...patch };
    if (patch.conf_threshold !== undefined) next.conf_threshold = clampThreshold(patch.conf_threshold);
    if (patch.nms_iou_threshold !== undefined) next.nms_iou_threshold = clampThreshold(patch.nms_iou_threshold);
    try {
      this.current = await this.api.putSettings(next);
      return { settings: this.settings };
    } catch (error) {
      this.current = previous;
      const message = error instanceof Error ? error.message : String(error);
      return { settings: this.settings, error: message };
    }
  }
}
