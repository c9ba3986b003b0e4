/** Wires the three screens (live, photo, settings) to the DOM. */

import { ApiClient, ApiError } from "./api.js";
import { FrameLoop } from "./loop.js";
import { drawDetections, visibleDetections } from "./overlay.js";
import { downloadFilename, isSupportedImage, renderAnnotated } from "./photo.js";
import { SettingsPanel, clampThreshold } from "./settings.js";
import type { Mode, Settings } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function showBanner(text: string): void {
  const banner = el<HTMLDivElement>("banner");
  banner.textContent = text;
  banner.hidden = text === "";
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const api = new ApiClient(params.get("server") ?? "", params.get("token"));

  let settings: Settings;
  try {
    settings = await api.getSettings();
  } catch (error) {
    showBanner(`Cannot reach server: ${error instanceof Error ? error.message : error}`);
    return;
  }
  const panel = new SettingsPanel(api, settings);

  // --- mode switching -------------------------------------------------
  const screens: Record<Mode, HTMLElement> = {
    live: el("screen-live"),
    photo: el("screen-photo"),
    settings: el("screen-settings"),
  };
  function setMode(mode: Mode): void {
    for (const [name, screen] of Object.entries(screens)) {
      screen.hidden = name !== mode;
    }
    if (mode !== "live") loop.stop();
  }
  el("tab-live").addEventListener("click", () => {
    setMode("live");
    void startCamera();
  });
  el("tab-photo").addEventListener("click", () => setMode("photo"));
  el("tab-settings").addEventListener("click", () => setMode("settings"));

  // --- live screen ----------------------------------------------------
  const video = el<HTMLVideoElement>("video");
  const overlay = el<HTMLCanvasElement>("overlay");
  const fpsLabel = el<HTMLSpanElement>("fps");
  const grabCanvas = document.createElement("canvas");

  function captureFrame(): Blob | null {
    if (video.readyState < video.HAVE_CURRENT_DATA || video.videoWidth === 0) return null;
    grabCanvas.width = video.videoWidth;
    grabCanvas.height = video.videoHeight;
    grabCanvas.getContext("2d")?.drawImage(video, 0, 0);
    const dataUrl = grabCanvas.toDataURL("image/jpeg", 0.8);
    const bytes = atob(dataUrl.split(",")[1]);
    const buf = new Uint8Array(bytes.length);
    for (let i = 0; i < bytes.length; i++) buf[i] = bytes.charCodeAt(i);
    return new Blob([buf], { type: "image/jpeg" });
  }

  const loop = new FrameLoop({
    captureFrame,
    detect: (frame) => api.detect(frame, "frame.jpg"),
    onResult: (response, fps) => {
      showBanner("");
      fpsLabel.textContent = fps.toFixed(1);
      overlay.width = video.clientWidth;
      overlay.height = video.clientHeight;
      const ctx = overlay.getContext("2d");
      if (ctx) drawDetections(ctx, response.detections, video.clientWidth, video.clientHeight);
    },
    onError: (error) => {
      showBanner(`Detection failed: ${error instanceof Error ? error.message : error}`);
    },
  });

  async function startCamera(): Promise<void> {
    if (video.srcObject) {
      loop.start();
      return;
    }
    try {
      video.srcObject = await navigator.mediaDevices.getUserMedia({ video: true });
      await video.play();
      loop.start();
    } catch (error) {
      showBanner(`Camera unavailable: ${error instanceof Error ? error.message : error}`);
    }
  }

  function animate(): void {
    loop.tick();
    requestAnimationFrame(animate);
  }
  requestAnimationFrame(animate);

  // --- photo screen ---------------------------------------------------
  const fileInput = el<HTMLInputElement>("photo-file");
  const photoResult = el<HTMLDivElement>("photo-result");
  const photoError = el<HTMLParagraphElement>("photo-error");

  fileInput.addEventListener("change", async () => {
    const file = fileInput.files?.[0];
    photoError.textContent = "";
    if (!file) return;
    if (!isSupportedImage(file)) {
      photoError.textContent = `Unsupported file type: ${file.type || "unknown"}`;
      return;
    }
    try {
      const response = await api.detect(file, file.name);
      const bitmap = await createImageBitmap(file);
      const shown = visibleDetections(response.detections, panel.settings.conf_threshold);
      const canvas = renderAnnotated(bitmap, shown);
      photoResult.replaceChildren(canvas);

      const link = document.createElement("a");
      link.textContent = "Download annotated PNG";
      link.href = canvas.toDataURL("image/png");
      link.download = downloadFilename(file.name);
      photoResult.appendChild(link);
    } catch (error) {
      photoError.textContent =
        error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
    }
  });

  // --- settings screen ------------------------------------------------
  const modelSelect = el<HTMLSelectElement>("setting-model");
  const confSlider = el<HTMLInputElement>("setting-conf");
  const nmsSlider = el<HTMLInputElement>("setting-nms");
  const settingsError = el<HTMLParagraphElement>("settings-error");

  for (const model of await api.getModels()) {
    const option = document.createElement("option");
    option.value = model.name;
    option.textContent = model.name;
    modelSelect.appendChild(option);
  }

  function renderSettings(current: Settings): void {
    modelSelect.value = current.model;
    confSlider.value = String(current.conf_threshold);
    nmsSlider.value = String(current.nms_iou_threshold);
    el<HTMLSpanElement>("setting-conf-value").textContent = current.conf_threshold.toFixed(2);
    el<HTMLSpanElement>("setting-nms-value").textContent = current.nms_iou_threshold.toFixed(2);
  }
  renderSettings(panel.settings);

  async function applyPatch(patch: Partial<Settings>): Promise<void> {
    const change = await panel.apply(patch);
    settingsError.textContent = change.error ?? "";
    renderSettings(change.settings);
  }

  modelSelect.addEventListener("change", () => void applyPatch({ model: modelSelect.value }));
  confSlider.addEventListener("change", () =>
    void applyPatch({ conf_threshold: clampThreshold(Number(confSlider.value)) }),
  );
  nmsSlider.addEventListener("change", () =>
    void applyPatch({ nms_iou_threshold: clampThreshold(Number(nmsSlider.value)) }),
  );

  setMode("live");
  void startCamera();
}

void boot();
