/**
 * Studio app: upload an image, prefill the attribute map from the estimator,
 * paint per-region degradation strengths, restore, compare, repaint.
 *
 * All pixel processing happens server-side; this file only wires the DOM to
 * the session/raster/brush modules and renders overlays.
 */

import { ServiceClient } from "./api.js";
import { BrushState, StrokePoint } from "./brush.js";
import { AttributeRaster, CHANNELS, ChannelName } from "./raster.js";
import { Session } from "./session.js";

const client = new ServiceClient("");

let session: Session | null = null;
let imageBytes: Uint8Array | null = null;
let imageBitmap: ImageBitmap | null = null;
let restoredBytes: Uint8Array | null = null;
let restoredBitmap: ImageBitmap | null = null;
let inflightRestore: AbortController | null = null;

const $ = <T extends HTMLElement>(id: string): T => document.getElementById(id) as T;

const imageCanvas = $("image-canvas") as unknown as HTMLCanvasElement;
const overlayCanvas = $("overlay-canvas") as unknown as HTMLCanvasElement;
const compareCanvas = $("compare-canvas") as unknown as HTMLCanvasElement;
const errorBanner = $("error-banner");

function showError(message: string): void {
  errorBanner.textContent = message;
  errorBanner.style.display = "block";
  window.setTimeout(() => {
    errorBanner.style.display = "none";
  }, 6000);
}

function brushFromControls(): BrushState {
  return {
    channel: ($("brush-channel") as unknown as HTMLSelectElement).value as ChannelName,
    strength: Number(($("brush-strength") as unknown as HTMLInputElement).value),
    radius: Number(($("brush-radius") as unknown as HTMLInputElement).value),
    mode: ($("brush-mode") as unknown as HTMLSelectElement).value as "add" | "erase",
  };
}

function renderOverlay(): void {
  if (!session) return;
  const { width, height } = session.raster;
  overlayCanvas.width = width;
  overlayCanvas.height = height;
  const ctx = overlayCanvas.getContext("2d")!;
  const img = ctx.createImageData(width, height);
  const plane = width * height;
  const opacity = Number(($("overlay-opacity") as unknown as HTMLInputElement).value);
  for (let i = 0; i < plane; i++) {
    img.data[i * 4 + 0] = Math.round(session.raster.data[i] * 255);
    img.data[i * 4 + 1] = Math.round(session.raster.data[plane + i] * 255);
    img.data[i * 4 + 2] = Math.round(session.raster.data[2 * plane + i] * 255);
    img.data[i * 4 + 3] = Math.round(opacity * 255);
  }
  ctx.putImageData(img, 0, 0);
}

function renderImage(): void {
  if (!imageBitmap) return;
  imageCanvas.width = imageBitmap.width;
  imageCanvas.height = imageBitmap.height;
  imageCanvas.getContext("2d")!.drawImage(imageBitmap, 0, 0);
}

function renderCompare(): void {
  if (!imageBitmap) return;
  compareCanvas.width = imageBitmap.width;
  compareCanvas.height = imageBitmap.height;
  const ctx = compareCanvas.getContext("2d")!;
  ctx.drawImage(imageBitmap, 0, 0);
  if (restoredBitmap) {
    const split = Number(($("split-slider") as unknown as HTMLInputElement).value);
    const x = Math.round((split / 100) * compareCanvas.width);
    ctx.save();
    ctx.beginPath();
    ctx.rect(x, 0, compareCanvas.width - x, compareCanvas.height);
    ctx.clip();
    ctx.drawImage(restoredBitmap, 0, 0);
    ctx.restore();
    ctx.fillStyle = "#fff";
    ctx.fillRect(x - 1, 0, 2, compareCanvas.height);
  }
}

async function bitmapFromBytes(bytes: Uint8Array): Promise<ImageBitmap> {
  return createImageBitmap(new Blob([bytes as unknown as BlobPart], { type: "image/png" }));
}

/** Decode a PNG into the raster via the browser's native decoder. */
async function rasterFromPngBytes(bytes: Uint8Array): Promise<AttributeRaster> {
  const bitmap = await bitmapFromBytes(bytes);
  const canvas = document.createElement("canvas");
  canvas.width = bitmap.width;
  canvas.height = bitmap.height;
  const ctx = canvas.getContext("2d")!;
  ctx.drawImage(bitmap, 0, 0);
  const rgba = ctx.getImageData(0, 0, bitmap.width, bitmap.height).data;
  const rgb = new Uint8Array(bitmap.width * bitmap.height * 3);
  for (let i = 0; i < bitmap.width * bitmap.height; i++) {
    rgb[i * 3 + 0] = rgba[i * 4 + 0];
    rgb[i * 3 + 1] = rgba[i * 4 + 1];
    rgb[i * 3 + 2] = rgba[i * 4 + 2];
  }
  return AttributeRaster.fromRgbBytes(rgb, bitmap.width, bitmap.height);
}

async function onUpload(file: File): Promise<void> {
  imageBytes = new Uint8Array(await file.arrayBuffer());
  imageBitmap = await bitmapFromBytes(imageBytes);
  session = new Session(imageBitmap.width, imageBitmap.height);
  restoredBytes = null;
  restoredBitmap = null;
  renderImage();
  renderOverlay();
  renderCompare();
}

async function onPrefill(): Promise<void> {
  if (!session || !imageBytes) {
    showError("upload an image first");
    return;
  }
  try {
    const result = await client.estimate(imageBytes);
    const raster = await rasterFromPngBytes(result.pngBytes);
    session.setFromServerMap(raster, result.pngBytes);
    renderOverlay();
    if (result.means) {
      $("means-readout").textContent =
        `estimated means — blur ${result.means.blur.toFixed(3)}, ` +
        `noise ${result.means.noise.toFixed(3)}, jpeg ${result.means.jpeg.toFixed(3)}`;
    }
  } catch (e) {
    showError(`estimation failed: ${(e as Error).message}`); // map left unchanged
  }
}

async function onRestore(): Promise<void> {
  if (!session || !imageBytes) {
    showError("upload an image first");
    return;
  }
  if (inflightRestore) inflightRestore.abort(); // cancel, newest request wins
  const controller = new AbortController();
  inflightRestore = controller;
  try {
    const bytes = await client.restore(imageBytes, session.exportMapPng(), controller.signal);
    restoredBytes = bytes;
    restoredBitmap = await bitmapFromBytes(bytes);
    renderCompare();
  } catch (e) {
    if ((e as Error).name !== "AbortError") {
      showError(`restore failed: ${(e as Error).message}`);
    }
  } finally {
    if (inflightRestore === controller) inflightRestore = null;
  }
}

function download(bytes: Uint8Array, filename: string): void {
  const url = URL.createObjectURL(new Blob([bytes as unknown as BlobPart], { type: "image/png" }));
  const a = document.createElement("a");
  a.href = url;
  a.download = filename;
  a.click();
  URL.revokeObjectURL(url);
}

function canvasPoint(event: MouseEvent): StrokePoint {
  const rect = overlayCanvas.getBoundingClientRect();
  return {
    x: ((event.clientX - rect.left) / rect.width) * overlayCanvas.width,
    y: ((event.clientY - rect.top) / rect.height) * overlayCanvas.height,
  };
}

function wireEvents(): void {
  ($("file-input") as unknown as HTMLInputElement).addEventListener("change", (e) => {
    const file = (e.target as HTMLInputElement).files?.[0];
    if (file) void onUpload(file);
  });
  $("prefill-button").addEventListener("click", () => void onPrefill());
  $("restore-button").addEventListener("click", () => void onRestore());
  $("undo-button").addEventListener("click", () => {
    if (session?.undo()) renderOverlay();
  });
  $("redo-button").addEventListener("click", () => {
    if (session?.redo()) renderOverlay();
  });
  $("export-map-button").addEventListener("click", () => {
    if (session) download(session.exportMapPng(), "attribute-map.png");
  });
  $("export-restored-button").addEventListener("click", () => {
    if (restoredBytes) download(restoredBytes, "restored.png");
  });
  $("overlay-opacity").addEventListener("input", renderOverlay);
  $("split-slider").addEventListener("input", renderCompare);

  let stroke: StrokePoint[] | null = null;
  overlayCanvas.addEventListener("mousedown", (e) => {
    if (!session) return;
    stroke = [canvasPoint(e)];
  });
  overlayCanvas.addEventListener("mousemove", (e) => {
    if (stroke) stroke.push(canvasPoint(e));
  });
  const finish = () => {
    if (session && stroke) {
      session.paint(stroke, brushFromControls());
      renderOverlay();
    }
    stroke = null;
  };
  overlayCanvas.addEventListener("mouseup", finish);
  overlayCanvas.addEventListener("mouseleave", finish);

  const channelSelect = $("brush-channel") as unknown as HTMLSelectElement;
  for (const name of CHANNELS) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name;
    channelSelect.appendChild(opt);
  }
}

wireEvents();
