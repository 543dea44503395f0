/** Brush model: circular stamps along a stroke path on a single channel. */

import { AttributeRaster, ChannelName, channelIndex } from "./raster.js";

export interface BrushState {
  channel: ChannelName;
  strength: number; // [0, 1]
  radius: number; // pixels
  mode: "add" | "erase";
}

export interface StrokePoint {
  x: number;
  y: number;
}

export interface Rect {
  x0: number;
  y0: number;
  w: number;
  h: number;
}

function clampRect(raster: AttributeRaster, x0: number, y0: number, x1: number, y1: number): Rect | null {
  const cx0 = Math.max(0, Math.floor(x0));
  const cy0 = Math.max(0, Math.floor(y0));
  const cx1 = Math.min(raster.width - 1, Math.ceil(x1));
  const cy1 = Math.min(raster.height - 1, Math.ceil(y1));
  if (cx1 < cx0 || cy1 < cy0) return null;
  return { x0: cx0, y0: cy0, w: cx1 - cx0 + 1, h: cy1 - cy0 + 1 };
}

/** Bounding box a stroke will touch, clamped to the raster (null if outside). */
export function strokeBounds(raster: AttributeRaster, path: StrokePoint[], brush: BrushState): Rect | null {
  if (path.length === 0) return null;
  let minX = Infinity;
  let minY = Infinity;
  let maxX = -Infinity;
  let maxY = -Infinity;
  for (const p of path) {
    minX = Math.min(minX, p.x - brush.radius);
    minY = Math.min(minY, p.y - brush.radius);
    maxX = Math.max(maxX, p.x + brush.radius);
    maxY = Math.max(maxY, p.y + brush.radius);
  }
  return clampRect(raster, minX, minY, maxX, maxY);
}

function stamp(raster: AttributeRaster, cx: number, cy: number, brush: BrushState): void {
  const channel = channelIndex(brush.channel);
  const value = brush.mode === "erase" ? 0 : Math.min(Math.max(brush.strength, 0), 1);
  const r = brush.radius;
  const rect = clampRect(raster, cx - r, cy - r, cx + r, cy + r);
  if (!rect) return;
  for (let y = rect.y0; y < rect.y0 + rect.h; y++) {
    for (let x = rect.x0; x < rect.x0 + rect.w; x++) {
      const dx = x - cx;
      const dy = y - cy;
      if (dx * dx + dy * dy <= r * r) {
        raster.set(channel, x, y, value);
      }
    }
  }
}

/** Stamps along the path, interpolating segments so strokes stay solid. */
export function paintStroke(raster: AttributeRaster, path: StrokePoint[], brush: BrushState): void {
  if (path.length === 0) return;
  stamp(raster, path[0].x, path[0].y, brush);
  for (let i = 1; i < path.length; i++) {
    const a = path[i - 1];
    const b = path[i];
    const dist = Math.hypot(b.x - a.x, b.y - a.y);
    const steps = Math.max(1, Math.ceil(dist));
    for (let s = 1; s <= steps; s++) {
      const t = s / steps;
      stamp(raster, a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), brush);
    }
  }
}
