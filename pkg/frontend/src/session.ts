/**
 * Editing session: the attribute raster plus an exact-undo edit history.
 *
 * Undo records store the touched channel rectangle before and after each
 * stroke (full-raster snapshots for prefills), so undo/redo restore the
 * raster bit-for-bit. The raw bytes of the last server-provided map are kept
 * so exporting an untouched prefill returns the exact server response.
 */

import { BrushState, paintStroke, Rect, strokeBounds, StrokePoint } from "./brush.js";
import { AttributeRaster, channelIndex } from "./raster.js";

export const UNDO_DEPTH = 50; // spec floor is 20

interface RectEdit {
  kind: "rect";
  channel: number;
  rect: Rect;
  before: Float32Array;
  after: Float32Array;
}

interface FullEdit {
  kind: "full";
  before: AttributeRaster;
  after: AttributeRaster;
}

type Edit = RectEdit | FullEdit;

export class Session {
  raster: AttributeRaster;
  private undoStack: Edit[] = [];
  private redoStack: Edit[] = [];
  private serverMapBytes: Uint8Array | null = null;
  private dirtySinceServerMap = false;

  constructor(width: number, height: number) {
    this.raster = new AttributeRaster(width, height);
  }

  get undoDepth(): number {
    return this.undoStack.length;
  }

  private push(edit: Edit): void {
    this.undoStack.push(edit);
    if (this.undoStack.length > UNDO_DEPTH) this.undoStack.shift();
    this.redoStack = [];
  }

  paint(path: StrokePoint[], brush: BrushState): void {
    const rect = strokeBounds(this.raster, path, brush);
    if (!rect) return;
    const channel = channelIndex(brush.channel);
    const before = this.raster.copyRect(channel, rect.x0, rect.y0, rect.w, rect.h);
    paintStroke(this.raster, path, brush);
    const after = this.raster.copyRect(channel, rect.x0, rect.y0, rect.w, rect.h);
    this.push({ kind: "rect", channel, rect, before, after });
    this.dirtySinceServerMap = true;
  }

  /** Replace the whole raster (estimator prefill); undoable like any edit. */
  setFromServerMap(raster: AttributeRaster, pngBytes: Uint8Array): void {
    if (raster.width !== this.raster.width || raster.height !== this.raster.height) {
      throw new Error(
        `map ${raster.width}x${raster.height} does not match session ` +
          `${this.raster.width}x${this.raster.height}`,
      );
    }
    const before = this.raster.clone();
    this.raster = raster.clone();
    this.push({ kind: "full", before, after: raster.clone() });
    this.serverMapBytes = pngBytes.slice();
    this.dirtySinceServerMap = false;
  }

  clearChannel(channel: number): void {
    const before = this.raster.copyRect(channel, 0, 0, this.raster.width, this.raster.height);
    const zero = new Float32Array(this.raster.width * this.raster.height);
    this.raster.writeRect(channel, 0, 0, this.raster.width, this.raster.height, zero);
    this.push({
      kind: "rect",
      channel,
      rect: { x0: 0, y0: 0, w: this.raster.width, h: this.raster.height },
      before,
      after: zero,
    });
    this.dirtySinceServerMap = true;
  }

  private apply(edit: Edit, direction: "before" | "after"): void {
    if (edit.kind === "full") {
      this.raster = edit[direction].clone();
    } else {
      const values = edit[direction];
      this.raster.writeRect(edit.channel, edit.rect.x0, edit.rect.y0, edit.rect.w, edit.rect.h, values);
    }
  }

  undo(): boolean {
    const edit = this.undoStack.pop();
    if (!edit) return false;
    this.apply(edit, "before");
    this.redoStack.push(edit);
    this.dirtySinceServerMap = true;
    return true;
  }

  redo(): boolean {
    const edit = this.redoStack.pop();
    if (!edit) return false;
    this.apply(edit, "after");
    this.undoStack.push(edit);
    this.dirtySinceServerMap = true;
    return true;
  }

  /**
   * Map as PNG bytes. An untouched prefill exports the exact bytes the
   * service returned; anything else is encoded from the raster (8-bit).
   */
  exportMapPng(): Uint8Array {
    if (this.serverMapBytes && !this.dirtySinceServerMap) {
      return this.serverMapBytes.slice();
    }
    return this.raster.toPngBytes();
  }
}
