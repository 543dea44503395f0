/**
 * The editable attribute raster: 3 channels (blur, noise, jpeg) of
 * per-pixel strengths in [0, 1], stored planar as Float32Array.
 */

import { decodePng, encodePng, InflateFn } from "./png.js";

export const CHANNELS = ["blur", "noise", "jpeg"] as const;
export type ChannelName = (typeof CHANNELS)[number];

export function channelIndex(name: ChannelName): number {
  return CHANNELS.indexOf(name);
}

export class AttributeRaster {
  readonly width: number;
  readonly height: number;
  readonly data: Float32Array; // planar: [channel][y][x]

  constructor(width: number, height: number, data?: Float32Array) {
    if (width < 1 || height < 1) throw new Error(`bad raster size ${width}x${height}`);
    this.width = width;
    this.height = height;
    const n = 3 * width * height;
    if (data !== undefined) {
      if (data.length !== n) throw new Error(`data length ${data.length}, expected ${n}`);
      this.data = data;
    } else {
      this.data = new Float32Array(n);
    }
  }

  get(channel: number, x: number, y: number): number {
    return this.data[channel * this.width * this.height + y * this.width + x];
  }

  set(channel: number, x: number, y: number, value: number): void {
    const v = Math.min(Math.max(value, 0), 1);
    this.data[channel * this.width * this.height + y * this.width + x] = v;
  }

  clone(): AttributeRaster {
    return new AttributeRaster(this.width, this.height, this.data.slice());
  }

  equals(other: AttributeRaster): boolean {
    if (other.width !== this.width || other.height !== this.height) return false;
    for (let i = 0; i < this.data.length; i++) {
      if (this.data[i] !== other.data[i]) return false;
    }
    return true;
  }

  /** Simple per-channel content hash for change detection in tests/UI. */
  channelChecksum(channel: number): number {
    const plane = this.width * this.height;
    let h = 0;
    for (let i = 0; i < plane; i++) {
      const v = this.data[channel * plane + i];
      h = (h * 31 + ((v * 255.5) | 0)) >>> 0;
    }
    return h;
  }

  /** Copy a rectangular region of one channel (for undo records). */
  copyRect(channel: number, x0: number, y0: number, w: number, h: number): Float32Array {
    const out = new Float32Array(w * h);
    const plane = channel * this.width * this.height;
    for (let y = 0; y < h; y++) {
      for (let x = 0; x < w; x++) {
        out[y * w + x] = this.data[plane + (y0 + y) * this.width + (x0 + x)];
      }
    }
    return out;
  }

  writeRect(channel: number, x0: number, y0: number, w: number, h: number, values: Float32Array): void {
    const plane = channel * this.width * this.height;
    for (let y = 0; y < h; y++) {
      for (let x = 0; x < w; x++) {
        this.data[plane + (y0 + y) * this.width + (x0 + x)] = values[y * w + x];
      }
    }
  }

  /** Map channels to RGB bytes (quantized to 8 bits, the export format). */
  toRgbBytes(): Uint8Array {
    const plane = this.width * this.height;
    const rgb = new Uint8Array(plane * 3);
    for (let i = 0; i < plane; i++) {
      for (let c = 0; c < 3; c++) {
        const v = Math.min(Math.max(this.data[c * plane + i], 0), 1);
        rgb[i * 3 + c] = Math.round(v * 255);
      }
    }
    return rgb;
  }

  toPngBytes(): Uint8Array {
    return encodePng(this.toRgbBytes(), this.width, this.height);
  }

  static fromRgbBytes(rgb: Uint8Array, width: number, height: number): AttributeRaster {
    const raster = new AttributeRaster(width, height);
    const plane = width * height;
    for (let i = 0; i < plane; i++) {
      for (let c = 0; c < 3; c++) {
        raster.data[c * plane + i] = rgb[i * 3 + c] / 255;
      }
    }
    return raster;
  }

  static fromPngBytes(bytes: Uint8Array, inflate: InflateFn): AttributeRaster {
    const { width, height, rgb } = decodePng(bytes, inflate);
    return AttributeRaster.fromRgbBytes(rgb, width, height);
  }
}
