/** Thin client for the restoration service HTTP API. */

export interface ChannelMeans {
  blur: number;
  noise: number;
  jpeg: number;
}

export interface EstimateResult {
  pngBytes: Uint8Array;
  means: ChannelMeans | null;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function errorMessage(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (body && typeof body.error === "string") return body.error;
  } catch {
    /* non-JSON error body */
  }
  return `request failed with status ${response.status}`;
}

export class ServiceClient {
  constructor(readonly baseUrl: string = "") {}

  async health(): Promise<unknown> {
    const r = await fetch(`${this.baseUrl}/api/health`);
    if (!r.ok) throw new ApiError(r.status, await errorMessage(r));
    return r.json();
  }

  async estimate(imagePng: Uint8Array | Blob): Promise<EstimateResult> {
    const form = new FormData();
    form.append("image", new Blob([imagePng as BlobPart], { type: "image/png" }), "image.png");
    const r = await fetch(`${this.baseUrl}/api/estimate`, { method: "POST", body: form });
    if (!r.ok) throw new ApiError(r.status, await errorMessage(r));
    const meansHeader = r.headers.get("X-Channel-Means");
    return {
      pngBytes: new Uint8Array(await r.arrayBuffer()),
      means: meansHeader ? (JSON.parse(meansHeader) as ChannelMeans) : null,
    };
  }

  async restore(
    imagePng: Uint8Array | Blob,
    mapPng?: Uint8Array,
    signal?: AbortSignal,
  ): Promise<Uint8Array> {
    const form = new FormData();
    form.append("image", new Blob([imagePng as BlobPart], { type: "image/png" }), "image.png");
    if (mapPng !== undefined) {
      form.append("map", new Blob([mapPng as BlobPart], { type: "image/png" }), "map.png");
    }
    const r = await fetch(`${this.baseUrl}/api/restore`, { method: "POST", body: form, signal });
    if (!r.ok) throw new ApiError(r.status, await errorMessage(r));
    return new Uint8Array(await r.arrayBuffer());
  }
}
