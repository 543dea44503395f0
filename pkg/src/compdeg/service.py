"""HTTP service exposing estimation and restoration to the studio UI.

Endpoints (JSON/multipart):
  GET  /api/health              -> {status, estimator, restorer}
  POST /api/estimate  (image)   -> attribute-map PNG; channel means in the
                                   X-Channel-Means header as JSON
  POST /api/restore   (image, optional map) -> restored PNG; blind when no
                                   map is supplied

Errors: 400 malformed upload, 413 image above the configured size cap,
422 map/image size mismatch. Internal failures return a generic 500.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, Request, UploadFile
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from . import imgio
from .attrs import CHANNEL_NAMES, image_to_map, map_to_image
from .evaluation import blind_restore_8bit
from .networks import NetworkWeights, forward_restore

DEFAULT_MAX_DIM = 2048


class _UploadError(Exception):
    def __init__(self, status: int, message: str):
        self.status = status
        self.message = message


def _decode_upload(data: bytes, max_dim: int, what: str) -> np.ndarray:
    if not data:
        raise _UploadError(400, f"missing {what} upload")
    try:
        img = imgio.decode_image(data)
    except Exception:
        raise _UploadError(400, f"malformed {what} upload: not a decodable image")
    if img.shape[1] > max_dim or img.shape[2] > max_dim:
        raise _UploadError(
            413, f"{what} is {img.shape[2]}x{img.shape[1]}, larger than {max_dim}x{max_dim}"
        )
    return img


def _arch_summary(w: NetworkWeights) -> dict:
    return {
        "name": w.metadata.get("name", "unknown"),
        "layers": len(w.layers),
        "dilations": [l.dilation for l in w.layers],
        "input_channels": w.architecture.input_channels,
        "output_channels": w.architecture.output_channels,
        "input_skip": w.architecture.input_skip,
        "parameters": w.parameter_count(),
    }


def create_app(
    est_weights: NetworkWeights,
    res_weights: NetworkWeights,
    max_dim: int = DEFAULT_MAX_DIM,
    static_dir: str | Path | None = None,
) -> FastAPI:
    """App over immutable in-memory weights; per-request state only."""
    app = FastAPI(title="compdeg service")

    @app.exception_handler(_UploadError)
    async def upload_error_handler(request: Request, exc: _UploadError):
        return JSONResponse(status_code=exc.status, content={"error": exc.message})

    @app.exception_handler(Exception)
    async def internal_error_handler(request: Request, exc: Exception):
        return JSONResponse(status_code=500, content={"error": "internal error"})

    @app.get("/api/health")
    async def health():
        return {
            "status": "ok",
            "estimator": _arch_summary(est_weights),
            "restorer": _arch_summary(res_weights),
        }

    @app.post("/api/estimate")
    async def estimate(image: UploadFile = File(...)):
        img = _decode_upload(await image.read(), max_dim, "image")
        from .networks import forward_estimate

        clamped = np.clip(forward_estimate(est_weights, img), 0.0, 1.0).astype(np.float32)
        means = {name: float(clamped[c].mean()) for c, name in enumerate(CHANNEL_NAMES)}
        png = imgio.encode_png(map_to_image(clamped))
        return Response(
            content=png,
            media_type="image/png",
            headers={"X-Channel-Means": json.dumps(means)},
        )

    @app.post("/api/restore")
    async def restore(image: UploadFile = File(...), map: UploadFile | None = File(None)):
        img = _decode_upload(await image.read(), max_dim, "image")
        if map is not None:
            map_img = _decode_upload(await map.read(), max_dim, "map")
            if map_img.shape[1:] != img.shape[1:]:
                raise _UploadError(
                    422,
                    f"map size {map_img.shape[2]}x{map_img.shape[1]} does not match "
                    f"image {img.shape[2]}x{img.shape[1]}",
                )
            restored = forward_restore(res_weights, img, image_to_map(map_img))
        else:
            restored, _ = blind_restore_8bit(est_weights, res_weights, img)
        return Response(content=imgio.encode_png(restored), media_type="image/png")

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="studio")

    return app
