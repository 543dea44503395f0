"""The two fully convolutional architectures and their persistence format.

Both networks share a 7-layer dilated 3x3 backbone (dilations 1,2,3,4,3,2,1,
64 hidden channels, ReLU everywhere except the last layer). The estimation
net maps an RGB image to a raw 3-channel attribute map; the restoration net
maps the 6-channel concat of RGB and attribute map to a residual that is
added back onto the RGB input through a skip connection.

Weight files: magic "CDNW", then a little-endian uint32 version, a uint32
header length, a UTF-8 JSON header (architecture, metadata, per-layer byte
offsets, CRC32 of the payload), then the raw float32 payload — per layer the
weights in (out, in, kh, kw) order followed by the biases.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .attrs import N_CHANNELS
from .tensor import (
    ConvLayer,
    conv2d_backward,
    conv2d_forward,
    relu_backward,
    relu_forward,
)

FLOAT = np.float32

MAGIC = b"CDNW"
FORMAT_VERSION = 1

BACKBONE_DILATIONS = (1, 2, 3, 4, 3, 2, 1)
HIDDEN_CHANNELS = 64


class WeightsFormatError(ValueError):
    """Weight file fails validation (magic, version, shape, or checksum)."""


@dataclass(frozen=True)
class LayerSpec:
    in_ch: int
    out_ch: int
    dilation: int
    relu: bool


@dataclass(frozen=True)
class ArchitectureSpec:
    layers: tuple[LayerSpec, ...]
    input_channels: int
    output_channels: int
    input_skip: bool

    def __post_init__(self):
        if not self.layers:
            raise ValueError("architecture needs at least one layer")
        if self.layers[0].in_ch != self.input_channels:
            raise ValueError("input_channels does not match first layer")
        if self.layers[-1].out_ch != self.output_channels:
            raise ValueError("output_channels does not match last layer")
        for a, b in zip(self.layers, self.layers[1:]):
            if a.out_ch != b.in_ch:
                raise ValueError(f"channel mismatch between layers: {a} -> {b}")

    def to_json_dict(self) -> dict:
        return {
            "layers": [
                {"in_ch": l.in_ch, "out_ch": l.out_ch, "dilation": l.dilation, "relu": l.relu}
                for l in self.layers
            ],
            "input_channels": self.input_channels,
            "output_channels": self.output_channels,
            "input_skip": self.input_skip,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ArchitectureSpec":
        layers = tuple(
            LayerSpec(int(l["in_ch"]), int(l["out_ch"]), int(l["dilation"]), bool(l["relu"]))
            for l in d["layers"]
        )
        return cls(
            layers=layers,
            input_channels=int(d["input_channels"]),
            output_channels=int(d["output_channels"]),
            input_skip=bool(d["input_skip"]),
        )


def _backbone(in_ch: int, out_ch: int) -> tuple[LayerSpec, ...]:
    layers = []
    prev = in_ch
    for i, d in enumerate(BACKBONE_DILATIONS):
        last = i == len(BACKBONE_DILATIONS) - 1
        layers.append(LayerSpec(prev, out_ch if last else HIDDEN_CHANNELS, d, relu=not last))
        prev = HIDDEN_CHANNELS
    return tuple(layers)


def estimation_arch() -> ArchitectureSpec:
    return ArchitectureSpec(
        layers=_backbone(3, N_CHANNELS),
        input_channels=3,
        output_channels=N_CHANNELS,
        input_skip=False,
    )


def restoration_arch() -> ArchitectureSpec:
    return ArchitectureSpec(
        layers=_backbone(3 + N_CHANNELS, 3),
        input_channels=3 + N_CHANNELS,
        output_channels=3,
        input_skip=True,
    )


@dataclass
class NetworkWeights:
    architecture: ArchitectureSpec
    layers: list[ConvLayer]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.layers) != len(self.architecture.layers):
            raise ValueError(
                f"layer count {len(self.layers)} does not match architecture "
                f"{len(self.architecture.layers)}"
            )
        for i, (conv, spec) in enumerate(zip(self.layers, self.architecture.layers)):
            if conv.weights.shape != (spec.out_ch, spec.in_ch, 3, 3) or conv.dilation != spec.dilation:
                raise ValueError(
                    f"layer {i} shape {conv.weights.shape} dilation {conv.dilation} does not "
                    f"match architecture {spec}"
                )

    def parameter_count(self) -> int:
        return sum(l.parameter_count() for l in self.layers)


def init_network(arch: ArchitectureSpec, seed: int) -> NetworkWeights:
    """He-normal weights (std sqrt(2/fan_in)), zero biases, deterministic per seed."""
    rng = np.random.default_rng(seed)
    layers = []
    for spec in arch.layers:
        fan_in = spec.in_ch * 9
        w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(spec.out_ch, spec.in_ch, 3, 3))
        layers.append(
            ConvLayer(weights=w.astype(FLOAT), bias=np.zeros(spec.out_ch, FLOAT), dilation=spec.dilation)
        )
    return NetworkWeights(architecture=arch, layers=layers, metadata={"seed": seed})


def net_forward(w: NetworkWeights, x: np.ndarray, want_cache: bool = False):
    """Batched forward pass over (n, c, h, w). Returns raw output (no clamp).

    With want_cache=True also returns the per-layer (input, pre-activation)
    pairs that net_backward needs.
    """
    if x.ndim != 4 or x.shape[1] != w.architecture.input_channels:
        raise ValueError(
            f"input shape {x.shape} does not match architecture input channels "
            f"{w.architecture.input_channels}"
        )
    cache = []
    cur = x
    for spec, layer in zip(w.architecture.layers, w.layers):
        z = conv2d_forward(cur, layer)
        if want_cache:
            cache.append((cur, z))
        cur = relu_forward(z) if spec.relu else z
    if w.architecture.input_skip:
        cur = cur + x[:, :3]
    return (cur, cache) if want_cache else cur


def net_backward(w: NetworkWeights, cache: list, upstream: np.ndarray):
    """Gradients of a scalar loss w.r.t. every layer's weights and biases.

    upstream is the loss gradient at the network output. The input skip
    connection does not touch any parameter, so it needs no special handling
    here. Returns a list of (grad_weights, grad_bias) in layer order.
    """
    grads: list = [None] * len(w.layers)
    down = upstream
    for i in range(len(w.layers) - 1, -1, -1):
        x_in, z = cache[i]
        if w.architecture.layers[i].relu:
            down = relu_backward(z, down)
        down, gw, gb = conv2d_backward(x_in, w.layers[i], down)
        grads[i] = (gw, gb)
    return grads


def _require_estimator(w: NetworkWeights) -> None:
    a = w.architecture
    if a.input_channels != 3 or a.output_channels != N_CHANNELS or a.input_skip:
        raise ValueError(
            "architecture mismatch: expected an estimation net "
            f"(in 3, out {N_CHANNELS}, no skip), got in {a.input_channels}, "
            f"out {a.output_channels}, skip {a.input_skip}"
        )


def _require_restorer(w: NetworkWeights) -> None:
    a = w.architecture
    if a.input_channels != 3 + N_CHANNELS or a.output_channels != 3 or not a.input_skip:
        raise ValueError(
            "architecture mismatch: expected a restoration net "
            f"(in {3 + N_CHANNELS}, out 3, skip), got in {a.input_channels}, "
            f"out {a.output_channels}, skip {a.input_skip}"
        )


def forward_estimate(w: NetworkWeights, img: np.ndarray) -> np.ndarray:
    """Raw (unclamped) attribute map for one (3, h, w) image."""
    _require_estimator(w)
    if img.ndim != 3 or img.shape[0] != 3:
        raise ValueError(f"image must be (3, h, w), got {img.shape}")
    return net_forward(w, img[None].astype(FLOAT))[0]


def forward_restore(w: NetworkWeights, img: np.ndarray, attr_map: np.ndarray) -> np.ndarray:
    """Restored image: clamp(img + residual(concat(img, attrs)), 0, 1)."""
    _require_restorer(w)
    if img.ndim != 3 or img.shape[0] != 3:
        raise ValueError(f"image must be (3, h, w), got {img.shape}")
    if attr_map.shape != (N_CHANNELS,) + img.shape[1:]:
        raise ValueError(
            f"attribute map shape {attr_map.shape} does not match image {img.shape}"
        )
    x = np.concatenate([img, attr_map], axis=0)[None].astype(FLOAT)
    out = net_forward(w, x)[0]
    return np.clip(out, 0.0, 1.0).astype(FLOAT)


def save_weights(w: NetworkWeights, path: str | Path) -> None:
    chunks = []
    offsets = []
    pos = 0
    for layer in w.layers:
        offsets.append(pos)
        wb = layer.weights.astype("<f4").tobytes()
        bb = layer.bias.astype("<f4").tobytes()
        chunks.append(wb + bb)
        pos += len(wb) + len(bb)
    payload = b"".join(chunks)
    header = {
        "architecture": w.architecture.to_json_dict(),
        "metadata": w.metadata,
        "layer_offsets": offsets,
        "payload_crc32": zlib.crc32(payload) & 0xFFFFFFFF,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", FORMAT_VERSION, len(header_bytes)))
        f.write(header_bytes)
        f.write(payload)


def load_weights(path: str | Path) -> NetworkWeights:
    data = Path(path).read_bytes()
    if len(data) < 12:
        raise WeightsFormatError(f"truncated file: {len(data)} bytes, need at least 12")
    if data[:4] != MAGIC:
        raise WeightsFormatError(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
    version, header_len = struct.unpack("<II", data[4:12])
    if version != FORMAT_VERSION:
        raise WeightsFormatError(f"unsupported version {version}, expected {FORMAT_VERSION}")
    if len(data) < 12 + header_len:
        raise WeightsFormatError("truncated file: header extends past end of file")
    try:
        header = json.loads(data[12 : 12 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise WeightsFormatError(f"unreadable header: {e}") from e
    try:
        arch = ArchitectureSpec.from_json_dict(header["architecture"])
        offsets = header["layer_offsets"]
        crc_expected = header["payload_crc32"]
        metadata = header.get("metadata", {})
    except (KeyError, TypeError, ValueError) as e:
        raise WeightsFormatError(f"invalid header field: {e}") from e

    payload = data[12 + header_len :]
    expected_size = sum((s.out_ch * s.in_ch * 9 + s.out_ch) * 4 for s in arch.layers)
    if len(payload) != expected_size:
        raise WeightsFormatError(
            f"payload size {len(payload)} does not match architecture ({expected_size} bytes)"
        )
    if (zlib.crc32(payload) & 0xFFFFFFFF) != crc_expected:
        raise WeightsFormatError("payload_crc32 mismatch: file is corrupt")
    if len(offsets) != len(arch.layers):
        raise WeightsFormatError("layer_offsets length does not match architecture")

    layers = []
    for spec, off in zip(arch.layers, offsets):
        n_w = spec.out_ch * spec.in_ch * 9
        wts = np.frombuffer(payload, dtype="<f4", count=n_w, offset=off)
        bias = np.frombuffer(payload, dtype="<f4", count=spec.out_ch, offset=off + n_w * 4)
        layers.append(
            ConvLayer(
                weights=wts.reshape(spec.out_ch, spec.in_ch, 3, 3).copy(),
                bias=bias.copy(),
                dilation=spec.dilation,
            )
        )
    return NetworkWeights(architecture=arch, layers=layers, metadata=metadata)


def flatten_params(w: NetworkWeights) -> np.ndarray:
    parts = []
    for layer in w.layers:
        parts.append(layer.weights.ravel())
        parts.append(layer.bias.ravel())
    return np.concatenate(parts)


def unflatten_params(w: NetworkWeights, flat: np.ndarray) -> None:
    """Writes a flat parameter vector back into the layers, in place."""
    pos = 0
    for layer in w.layers:
        n = layer.weights.size
        layer.weights = flat[pos : pos + n].reshape(layer.weights.shape).astype(FLOAT)
        pos += n
        n = layer.bias.size
        layer.bias = flat[pos : pos + n].astype(FLOAT)
        pos += n


def flatten_grads(grads: list) -> np.ndarray:
    parts = []
    for gw, gb in grads:
        parts.append(gw.ravel())
        parts.append(gb.ravel())
    return np.concatenate(parts)
