"""Dataset ingestion, patch sampling, x8 augmentation, and the training loops.

Degradations are sampled on the fly, one spec per patch, constant across the
patch. The estimator learns degraded patch -> constant truth map; the
restorer learns (degraded patch, truth map) -> clean patch through its skip
connection. Everything stochastic derives from the single config seed, so a
run is bit-reproducible.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import imgio
from .attrs import constant_map
from .degrade import DegradationSpec, degrade
from .networks import (
    NetworkWeights,
    estimation_arch,
    flatten_grads,
    flatten_params,
    init_network,
    net_backward,
    net_forward,
    restoration_arch,
    save_weights,
    unflatten_params,
)
from .tensor import AdamState, adam_step, mse_loss, sgd_step

FLOAT = np.float32

IMAGE_SUFFIXES = (".png", ".ppm")


class DatasetError(ValueError):
    """Dataset directory is missing, empty, or holds unreadable files."""


class TrainingDiverged(RuntimeError):
    """Loss became non-finite during optimization."""


@dataclass
class OptimizerConfig:
    kind: str = "adam"  # "adam" or "sgd"
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.kind not in ("adam", "sgd"):
            raise ValueError(f"optimizer kind must be 'adam' or 'sgd', got {self.kind!r}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")


@dataclass
class TrainingConfig:
    dataset_dir: str | Path = "."
    patch_size: int = 60
    batch_size: int = 128
    epochs: int = 80
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    seed: int = 0
    sigma_range: tuple[float, float] = (0.0, 3.5)
    lambda_range: tuple[float, float] = (0.0, 55.0)
    q_range: tuple[int, int] = (5, 100)
    p_no_jpeg: float = 0.10
    patches_per_epoch: int = 2048
    val_fraction: float = 0.05

    def __post_init__(self):
        if self.patch_size < 16:
            raise ValueError(f"patch_size must be >= 16, got {self.patch_size}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.patches_per_epoch < 1:
            raise ValueError(f"patches_per_epoch must be >= 1, got {self.patches_per_epoch}")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ValueError(f"val_fraction must be in [0, 1), got {self.val_fraction}")

    def to_json(self) -> str:
        d = asdict(self)
        d["dataset_dir"] = str(d["dataset_dir"])
        return json.dumps(d, indent=2, sort_keys=True)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    seconds: float


@dataclass
class TrainingHistory:
    records: list[EpochRecord] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["epoch,train_loss,val_loss,seconds"]
        for r in self.records:
            lines.append(f"{r.epoch},{r.train_loss!r},{r.val_loss!r},{r.seconds!r}")
        return "\n".join(lines) + "\n"


def load_dataset(directory: str | Path) -> list[np.ndarray]:
    """All PNG/PPM images under directory, lexicographic by name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise DatasetError(f"dataset directory not found: {directory}")
    paths = sorted(p for p in directory.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not paths:
        raise DatasetError(f"no images found in {directory}")
    images = []
    bad = []
    for p in paths:
        try:
            images.append(imgio.load_image(p))
        except Exception:
            bad.append(p.name)
    if bad:
        raise DatasetError(f"unreadable image files in {directory}: {', '.join(bad)}")
    return images


def extract_patch(img: np.ndarray, x: int, y: int, size: int) -> np.ndarray:
    """size x size crop with top-left corner at column x, row y."""
    _, h, w = img.shape
    if x < 0 or y < 0 or x + size > w or y + size > h:
        raise ValueError(f"patch ({x},{y},{size}) out of bounds for {w}x{h} image")
    return img[:, y : y + size, x : x + size].copy()


def augment8(patch: np.ndarray) -> list[np.ndarray]:
    """The 4 rotations of the patch, then the 4 rotations of its mirror."""
    if patch.shape[1] != patch.shape[2]:
        raise ValueError(f"augment8 needs a square patch, got {patch.shape}")
    out = []
    for base in (patch, patch[:, :, ::-1]):
        for k in range(4):
            out.append(np.ascontiguousarray(np.rot90(base, k=k, axes=(1, 2))))
    return out


def sample_spec(
    rng: np.random.Generator,
    sigma_range: tuple[float, float] = (0.0, 3.5),
    lambda_range: tuple[float, float] = (0.0, 55.0),
    q_range: tuple[int, int] = (5, 100),
    p_no_jpeg: float = 0.10,
) -> DegradationSpec:
    """Uniform sigma and lam, uniform integer q; JPEG skipped w.p. p_no_jpeg."""
    sigma = float(rng.uniform(*sigma_range))
    lam = float(rng.uniform(*lambda_range))
    applied = bool(rng.random() >= p_no_jpeg)
    q = int(rng.integers(q_range[0], q_range[1] + 1))
    return DegradationSpec(sigma=sigma, lam=lam, q=q, jpeg_applied=applied)


def _draw_degradations(patches, rng, ranges):
    """Per patch: sample a spec, then a 63-bit noise seed, in that order."""
    degraded, specs = [], []
    for patch in patches:
        spec = sample_spec(rng, **ranges) if ranges else sample_spec(rng)
        noise_seed = int(rng.integers(0, 2**63))
        degraded.append(degrade(patch, spec, noise_seed))
        specs.append(spec)
    return degraded, specs


def make_estimator_batch(patches, rng, **ranges):
    """(degraded inputs n x 3 x s x s, constant truth maps n x 3 x s x s)."""
    degraded, specs = _draw_degradations(patches, rng, ranges)
    x = np.stack(degraded).astype(FLOAT)
    t = np.stack(
        [constant_map(spec, p.shape[1], p.shape[2]) for spec, p in zip(specs, patches)]
    ).astype(FLOAT)
    return x, t


def make_restorer_batch(patches, rng, **ranges):
    """(degraded+truth-map inputs n x 6 x s x s, clean targets n x 3 x s x s)."""
    degraded, specs = _draw_degradations(patches, rng, ranges)
    xs = []
    for deg, spec, patch in zip(degraded, specs, patches):
        m = constant_map(spec, patch.shape[1], patch.shape[2])
        xs.append(np.concatenate([deg, m], axis=0))
    x = np.stack(xs).astype(FLOAT)
    t = np.stack(patches).astype(FLOAT)
    return x, t


def _sample_patch_pool(images, rng, config):
    """patches_per_epoch crops: random crop, then its 8 dihedral variants."""
    size = config.patch_size
    usable = [img for img in images if img.shape[1] >= size and img.shape[2] >= size]
    if not usable:
        raise DatasetError(
            f"no dataset image is at least {size}x{size} (needed for patch_size)"
        )
    pool = []
    n_crops = math.ceil(config.patches_per_epoch / 8)
    for _ in range(n_crops):
        img = usable[int(rng.integers(len(usable)))]
        _, h, w = img.shape
        x = int(rng.integers(0, w - size + 1))
        y = int(rng.integers(0, h - size + 1))
        pool.extend(augment8(extract_patch(img, x, y, size)))
    order = rng.permutation(len(pool))[: config.patches_per_epoch]
    return [pool[i] for i in order]


def _spec_ranges(config):
    return {
        "sigma_range": config.sigma_range,
        "lambda_range": config.lambda_range,
        "q_range": config.q_range,
        "p_no_jpeg": config.p_no_jpeg,
    }


def train(
    network_kind: str,
    config: TrainingConfig,
    out_path: str | Path | None = None,
) -> tuple[NetworkWeights, TrainingHistory]:
    """Trains the estimator or restorer per config; optionally writes artifacts.

    With out_path set, writes the weights file there plus <out>.history.csv
    and <out>.config.json alongside.
    """
    if network_kind not in ("estimator", "restorer"):
        raise ValueError(f"network_kind must be 'estimator' or 'restorer', got {network_kind!r}")
    images = load_dataset(config.dataset_dir)
    rng = np.random.default_rng(config.seed)

    arch = estimation_arch() if network_kind == "estimator" else restoration_arch()
    weights = init_network(arch, seed=int(rng.integers(0, 2**63)))
    weights.metadata = {"name": network_kind, "seed": config.seed, "epochs": config.epochs}

    make_batch = make_estimator_batch if network_kind == "estimator" else make_restorer_batch
    ranges = _spec_ranges(config)

    params = flatten_params(weights)
    opt = config.optimizer
    adam = (
        AdamState.zeros(params.size, opt.learning_rate, opt.beta1, opt.beta2, opt.eps)
        if opt.kind == "adam"
        else None
    )

    history = TrainingHistory()
    for epoch in range(config.epochs):
        t0 = time.perf_counter()
        pool = _sample_patch_pool(images, rng, config)
        n_val = int(round(config.val_fraction * len(pool)))
        val_pool, train_pool = pool[:n_val], pool[n_val:]

        batch_losses = []
        for start in range(0, len(train_pool), config.batch_size):
            chunk = train_pool[start : start + config.batch_size]
            x, t = make_batch(chunk, rng, **ranges)
            out, cache = net_forward(weights, x, want_cache=True)
            loss, grad_out = mse_loss(out, t)
            if not math.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch} batch {start // config.batch_size}"
                )
            grads = flatten_grads(net_backward(weights, cache, grad_out))
            if adam is not None:
                params = adam_step(params, grads, adam)
            else:
                params = sgd_step(params, grads, opt.learning_rate)
            unflatten_params(weights, params)
            batch_losses.append(loss)

        val_losses = []
        for start in range(0, len(val_pool), config.batch_size):
            chunk = val_pool[start : start + config.batch_size]
            x, t = make_batch(chunk, rng, **ranges)
            val_losses.append(mse_loss(net_forward(weights, x), t)[0])

        history.records.append(
            EpochRecord(
                epoch=epoch,
                train_loss=float(np.mean(batch_losses)) if batch_losses else float("nan"),
                val_loss=float(np.mean(val_losses)) if val_losses else float("nan"),
                seconds=time.perf_counter() - t0,
            )
        )

    if out_path is not None:
        out_path = Path(out_path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        save_weights(weights, out_path)
        out_path.with_suffix(out_path.suffix + ".history.csv").write_text(history.to_csv())
        out_path.with_suffix(out_path.suffix + ".config.json").write_text(config.to_json() + "\n")
    return weights, history
