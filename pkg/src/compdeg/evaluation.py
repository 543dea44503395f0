"""Metrics and the blind/nonblind evaluation grids.

Grid cells mirror the degradation-parameter layout used throughout:
sigma in {0, 1.5, 3.0}, lam in {0, 25, 55}, q in {100, 50, 10} by default,
with JPEG always applied at the cell's quality (q=100 is still a round
trip through the codec, not a no-op). PSNR is computed over RGB jointly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .attrs import constant_map, map_rmse
from .degrade import DegradationSpec, degrade
from .networks import NetworkWeights, forward_estimate, forward_restore

DEFAULT_SIGMAS = (0.0, 1.5, 3.0)
DEFAULT_LAMBDAS = (0.0, 25.0, 55.0)
DEFAULT_QS = (100, 50, 10)

RMSE_COLUMNS = ("rmse_blur", "rmse_noise", "rmse_jpeg")
PSNR_COLUMNS = ("psnr_blind", "psnr_nonblind", "psnr_degraded")


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for [0,1] images; +inf when equal."""
    if a.shape != b.shape:
        raise ValueError(f"shape {a.shape} does not match {b.shape}")
    diff = a.astype(np.float64) - b.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(1.0 / mse)


def blind_restore(
    est_w: NetworkWeights, res_w: NetworkWeights, img: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Estimate attributes, clamp them to [0,1], restore with them."""
    estimated = np.clip(forward_estimate(est_w, img), 0.0, 1.0).astype(np.float32)
    restored = forward_restore(res_w, img, estimated)
    return restored, estimated


def blind_restore_8bit(
    est_w: NetworkWeights, res_w: NetworkWeights, img: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Blind restore with the estimated map snapped onto the 8-bit lattice.

    Byte-compatible with an estimate -> map PNG -> restore pipeline, which is
    what the CLI and the HTTP service promise.
    """
    from .attrs import image_to_map, map_to_image

    estimated = np.clip(forward_estimate(est_w, img), 0.0, 1.0).astype(np.float32)
    map8 = image_to_map(map_to_image(estimated))
    return forward_restore(res_w, img, map8), map8


@dataclass
class GridCell:
    sigma: float
    lam: float
    q: int
    values: tuple[float, ...]


@dataclass
class EvalGridResult:
    kind: str  # "rmse" or "psnr"
    sigmas: tuple[float, ...]
    lambdas: tuple[float, ...]
    qs: tuple[int, ...]
    cells: list[GridCell] = field(default_factory=list)

    @property
    def value_names(self) -> tuple[str, ...]:
        return RMSE_COLUMNS if self.kind == "rmse" else PSNR_COLUMNS

    def cell(self, sigma: float, lam: float, q: int) -> GridCell:
        for c in self.cells:
            if c.sigma == sigma and c.lam == lam and c.q == q:
                return c
        raise KeyError(f"no cell for sigma={sigma} lam={lam} q={q}")

    def to_csv(self) -> str:
        lines = ["sigma,lambda,q," + ",".join(self.value_names)]
        for c in self.cells:
            vals = ",".join(repr(v) for v in c.values)
            lines.append(f"{c.sigma!r},{c.lam!r},{c.q},{vals}")
        return "\n".join(lines) + "\n"

    def format_table(self) -> str:
        """Text table in the familiar layout: lam rows, sigma/q columns."""
        width = 22
        out = []
        header1 = " " * 12 + "".join(
            f"sigma={s:<4g}".center(width * len(self.qs)) for s in self.sigmas
        )
        header2 = " " * 12 + "".join(
            f"q={q}".center(width) for _ in self.sigmas for q in self.qs
        )
        out.append(header1)
        out.append(header2)
        label = " / ".join(self.value_names)
        for lam in self.lambdas:
            row = [f"lam={lam:<6g}  "]
            for s in self.sigmas:
                for q in self.qs:
                    c = self.cell(s, lam, q)
                    row.append("/".join(f"{v:.3f}" for v in c.values).center(width))
            out.append("".join(row))
        out.append(f"(cell = {label})")
        return "\n".join(out) + "\n"

    def save_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())


def _cell_seed(seed: int, si: int, li: int, qi: int, img_idx: int) -> int:
    ss = np.random.SeedSequence([int(seed), si, li, qi, img_idx])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _check_grid_args(images, sigmas, lambdas, qs):
    if not images:
        raise ValueError("test image set is empty")
    if not sigmas or not lambdas or not qs:
        raise ValueError("grid axes must be non-empty")


def eval_estimator_grid(
    est_w: NetworkWeights,
    images: list[np.ndarray],
    sigmas=DEFAULT_SIGMAS,
    lambdas=DEFAULT_LAMBDAS,
    qs=DEFAULT_QS,
    seed: int = 0,
    estimate_fn=None,
) -> EvalGridResult:
    """Per cell: degrade every image, estimate, RMSE against the truth map.

    estimate_fn replaces forward_estimate(est_w, .) when given (test stubs).
    """
    _check_grid_args(images, sigmas, lambdas, qs)
    estimate = estimate_fn if estimate_fn is not None else lambda im: forward_estimate(est_w, im)
    result = EvalGridResult("rmse", tuple(sigmas), tuple(lambdas), tuple(qs))
    for si, s in enumerate(sigmas):
        for li, lam in enumerate(lambdas):
            for qi, q in enumerate(qs):
                spec = DegradationSpec(sigma=s, lam=lam, q=q, jpeg_applied=True)
                errs = np.zeros(3, dtype=np.float64)
                for idx, img in enumerate(images):
                    degraded = degrade(img, spec, _cell_seed(seed, si, li, qi, idx))
                    est = np.clip(estimate(degraded), 0.0, 1.0)
                    truth = constant_map(spec, img.shape[1], img.shape[2])
                    errs += np.asarray(map_rmse(est, truth))
                errs /= len(images)
                result.cells.append(GridCell(s, lam, q, tuple(float(v) for v in errs)))
    return result


def eval_restoration_grid(
    est_w: NetworkWeights,
    res_w: NetworkWeights,
    images: list[np.ndarray],
    sigmas=DEFAULT_SIGMAS,
    lambdas=DEFAULT_LAMBDAS,
    qs=DEFAULT_QS,
    seed: int = 0,
) -> EvalGridResult:
    """Per cell: average PSNR of blind and nonblind restoration and of the
    raw degraded image, all against the clean original."""
    _check_grid_args(images, sigmas, lambdas, qs)
    result = EvalGridResult("psnr", tuple(sigmas), tuple(lambdas), tuple(qs))
    for si, s in enumerate(sigmas):
        for li, lam in enumerate(lambdas):
            for qi, q in enumerate(qs):
                spec = DegradationSpec(sigma=s, lam=lam, q=q, jpeg_applied=True)
                sums = np.zeros(3, dtype=np.float64)
                for idx, img in enumerate(images):
                    degraded = degrade(img, spec, _cell_seed(seed, si, li, qi, idx))
                    blind, _ = blind_restore(est_w, res_w, degraded)
                    truth = constant_map(spec, img.shape[1], img.shape[2])
                    nonblind = forward_restore(res_w, degraded, truth)
                    sums += (psnr(blind, img), psnr(nonblind, img), psnr(degraded, img))
                sums /= len(images)
                result.cells.append(GridCell(s, lam, q, tuple(float(v) for v in sums)))
    return result
