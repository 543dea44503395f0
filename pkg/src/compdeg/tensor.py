"""Rank-4 tensor kernels for the two small dilated-convolution networks.

Only the operations the networks need are implemented: dilated 3x3
convolution (forward + exact backward), ReLU, mean-squared loss, and the
Adam/SGD parameter updates. Tensors are plain numpy arrays of shape
(batch, channel, height, width), stored in float32. All reductions and
convolution sums are accumulated in float64 and cast back to float32, so
finite-difference gradient checks stay stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FLOAT = np.float32

KERNEL_SIZE = 3
ALLOWED_DILATIONS = (1, 2, 3, 4)


def _check_tensor(x: np.ndarray, name: str) -> None:
    if x.ndim != 4:
        raise ValueError(f"{name} must be rank-4 (n,c,h,w), got shape {x.shape}")
    if min(x.shape) < 1:
        raise ValueError(f"{name} has an empty dimension: {x.shape}")


@dataclass
class ConvLayer:
    """One 3x3 convolution layer: weights (out_ch, in_ch, 3, 3), bias (out_ch,)."""

    weights: np.ndarray
    bias: np.ndarray
    dilation: int = 1

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=FLOAT)
        self.bias = np.ascontiguousarray(self.bias, dtype=FLOAT)
        if self.weights.ndim != 4 or self.weights.shape[2:] != (KERNEL_SIZE, KERNEL_SIZE):
            raise ValueError(f"weights must be (out_ch, in_ch, 3, 3), got {self.weights.shape}")
        if self.bias.shape != (self.weights.shape[0],):
            raise ValueError(
                f"bias shape {self.bias.shape} does not match out_ch {self.weights.shape[0]}"
            )
        if self.dilation not in ALLOWED_DILATIONS:
            raise ValueError(f"dilation must be one of {ALLOWED_DILATIONS}, got {self.dilation}")

    @property
    def out_channels(self) -> int:
        return self.weights.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weights.shape[1]

    def parameter_count(self) -> int:
        return self.weights.size + self.bias.size


def conv2d_forward(x: np.ndarray, layer: ConvLayer) -> np.ndarray:
    """Dilated 3x3 cross-correlation with zero padding of width = dilation.

    Output spatial size equals input spatial size for every allowed dilation.
    """
    _check_tensor(x, "input")
    n, c, h, w = x.shape
    if c != layer.in_channels:
        raise ValueError(
            f"input channels {c} do not match layer in_ch {layer.in_channels} "
            f"(input {x.shape}, weights {layer.weights.shape})"
        )
    d = layer.dilation
    xpad = np.zeros((n, c, h + 2 * d, w + 2 * d), dtype=np.float64)
    xpad[:, :, d : d + h, d : d + w] = x
    w64 = layer.weights.astype(np.float64)
    # accumulate in (out, n, h, w) layout so every tap adds contiguously
    acc = np.zeros((layer.out_channels, n, h, w), dtype=np.float64)
    for ki in range(KERNEL_SIZE):
        for kj in range(KERNEL_SIZE):
            view = xpad[:, :, ki * d : ki * d + h, kj * d : kj * d + w]
            acc += np.tensordot(w64[:, :, ki, kj], view, axes=([1], [1]))
    acc += layer.bias.astype(np.float64)[:, None, None, None]
    return acc.transpose(1, 0, 2, 3).astype(FLOAT)


def conv2d_backward(
    x: np.ndarray, layer: ConvLayer, upstream: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact gradients of sum(upstream * conv2d_forward(x, layer)).

    Returns (grad_input, grad_weights, grad_bias) with the shapes of
    x, layer.weights and layer.bias.
    """
    _check_tensor(x, "input")
    _check_tensor(upstream, "upstream")
    n, c, h, w = x.shape
    if c != layer.in_channels:
        raise ValueError(
            f"input channels {c} do not match layer in_ch {layer.in_channels} "
            f"(input {x.shape}, weights {layer.weights.shape})"
        )
    if upstream.shape != (n, layer.out_channels, h, w):
        raise ValueError(
            f"upstream shape {upstream.shape} does not match forward output "
            f"{(n, layer.out_channels, h, w)}"
        )
    d = layer.dilation
    xpad = np.zeros((n, c, h + 2 * d, w + 2 * d), dtype=np.float64)
    xpad[:, :, d : d + h, d : d + w] = x
    u64 = upstream.astype(np.float64)
    w64 = layer.weights.astype(np.float64)

    grad_w = np.zeros_like(w64)
    # (in, n, H, W) layout keeps the per-tap accumulation contiguous
    gxpad = np.zeros((c, n, h + 2 * d, w + 2 * d), dtype=np.float64)
    for ki in range(KERNEL_SIZE):
        for kj in range(KERNEL_SIZE):
            view = xpad[:, :, ki * d : ki * d + h, kj * d : kj * d + w]
            # (out, in) <- sum over n,h,w of upstream (n,out,h,w) * view (n,in,h,w)
            grad_w[:, :, ki, kj] = np.tensordot(u64, view, axes=([0, 2, 3], [0, 2, 3]))
            # (in, n, h, w) <- (out, in)^T . (n, out, h, w)
            gxpad[:, :, ki * d : ki * d + h, kj * d : kj * d + w] += np.tensordot(
                w64[:, :, ki, kj], u64, axes=([0], [1])
            )
    grad_input = gxpad[:, :, d : d + h, d : d + w].transpose(1, 0, 2, 3).astype(FLOAT)
    grad_bias = u64.sum(axis=(0, 2, 3)).astype(FLOAT)
    return grad_input, grad_w.astype(FLOAT), grad_bias


def relu_forward(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0).astype(FLOAT)


def relu_backward(x: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    # Subgradient at exactly 0 is 0.
    if x.shape != upstream.shape:
        raise ValueError(f"x shape {x.shape} does not match upstream shape {upstream.shape}")
    return np.where(x > 0, upstream, FLOAT(0.0)).astype(FLOAT)


def mse_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error over all elements and its gradient w.r.t. pred."""
    if pred.shape != target.shape:
        raise ValueError(f"pred shape {pred.shape} does not match target shape {target.shape}")
    diff = pred.astype(np.float64) - target.astype(np.float64)
    loss = float(np.mean(diff * diff))
    grad = (2.0 / diff.size) * diff
    return loss, grad.astype(FLOAT)


@dataclass
class AdamState:
    """Adam moment estimates for one flat parameter vector."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    learning_rate: float = 1e-3

    @classmethod
    def zeros(cls, n_params: int, learning_rate: float = 1e-3, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        return cls(
            m=np.zeros(n_params, dtype=np.float64),
            v=np.zeros(n_params, dtype=np.float64),
            t=0,
            beta1=beta1,
            beta2=beta2,
            eps=eps,
            learning_rate=learning_rate,
        )


def adam_step(params: np.ndarray, grads: np.ndarray, state: AdamState) -> np.ndarray:
    """One Adam update with bias correction. Mutates state, returns new params."""
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise ValueError(
            f"length mismatch: params {params.shape}, grads {grads.shape}, state {state.m.shape}"
        )
    g = grads.astype(np.float64)
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * g
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * g * g
    m_hat = state.m / (1.0 - state.beta1 ** state.t)
    v_hat = state.v / (1.0 - state.beta2 ** state.t)
    out = params.astype(np.float64) - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
    return out.astype(params.dtype)


def sgd_step(params: np.ndarray, grads: np.ndarray, learning_rate: float) -> np.ndarray:
    if params.shape != grads.shape:
        raise ValueError(f"length mismatch: params {params.shape}, grads {grads.shape}")
    if learning_rate <= 0:
        raise ValueError(f"learning_rate must be > 0, got {learning_rate}")
    out = params.astype(np.float64) - learning_rate * grads.astype(np.float64)
    return out.astype(params.dtype)
