"""Independent reference implementations used to cross-check the fast paths.

Everything here is deliberately written as plain nested loops in float64 and
shares no code with the package under test.
"""

import numpy as np


def conv2d_naive(x, weights, bias, dilation):
    """Direct quintuple-loop dilated cross-correlation with zero padding."""
    n, c_in, h, w = x.shape
    c_out = weights.shape[0]
    out = np.zeros((n, c_out, h, w), dtype=np.float64)
    for b in range(n):
        for o in range(c_out):
            for y in range(h):
                for xx in range(w):
                    acc = float(bias[o])
                    for i in range(c_in):
                        for ki in range(3):
                            for kj in range(3):
                                yy = y + (ki - 1) * dilation
                                xj = xx + (kj - 1) * dilation
                                if 0 <= yy < h and 0 <= xj < w:
                                    acc += float(weights[o, i, ki, kj]) * float(x[b, i, yy, xj])
                    out[b, o, y, xx] = acc
    return out


def blur_naive(img, kernel):
    """Per-channel 2-D convolution with edge replication, double loop."""
    c, h, w = img.shape
    r = kernel.shape[0] // 2
    out = np.zeros_like(img, dtype=np.float64)
    for ch in range(c):
        for y in range(h):
            for x in range(w):
                acc = 0.0
                for ki in range(kernel.shape[0]):
                    for kj in range(kernel.shape[1]):
                        yy = min(max(y + ki - r, 0), h - 1)
                        xx = min(max(x + kj - r, 0), w - 1)
                        acc += float(kernel[ki, kj]) * float(img[ch, yy, xx])
                out[ch, y, x] = acc
    return out


def finite_diff_grad(f, x, step=1e-3):
    """Central finite differences of a scalar function over an array input."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        fp = f(x)
        flat[i] = orig - step
        fm = f(x)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * step)
    return grad


def relative_error(a, b):
    """Worst absolute deviation relative to the gradient scale.

    Entrywise relative error is meaningless for near-zero entries once values
    pass through float32 storage, so deviations are scaled by the largest
    magnitude present in either gradient.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    scale = max(np.abs(a).max(), np.abs(b).max(), 1e-12)
    return np.max(np.abs(a - b)) / scale
