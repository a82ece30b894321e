"""Independent reference implementations used to check the library.

Everything here is written with explicit Python loops and scalar math so
that a disagreement points at the library, not at a shared shortcut.  These
functions are deliberately slow and must stay decoupled from the package
internals they verify.
"""

import math

import numpy as np


def reflect_index(i: int, n: int) -> int:
    """Mirror an out-of-range index without repeating the border sample."""
    while i < 0 or i >= n:
        if i < 0:
            i = -i
        if i >= n:
            i = 2 * n - 2 - i
    return i


def replicate_index(i: int, n: int) -> int:
    return min(max(i, 0), n - 1)


def sample_pixel(channel: np.ndarray, i: int, j: int, mode: str) -> float:
    h, w = channel.shape
    if mode == "zero":
        if i < 0 or i >= h or j < 0 or j >= w:
            return 0.0
        return float(channel[i, j])
    if mode == "reflect":
        return float(channel[reflect_index(i, h), reflect_index(j, w)])
    if mode == "replicate":
        return float(channel[replicate_index(i, h), replicate_index(j, w)])
    raise ValueError(f"unknown mode {mode!r}")


def correlate2d_reference(x, kernel, mode: str) -> np.ndarray:
    """Triple-loop sliding-window cross-correlation ("same" output)."""
    x = np.asarray(x, dtype=np.float64)
    k = np.asarray(kernel, dtype=np.float64)
    kh, kw = k.shape
    rh, rw = kh // 2, kw // 2
    out = np.zeros_like(x)
    for c in range(x.shape[0]):
        for i in range(x.shape[1]):
            for j in range(x.shape[2]):
                acc = 0.0
                for u in range(kh):
                    for v in range(kw):
                        acc += k[u, v] * sample_pixel(x[c], i + u - rh, j + v - rw, mode)
                out[c, i, j] = acc
    return out.astype(np.float32)


def lga_reference(x, wx, wy, gauss, epsilon: float, mode: str) -> np.ndarray:
    """Scalar re-composition of the gradient-residual pipeline."""
    gx = correlate2d_reference(x, wx, mode).astype(np.float64)
    gy = correlate2d_reference(x, wy, mode).astype(np.float64)
    g = np.sqrt(gx * gx + gy * gy + epsilon).astype(np.float32)
    a = correlate2d_reference(g, gauss, mode)
    return g - a


LVP_OFFSETS = [(-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1)]


def lvp_reference(x, weights, mode: str = "reflect"):
    """Scalar per-pixel re-evaluation of sign encoding and weighted sums."""
    x = np.asarray(x, dtype=np.float32)
    c, h, w = x.shape
    codes = np.zeros((c, h, w), dtype=np.uint8)
    values = np.zeros((c, h, w), dtype=np.float32)
    weights = [float(v) for v in weights]
    for ch in range(c):
        for i in range(h):
            for j in range(w):
                center = float(x[ch, i, j])
                code = 0
                acc = 0.0
                for bit, (dy, dx) in enumerate(LVP_OFFSETS):
                    neighbor = sample_pixel(x[ch], i + dy, j + dx, mode)
                    if center - neighbor > 0:
                        code |= 1 << bit
                        acc += weights[bit]
                codes[ch, i, j] = code
                values[ch, i, j] = np.float32(acc)
    return values, codes


def average_precision_reference(scores, labels, indices=None) -> float:
    """O(n^2) precision-at-each-positive average.

    Rank of a sample is computed by counting, for every other sample, whether
    it sorts at or above it (higher score first, ties by ascending index).
    """
    scores = [float(s) for s in scores]
    labels = [int(y) for y in labels]
    if indices is None:
        indices = list(range(len(scores)))
    n = len(scores)
    positives = [i for i in range(n) if labels[i] == 1]
    if not positives:
        raise ValueError("need at least one positive")
    total = 0.0
    for p in positives:
        rank = 0
        hits = 0
        for t in range(n):
            above = scores[t] > scores[p] or (
                scores[t] == scores[p] and indices[t] <= indices[p]
            )
            if above:
                rank += 1
                if labels[t] == 1:
                    hits += 1
        total += hits / rank
    return total / len(positives)


def forward_reference(params, x) -> float:
    """Scalar re-implementation of the conv/GAP/FC forward pass.

    Stride-2 3x3 convolutions with zero padding, ReLU, global average
    pooling, then a logistic unit.
    """
    acts = np.asarray(x, dtype=np.float64)
    for b, width in enumerate(params.widths, start=1):
        w = params[f"conv{b}.weight"].astype(np.float64)
        bias = params[f"conv{b}.bias"].astype(np.float64)
        cin, h, wd = acts.shape
        ho, wo = (h + 1) // 2, (wd + 1) // 2
        out = np.zeros((width, ho, wo), dtype=np.float64)
        for o in range(width):
            for i in range(ho):
                for j in range(wo):
                    acc = bias[o]
                    for c in range(cin):
                        for u in range(3):
                            for v in range(3):
                                ii = 2 * i + u - 1
                                jj = 2 * j + v - 1
                                if 0 <= ii < h and 0 <= jj < wd:
                                    acc += w[o, c, u, v] * acts[c, ii, jj]
                    out[o, i, j] = acc if acc > 0 else 0.0
        acts = out
    gap = [float(acts[c].sum()) / (acts.shape[1] * acts.shape[2]) for c in range(acts.shape[0])]
    logit = float(params["fc.bias"])
    for c, value in enumerate(gap):
        logit += value * float(params["fc.weight"][c])
    return 1.0 / (1.0 + math.exp(-logit))


def adam_scalar_reference(gradients, lr, beta1=0.9, beta2=0.999, eps=1e-8, p0=0.0) -> float:
    """Plain-float Adam recursion on one scalar parameter."""
    m = 0.0
    v = 0.0
    p = p0
    for t, g in enumerate(gradients, start=1):
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g * g
        m_hat = m / (1 - beta1**t)
        v_hat = v / (1 - beta2**t)
        p -= lr * m_hat / (math.sqrt(v_hat) + eps)
    return p
