"""Dense (C, H, W) float32 tensors and the 2-D sliding-window correlation engine.

Images and feature maps are plain numpy arrays of shape
``(channels, height, width)`` holding float32 values.  Kernels are small
odd-sided 2-D float32 arrays anchored at their center.  Spatial operations
produce "same"-shaped outputs, every function is pure, and dot products
accumulate in float64 before the result is rounded back to float32.
"""

from __future__ import annotations

import enum
import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DimensionError, DomainError


class Padding(str, enum.Enum):
    """Boundary handling for sliding-window operations.

    REFLECT mirrors interior pixels without repeating the border pixel,
    ZERO pads with zeros, REPLICATE repeats the border pixel.
    """

    REFLECT = "reflect"
    ZERO = "zero"
    REPLICATE = "replicate"


_NUMPY_PAD_MODE = {
    Padding.REFLECT: "reflect",
    Padding.ZERO: "constant",
    Padding.REPLICATE: "edge",
}


def check_tensor(x, name: str = "tensor") -> np.ndarray:
    """Validate ``x`` as a (C, H, W) grid and return it as float32.

    Accepts any 3-D array-like; values must be finite.
    """
    arr = np.asarray(x)
    if arr.ndim != 3:
        raise DimensionError(f"{name} must have shape (C, H, W), got {arr.shape}")
    if min(arr.shape) < 1:
        raise DimensionError(f"{name} dimensions must be positive, got {arr.shape}")
    arr = np.ascontiguousarray(arr, dtype=np.float32)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains NaN or Inf values")
    return arr


def check_kernel(kernel, name: str = "kernel") -> np.ndarray:
    """Validate ``kernel`` as an odd-sided 2-D grid and return it as float32."""
    k = np.asarray(kernel)
    if k.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {k.shape}")
    kh, kw = k.shape
    if kh % 2 == 0 or kw % 2 == 0:
        raise DimensionError(f"{name} sides must be odd, got {kh}x{kw}")
    k = np.ascontiguousarray(k, dtype=np.float32)
    if not np.all(np.isfinite(k)):
        raise DomainError(f"{name} contains NaN or Inf values")
    return k


def iter_images(X) -> list[np.ndarray]:
    """Split a batch into a list of (C, H, W) images.

    ``X`` may be a 4-D (N, C, H, W) array or any sequence of 3-D arrays.
    """
    if isinstance(X, np.ndarray):
        if X.ndim == 4:
            return [X[i] for i in range(X.shape[0])]
        raise DimensionError(
            f"expected an (N, C, H, W) array or a sequence of images, got shape {X.shape}"
        )
    return [np.asarray(img) for img in X]


def pad_spatial(x: np.ndarray, pad_h: int, pad_w: int, padding: Padding) -> np.ndarray:
    """Pad the two spatial axes of a (C, H, W) array by the given margins."""
    mode = _NUMPY_PAD_MODE[Padding(padding)]
    if pad_h == 0 and pad_w == 0:
        return x
    return np.pad(x, ((0, 0), (pad_h, pad_h), (pad_w, pad_w)), mode=mode)


def correlate2d(x, kernel, padding: Padding = Padding.REFLECT) -> np.ndarray:
    """Cross-correlate each channel of ``x`` with ``kernel`` ("same" output).

    The kernel is applied without flipping and anchored at its center, so a
    one-hot center kernel is the identity.  Borders follow ``padding``.
    """
    x = check_tensor(x, "input")
    k = check_kernel(kernel)
    kh, kw = k.shape
    c, h, w = x.shape
    if kh > h or kw > w:
        raise DimensionError(f"kernel {kh}x{kw} larger than image {h}x{w}")
    padded = pad_spatial(x, kh // 2, kw // 2, padding).astype(np.float64)
    windows = sliding_window_view(padded, (kh, kw), axis=(1, 2))
    flat = windows.reshape(c * h * w, kh * kw)
    out = flat @ k.astype(np.float64).ravel()
    return out.reshape(c, h, w).astype(np.float32)


def gaussian_kernel(sigma: float, radius: int | None = None) -> np.ndarray:
    """Normalized 2-D Gaussian kernel, side ``2*ceil(3*sigma) + 1`` by default.

    Weights are proportional to ``exp(-(x^2 + y^2) / (2 sigma^2))`` with x, y
    the offsets from the kernel center, then normalized to sum to 1 so that
    constant fields are fixed points of the resulting smoothing.  ``radius``
    overrides the three-sigma truncation radius (fixed-size blurs, tests).
    """
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    if radius is None:
        radius = math.ceil(3.0 * sigma)
    if radius < 0:
        raise DomainError(f"radius must be nonnegative, got {radius}")
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    sq = offsets[:, None] ** 2 + offsets[None, :] ** 2
    weights = np.exp(-sq / (2.0 * sigma * sigma))
    weights /= weights.sum()
    return weights.astype(np.float32)


def _check_same_shape(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = check_tensor(a, "a")
    b = check_tensor(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def add(a, b) -> np.ndarray:
    """Element-wise sum of two same-shape tensors."""
    a, b = _check_same_shape(a, b)
    return a + b


def subtract(a, b) -> np.ndarray:
    """Element-wise difference of two same-shape tensors."""
    a, b = _check_same_shape(a, b)
    return a - b


def hypot_eps(a, b, epsilon: float) -> np.ndarray:
    """Element-wise ``sqrt(a^2 + b^2 + epsilon)``; every output >= sqrt(epsilon)."""
    if epsilon < 0:
        raise DomainError(f"epsilon must be nonnegative, got {epsilon}")
    a, b = _check_same_shape(a, b)
    a64 = a.astype(np.float64)
    b64 = b.astype(np.float64)
    return np.sqrt(a64 * a64 + b64 * b64 + epsilon).astype(np.float32)


def zip_map(a, b, op: str, epsilon: float | None = None) -> np.ndarray:
    """Element-wise combination of two same-shape tensors.

    ``op`` is one of ``"add"``, ``"sub"`` or ``"hypot_eps"``; the latter
    requires ``epsilon``.
    """
    if op == "add":
        return add(a, b)
    if op == "sub":
        return subtract(a, b)
    if op == "hypot_eps":
        if epsilon is None:
            raise DomainError("hypot_eps requires epsilon")
        return hypot_eps(a, b, epsilon)
    raise DomainError(f"unknown element-wise op {op!r}")
