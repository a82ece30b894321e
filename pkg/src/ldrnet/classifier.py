"""Shallow convolutional binary classifier trained from scratch.

Three stride-2 conv/ReLU blocks feed global average pooling and a single
logistic output.  Forward, reverse-mode gradients and the Adam update are
written directly against numpy.  Parameters are stored as float32 (matching
the checkpoint format) while all arithmetic runs in float64, so analytic
gradients agree with central finite differences to high precision.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import (
    DecodeError,
    DimensionError,
    DomainError,
    GradientCacheError,
)
from .lga import LgaFeature
from .lvp import LvpFeature
from .metrics import accuracy as _metric_accuracy
from .metrics import make_samples
from .tensor_core import check_tensor

DEFAULT_WIDTHS = (8, 16, 32)

CHECKPOINT_MAGIC = b"LDRC"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings; Adam moments and step size follow common practice."""

    learning_rate: float = 0.0002
    batch_size: int = 32
    epochs: int = 40
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        # learning_rate 0 is allowed as a no-op diagnostic configuration.
        if self.learning_rate < 0:
            raise DomainError(f"learning_rate must be nonnegative, got {self.learning_rate}")
        if self.batch_size < 1:
            raise DomainError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise DomainError(f"epochs must be >= 1, got {self.epochs}")
        if not 0 <= self.beta1 < 1 or not 0 <= self.beta2 < 1:
            raise DomainError("Adam betas must lie in [0, 1)")
        if self.adam_eps <= 0:
            raise DomainError("adam_eps must be positive")


def _group_shapes(in_channels: int, widths) -> dict:
    shapes = {}
    fan_prev = int(in_channels)
    for b, width in enumerate(widths, start=1):
        shapes[f"conv{b}.weight"] = (width, fan_prev, 3, 3)
        shapes[f"conv{b}.bias"] = (width,)
        fan_prev = width
    shapes["fc.weight"] = (widths[-1],)
    shapes["fc.bias"] = ()
    return shapes


class ModelParams:
    """Named parameter groups of the conv/GAP/FC network.

    Groups are float32 arrays in a fixed order: convN.weight/convN.bias for
    each block, then fc.weight and fc.bias.
    """

    def __init__(self, in_channels: int, widths, groups: dict):
        self.in_channels = int(in_channels)
        self.widths = tuple(int(w) for w in widths)
        if self.in_channels < 1 or any(w < 1 for w in self.widths) or not self.widths:
            raise DimensionError("in_channels and block widths must be positive")
        self._groups = {}
        for name, shape in self._expected_shapes().items():
            if name not in groups:
                raise DimensionError(f"missing parameter group {name!r}")
            arr = np.asarray(groups[name], dtype=np.float32)
            if arr.ndim > 0:
                arr = np.ascontiguousarray(arr)
            if arr.shape != shape:
                raise DimensionError(
                    f"group {name!r} must have shape {shape}, got {arr.shape}"
                )
            if not np.all(np.isfinite(arr)):
                raise DomainError(f"group {name!r} contains NaN or Inf values")
            self._groups[name] = arr
        extra = set(groups) - set(self._groups)
        if extra:
            raise DimensionError(f"unexpected parameter groups {sorted(extra)}")

    def _expected_shapes(self) -> dict:
        return _group_shapes(self.in_channels, self.widths)

    @classmethod
    def initialize(cls, in_channels: int, seed, widths=DEFAULT_WIDTHS) -> "ModelParams":
        """Glorot-uniform conv/FC weights and zero biases, drawn in group order.

        ``seed`` may be an integer or an existing numpy Generator.
        """
        rng = np.random.default_rng(seed)
        groups = {}
        fan_prev = int(in_channels)
        for b, width in enumerate(widths, start=1):
            fan_in = fan_prev * 9
            fan_out = width * 9
            bound = math.sqrt(6.0 / (fan_in + fan_out))
            groups[f"conv{b}.weight"] = rng.uniform(
                -bound, bound, size=(width, fan_prev, 3, 3)
            ).astype(np.float32)
            groups[f"conv{b}.bias"] = np.zeros(width, dtype=np.float32)
            fan_prev = width
        bound = math.sqrt(6.0 / (widths[-1] + 1))
        groups["fc.weight"] = rng.uniform(-bound, bound, size=widths[-1]).astype(np.float32)
        groups["fc.bias"] = np.zeros((), dtype=np.float32)
        return cls(in_channels, widths, groups)

    def group_names(self) -> tuple:
        return tuple(self._expected_shapes())

    def __getitem__(self, name: str) -> np.ndarray:
        return self._groups[name]

    def groups(self) -> dict:
        return dict(self._groups)

    def replace(self, groups: dict) -> "ModelParams":
        """New ModelParams with the given groups substituted."""
        merged = dict(self._groups)
        merged.update(groups)
        return ModelParams(self.in_channels, self.widths, merged)

    @property
    def n_parameters(self) -> int:
        return sum(int(a.size) for a in self._groups.values())

    def equal(self, other: "ModelParams") -> bool:
        return (
            self.in_channels == other.in_channels
            and self.widths == other.widths
            and all(np.array_equal(self[n], other[n]) for n in self.group_names())
        )


class AdamState:
    """First/second-moment accumulators (float64) plus the step counter."""

    def __init__(self, m: dict, v: dict, step: int = 0):
        self.m = m
        self.v = v
        self.step = int(step)
        if self.step < 0:
            raise DomainError("step counter must be nonnegative")

    @classmethod
    def for_params(cls, params: ModelParams) -> "AdamState":
        m = {n: np.zeros_like(params[n], dtype=np.float64) for n in params.group_names()}
        v = {n: np.zeros_like(params[n], dtype=np.float64) for n in params.group_names()}
        return cls(m, v, step=0)


def concat_features(lga_feature: LgaFeature, lvp_feature: LvpFeature) -> np.ndarray:
    """Stack LGA channels over rescaled LVP channels (no value mixing).

    LVP maps are divided by the weights' largest attainable |value| (255 for
    the default weights) so both feature families live in comparable ranges.
    """
    a = check_tensor(lga_feature.map, "lga map")
    b = check_tensor(lvp_feature.map, "lvp map")
    if a.shape != b.shape:
        raise DimensionError(f"feature shapes differ: {a.shape} vs {b.shape}")
    scale = np.float32(lvp_feature.weights.scale)
    return np.concatenate([a, b / scale], axis=0)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def global_average_pool(x: np.ndarray) -> np.ndarray:
    """Spatial mean per channel: (..., C, H, W) -> (..., C)."""
    return np.asarray(x, dtype=np.float64).mean(axis=(-2, -1))


@dataclass
class _BlockCache:
    cols: np.ndarray        # (N*ho*wo, cin*9) float64 im2col matrix
    mask: np.ndarray        # (N, cout, ho, wo) bool, preactivation > 0
    in_shape: tuple         # (N, cin, h, w)


@dataclass
class ForwardCache:
    """Intermediates retained by ``forward`` for the matching backward pass."""

    params: ModelParams
    blocks: list
    gap: np.ndarray         # (N, last_width) float64
    last_shape: tuple       # (N, last_width, h, w)
    probs: np.ndarray       # (N,) float64
    batched: bool


def _im2col_stride2(x: np.ndarray) -> tuple[np.ndarray, int, int]:
    """3x3 patches of a zero-padded (N, C, H, W) array at stride 2.

    Returns the (N*ho*wo, C*9) patch matrix and the output spatial dims.
    """
    n, c, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    windows = sliding_window_view(xp, (3, 3), axis=(2, 3))[:, :, ::2, ::2]
    ho, wo = windows.shape[2], windows.shape[3]
    cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(n * ho * wo, c * 9)
    return np.ascontiguousarray(cols), ho, wo


def _col2im_stride2(grad_patches: np.ndarray, in_shape: tuple) -> np.ndarray:
    """Scatter-add (N, C, ho, wo, 3, 3) patch gradients back to the input."""
    n, c, h, w = in_shape
    ho, wo = grad_patches.shape[2], grad_patches.shape[3]
    dxp = np.zeros((n, c, h + 2, w + 2), dtype=np.float64)
    for u in range(3):
        for v in range(3):
            dxp[:, :, u : u + 2 * ho : 2, v : v + 2 * wo : 2] += grad_patches[..., u, v]
    return dxp[:, :, 1 : h + 1, 1 : w + 1]


def forward(params: ModelParams, x):
    """Probability that the input is generated, plus a gradient cache.

    ``x`` is one (C, H, W) feature stack or a batch (N, C, H, W); the
    returned probability follows suit (float or (N,) array).
    """
    arr = np.asarray(x, dtype=np.float64)
    batched = arr.ndim == 4
    if arr.ndim == 3:
        arr = arr[None]
    elif arr.ndim != 4:
        raise DimensionError(f"input must be 3-D or 4-D, got shape {np.shape(x)}")
    if arr.shape[1] != params.in_channels:
        raise DimensionError(
            f"input has {arr.shape[1]} channels, model expects {params.in_channels}"
        )
    activations = arr
    blocks: list[_BlockCache] = []
    for b, width in enumerate(params.widths, start=1):
        w = params[f"conv{b}.weight"].astype(np.float64)
        bias = params[f"conv{b}.bias"].astype(np.float64)
        cols, ho, wo = _im2col_stride2(activations)
        z = cols @ w.reshape(width, -1).T + bias
        z4 = z.reshape(activations.shape[0], ho, wo, width).transpose(0, 3, 1, 2)
        blocks.append(_BlockCache(cols=cols, mask=z4 > 0, in_shape=activations.shape))
        activations = np.maximum(z4, 0.0)
    gap = activations.mean(axis=(2, 3))
    logit = gap @ params["fc.weight"].astype(np.float64) + float(params["fc.bias"])
    probs = _sigmoid(logit)
    cache = ForwardCache(
        params=params,
        blocks=blocks,
        gap=gap,
        last_shape=activations.shape,
        probs=probs,
        batched=batched,
    )
    return (probs if batched else float(probs[0])), cache


def bce_loss(p, y) -> float:
    """Binary cross-entropy with probabilities clamped to [1e-7, 1 - 1e-7]."""
    pa = np.clip(np.asarray(p, dtype=np.float64), 1e-7, 1.0 - 1e-7)
    ya = np.asarray(y, dtype=np.float64)
    losses = -(ya * np.log(pa) + (1.0 - ya) * np.log1p(-pa))
    return float(np.mean(losses))


def backward(params: ModelParams, cache: ForwardCache, y) -> dict:
    """Gradients of the mean BCE of the cached forward pass, per group.

    The clamp in ``bce_loss`` only guards the log; gradients use the exact
    sigmoid/cross-entropy identity d(loss)/d(logit) = p - y.
    """
    if cache.params is not params:
        raise GradientCacheError("cache was produced by a different parameter set")
    yb = np.asarray(y, dtype=np.float64).reshape(-1)
    n = cache.probs.shape[0]
    if yb.shape[0] != n:
        raise GradientCacheError(f"cache holds {n} samples, got {yb.shape[0]} labels")
    if not np.all((yb == 0) | (yb == 1)):
        raise DomainError("labels must be 0 or 1")

    grads: dict = {}
    dlogit = (cache.probs - yb) / n
    grads["fc.weight"] = cache.gap.T @ dlogit
    grads["fc.bias"] = np.asarray(dlogit.sum())
    dgap = np.outer(dlogit, params["fc.weight"].astype(np.float64))

    _, _, h_last, w_last = cache.last_shape
    upstream = np.broadcast_to(
        dgap[:, :, None, None] / (h_last * w_last), cache.last_shape
    )
    for b in range(len(params.widths), 0, -1):
        block = cache.blocks[b - 1]
        width = params.widths[b - 1]
        dz = upstream * block.mask
        dz_mat = dz.transpose(0, 2, 3, 1).reshape(-1, width)
        w_mat = params[f"conv{b}.weight"].astype(np.float64).reshape(width, -1)
        grads[f"conv{b}.weight"] = (dz_mat.T @ block.cols).reshape(
            params[f"conv{b}.weight"].shape
        )
        grads[f"conv{b}.bias"] = dz_mat.sum(axis=0)
        if b > 1:
            n_in, c_in, _, _ = block.in_shape
            ho, wo = dz.shape[2], dz.shape[3]
            dcols = (dz_mat @ w_mat).reshape(n_in, ho, wo, c_in, 3, 3)
            upstream = _col2im_stride2(dcols.transpose(0, 3, 1, 2, 4, 5), block.in_shape)
    return grads


def adam_step(
    params: ModelParams, grads: dict, state: AdamState, cfg: TrainConfig
) -> tuple[ModelParams, AdamState]:
    """One bias-corrected Adam update; returns fresh params and state."""
    step = state.step + 1
    bc1 = 1.0 - cfg.beta1**step
    bc2 = 1.0 - cfg.beta2**step
    new_groups: dict = {}
    new_m: dict = {}
    new_v: dict = {}
    for name in params.group_names():
        g = np.asarray(grads[name], dtype=np.float64)
        if g.shape != params[name].shape:
            raise DimensionError(
                f"gradient for {name!r} has shape {g.shape}, expected {params[name].shape}"
            )
        m = cfg.beta1 * state.m[name] + (1.0 - cfg.beta1) * g
        v = cfg.beta2 * state.v[name] + (1.0 - cfg.beta2) * (g * g)
        update = cfg.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + cfg.adam_eps)
        new_groups[name] = (params[name].astype(np.float64) - update).astype(np.float32)
        new_m[name] = m
        new_v[name] = v
    return params.replace(new_groups), AdamState(new_m, new_v, step)


def predict_proba(params: ModelParams, X, batch_size: int = 32) -> np.ndarray:
    """Probabilities for a stack of inputs, evaluated in fixed-size chunks."""
    arr = np.asarray(X, dtype=np.float32)
    if arr.ndim != 4:
        raise DimensionError(f"expected an (N, C, H, W) batch, got shape {arr.shape}")
    chunks = []
    for start in range(0, arr.shape[0], batch_size):
        probs, _ = forward(params, arr[start : start + batch_size])
        chunks.append(np.atleast_1d(probs))
    return np.concatenate(chunks)


def predict(params: ModelParams, x, threshold: float = 0.5) -> tuple[int, float]:
    """Label one feature stack; ties at the threshold classify as real (0)."""
    p, _ = forward(params, x)
    return (1 if p > threshold else 0), p


def _stack_samples(samples) -> tuple[np.ndarray, np.ndarray]:
    pairs = list(samples)
    if len(pairs) < 2:
        raise DomainError("training requires at least two samples")
    stacks = []
    labels = []
    for stack, label in pairs:
        arr = check_tensor(stack, "feature stack")
        if stacks and arr.shape != stacks[0].shape:
            raise DimensionError(
                f"inconsistent feature shapes: {arr.shape} vs {stacks[0].shape}"
            )
        if label not in (0, 1):
            raise DomainError(f"labels must be 0 or 1, got {label!r}")
        stacks.append(arr)
        labels.append(int(label))
    return np.stack(stacks), np.asarray(labels, dtype=np.int64)


def train(samples, cfg: TrainConfig | None = None) -> tuple[ModelParams, list[dict]]:
    """Seeded end-to-end training; returns final params and per-epoch history.

    All randomness (init, shuffling, batching) flows from ``cfg.seed``.  Each
    history row records the mean batch loss seen during the epoch and the
    training accuracy of a full pass at the end of the epoch, computed with
    the same chunked forward that evaluation uses so the numbers coincide
    exactly.
    """
    cfg = cfg if cfg is not None else TrainConfig()
    X, y = _stack_samples(samples)
    if len(set(y.tolist())) < 2:
        raise DomainError(
            "training data contains a single class; both labels must be present"
        )
    rng = np.random.default_rng(cfg.seed)
    params = ModelParams.initialize(X.shape[1], seed=rng)
    state = AdamState.for_params(params)
    history: list[dict] = []
    n = X.shape[0]
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            probs, cache = forward(params, X[idx])
            batch_losses.append(bce_loss(probs, y[idx]))
            grads = backward(params, cache, y[idx])
            params, state = adam_step(params, grads, state, cfg)
        train_probs = predict_proba(params, X, batch_size=cfg.batch_size)
        acc = _metric_accuracy(make_samples(train_probs, y), threshold=0.5)
        history.append(
            {"epoch": epoch, "loss": float(np.mean(batch_losses)), "acc": acc}
        )
    return params, history


# --- checkpoint serialization -------------------------------------------------
#
# Little-endian layout:
#   magic "LDRC" | u16 version | u16 flags (bit0: Adam state present)
#   u32 in_channels | u32 n_blocks | u32 width per block
#   per group, in group order: u32 count | float32 * count
#   if Adam state: u64 step, then per group: u32 count | float64 m * count
#                                            u32 count | float64 v * count


def save_checkpoint(path, params: ModelParams, state: AdamState | None = None) -> None:
    """Write a bit-exact binary checkpoint (optionally with optimizer state)."""
    with open(path, "wb") as f:
        flags = 1 if state is not None else 0
        f.write(struct.pack("<4sHH", CHECKPOINT_MAGIC, CHECKPOINT_VERSION, flags))
        f.write(struct.pack("<II", params.in_channels, len(params.widths)))
        f.write(struct.pack(f"<{len(params.widths)}I", *params.widths))
        for name in params.group_names():
            arr = params[name]
            f.write(struct.pack("<I", arr.size))
            f.write(arr.astype("<f4").tobytes())
        if state is not None:
            f.write(struct.pack("<Q", state.step))
            for name in params.group_names():
                for moments in (state.m, state.v):
                    arr = np.ascontiguousarray(moments[name], dtype=np.float64)
                    f.write(struct.pack("<I", arr.size))
                    f.write(arr.astype("<f8").tobytes())


def _read_exact(f, count: int) -> bytes:
    data = f.read(count)
    if len(data) != count:
        raise DecodeError("checkpoint file truncated")
    return data


def load_checkpoint(path) -> tuple[ModelParams, AdamState | None]:
    """Read a checkpoint written by ``save_checkpoint``."""
    with open(path, "rb") as f:
        magic, version, flags = struct.unpack("<4sHH", _read_exact(f, 8))
        if magic != CHECKPOINT_MAGIC:
            raise DecodeError(f"not a checkpoint file (magic {magic!r})")
        if version != CHECKPOINT_VERSION:
            raise DecodeError(f"unsupported checkpoint version {version}")
        in_channels, n_blocks = struct.unpack("<II", _read_exact(f, 8))
        widths = struct.unpack(f"<{n_blocks}I", _read_exact(f, 4 * n_blocks))
        shapes = _group_shapes(in_channels, widths)
        groups = {}
        for name, shape in shapes.items():
            (count,) = struct.unpack("<I", _read_exact(f, 4))
            expected = int(np.prod(shape)) if shape else 1
            if count != expected:
                raise DecodeError(f"group {name!r} has {count} values, expected {expected}")
            flat = np.frombuffer(_read_exact(f, 4 * count), dtype="<f4")
            groups[name] = flat.reshape(shape).astype(np.float32)
        params = ModelParams(in_channels, widths, groups)
        state = None
        if flags & 1:
            (step,) = struct.unpack("<Q", _read_exact(f, 8))
            m: dict = {}
            v: dict = {}
            for name in params.group_names():
                for moments in (m, v):
                    (count,) = struct.unpack("<I", _read_exact(f, 4))
                    flat = np.frombuffer(_read_exact(f, 8 * count), dtype="<f8")
                    moments[name] = flat.reshape(params[name].shape).astype(np.float64)
            state = AdamState(m, v, step)
        if f.read(1):
            raise DecodeError("trailing bytes after checkpoint payload")
    return params, state
