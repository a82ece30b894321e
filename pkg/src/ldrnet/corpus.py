"""Dataset plumbing: manifests, image I/O, synthetic corpus, perturbations.

The synthetic desk-scale corpus pairs a textured "natural" image (seeded
white noise blended with a random-frequency sinusoid grid) with a
Gaussian-smoothed copy standing in for a generated image.  The perturbation
suite (Gaussian blur, bilinear resizing, JPEG round-trip) covers the standard
post-processing robustness checks.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, DomainError, ManifestError
from .tensor_core import Padding, check_tensor, correlate2d, gaussian_kernel

MANIFEST_HEADER = "path,label"


@dataclass(frozen=True)
class ManifestEntry:
    """One labeled image: 0 = real/natural, 1 = generated/smoothed."""

    path: str
    label: int

    def __post_init__(self):
        if not self.path:
            raise ManifestError("manifest path must be non-empty")
        if self.label not in (0, 1):
            raise ManifestError(f"label must be 0 or 1, got {self.label}")


def load_manifest(path) -> list[ManifestEntry]:
    """Parse a `<relative-path>,<label>` CSV manifest (optional header).

    Blank lines are ignored; any other malformed line raises an error naming
    its 1-based line number (counted over non-header content lines).
    """
    with open(path, "r", encoding="utf-8") as f:
        raw_lines = f.read().splitlines()
    lines = [ln.strip() for ln in raw_lines]
    if lines and lines[0].lower() == MANIFEST_HEADER:
        lines = lines[1:]
    entries = []
    for lineno, line in enumerate(lines, start=1):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ManifestError(f"line {lineno}: expected '<path>,<label>', got {line!r}")
        rel_path, label_text = parts[0].strip(), parts[1].strip()
        if label_text not in ("0", "1"):
            raise ManifestError(f"line {lineno}: label must be 0 or 1, got {label_text!r}")
        if not rel_path:
            raise ManifestError(f"line {lineno}: empty path")
        entries.append(ManifestEntry(path=rel_path, label=int(label_text)))
    return entries


def save_manifest(path, entries) -> None:
    """Write entries as a headered CSV manifest."""
    lines = [MANIFEST_HEADER]
    lines.extend(f"{e.path},{e.label}" for e in entries)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("\n".join(lines) + "\n")


def split_manifest(entries, fraction: float, seed: int) -> tuple[list, list]:
    """Deterministic stratified split: ``fraction`` of each class goes left.

    Entries are shuffled per class with a generator seeded by ``seed``
    (label-0 group first), so identical inputs always split identically.
    """
    if not 0 < fraction < 1:
        raise DomainError(f"fraction must lie in (0, 1), got {fraction}")
    rng = np.random.default_rng(seed)
    first: list = []
    second: list = []
    for label in (0, 1):
        group = [e for e in entries if e.label == label]
        order = rng.permutation(len(group))
        cut = int(len(group) * fraction)
        first.extend(group[i] for i in order[:cut])
        second.extend(group[i] for i in order[cut:])
    return first, second


# --- image I/O ------------------------------------------------------------


def decode_image(path) -> np.ndarray:
    """Decode a PNG or baseline JPEG into a (C, H, W) tensor in [0, 1].

    Grayscale files give C=1; everything else is converted to RGB (C=3).
    Values are the 8-bit codes divided by 255.
    """
    try:
        with Image.open(path) as img:
            if img.mode == "L":
                arr = np.asarray(img, dtype=np.uint8)[None, :, :]
            elif img.mode in ("1", "I", "I;16", "LA"):
                arr = np.asarray(img.convert("L"), dtype=np.uint8)[None, :, :]
            else:
                arr = np.asarray(img.convert("RGB"), dtype=np.uint8).transpose(2, 0, 1)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise DecodeError(f"cannot decode image {path}: {exc}") from exc
    return arr.astype(np.float32) / 255.0


def emit_image(x, path) -> None:
    """Write a [0, 1]-valued tensor as an 8-bit PNG (value = round(v*255))."""
    arr = check_tensor(x, "image")
    if float(arr.min()) < 0.0 or float(arr.max()) > 1.0:
        raise DomainError("image values must lie in [0, 1]")
    c = arr.shape[0]
    if c not in (1, 3):
        raise DomainError(f"PNG output supports 1 or 3 channels, got {c}")
    quantized = np.rint(arr * 255.0).astype(np.uint8)
    if c == 1:
        img = Image.fromarray(quantized[0], mode="L")
    else:
        img = Image.fromarray(quantized.transpose(1, 2, 0), mode="RGB")
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
    img.save(path, format="PNG")


# --- synthetic corpus ------------------------------------------------------


@dataclass(frozen=True)
class SynthConfig:
    """Settings of the synthetic natural/smoothed pair generator."""

    count: int = 200
    size: int = 64
    seed: int = 0
    smooth_sigma: float = 1.5
    texture_mix: float = 0.5

    def __post_init__(self):
        if self.count < 1:
            raise DomainError(f"count must be >= 1, got {self.count}")
        if self.size < 8:
            raise DomainError(f"size must be >= 8, got {self.size}")
        if self.seed < 0:
            raise DomainError(f"seed must be nonnegative, got {self.seed}")
        if self.smooth_sigma <= 0:
            raise DomainError(f"smooth_sigma must be positive, got {self.smooth_sigma}")
        if not 0 <= self.texture_mix <= 1:
            raise DomainError(f"texture_mix must lie in [0, 1], got {self.texture_mix}")


def synth_pair(cfg: SynthConfig, index: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic (natural, smoothed) grayscale pair for entry ``index``.

    The natural image blends white noise with a sinusoid grid of random
    frequency and phase; the smoothed copy is its Gaussian blur.  Both are
    clamped to [0, 1] and fully determined by (seed, index).
    """
    if index < 0 or index >= cfg.count:
        raise DomainError(f"index {index} outside [0, {cfg.count})")
    rng = np.random.default_rng([cfg.seed, index])
    noise = rng.random((1, cfg.size, cfg.size))
    freq_r, freq_c = rng.uniform(2.0, 10.0, size=2)
    phase_r, phase_c = rng.uniform(0.0, 2.0 * np.pi, size=2)
    rows = np.arange(cfg.size, dtype=np.float64)[:, None]
    cols = np.arange(cfg.size, dtype=np.float64)[None, :]
    texture = (
        0.5
        + 0.25 * np.sin(2.0 * np.pi * freq_r * rows / cfg.size + phase_r)
        + 0.25 * np.sin(2.0 * np.pi * freq_c * cols / cfg.size + phase_c)
    )
    blend = cfg.texture_mix * noise + (1.0 - cfg.texture_mix) * texture[None]
    natural = np.clip(blend, 0.0, 1.0).astype(np.float32)
    smoothed = correlate2d(natural, gaussian_kernel(cfg.smooth_sigma), Padding.REFLECT)
    return natural, np.clip(smoothed, 0.0, 1.0)


def generate_corpus(cfg: SynthConfig, root) -> list[ManifestEntry]:
    """Write the corpus as ``{natural,smoothed}/<index>.png`` plus a manifest.

    Returns the manifest entries (natural label 0, smoothed label 1).
    """
    root = os.fspath(root)
    entries = []
    for index in range(cfg.count):
        natural, smoothed = synth_pair(cfg, index)
        for kind, image, label in (("natural", natural, 0), ("smoothed", smoothed, 1)):
            rel = f"{kind}/{index}.png"
            emit_image(image, os.path.join(root, rel))
            entries.append(ManifestEntry(path=rel, label=label))
    save_manifest(os.path.join(root, "manifest.csv"), entries)
    return entries


# --- perturbations ----------------------------------------------------------


def gaussian_blur(x, k: int) -> np.ndarray:
    """Gaussian smoothing with a k-by-k kernel (sigma = k/6), reflect padding."""
    if k % 2 == 0 or k < 1:
        raise DomainError(f"blur kernel size must be odd and positive, got {k}")
    kernel = gaussian_kernel(k / 6.0, radius=k // 2)
    return correlate2d(x, kernel, Padding.REFLECT)


def resize(x, factor: float) -> np.ndarray:
    """Bilinear resampling with half-pixel-centered sampling.

    Output dims are ``round(dim * factor)``; source coordinates are
    ``(i + 0.5) * in/out - 0.5`` clamped to the image, so ``factor=1`` is the
    identity.
    """
    x = check_tensor(x, "image")
    if factor <= 0:
        raise DomainError(f"resize factor must be positive, got {factor}")
    c, h, w = x.shape
    oh = int(round(h * factor))
    ow = int(round(w * factor))
    if oh < 1 or ow < 1:
        raise DomainError(f"degenerate output size {oh}x{ow}")
    ys = np.clip((np.arange(oh, dtype=np.float64) + 0.5) * (h / oh) - 0.5, 0.0, h - 1.0)
    xs = np.clip((np.arange(ow, dtype=np.float64) + 0.5) * (w / ow) - 0.5, 0.0, w - 1.0)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0)[None, :, None]
    wx = (xs - x0)[None, None, :]
    src = x.astype(np.float64)
    top = src[:, y0][:, :, x0] * (1.0 - wx) + src[:, y0][:, :, x1] * wx
    bottom = src[:, y1][:, :, x0] * (1.0 - wx) + src[:, y1][:, :, x1] * wx
    return (top * (1.0 - wy) + bottom * wy).astype(np.float32)


def jpeg_roundtrip(x, quality: int) -> np.ndarray:
    """Encode to baseline JPEG at ``quality`` and decode back to [0, 1].

    Output dims always equal input dims.
    """
    x = check_tensor(x, "image")
    if x.shape[0] not in (1, 3):
        raise DomainError(f"JPEG round-trip supports 1 or 3 channels, got {x.shape[0]}")
    if not isinstance(quality, (int, np.integer)) or not 1 <= int(quality) <= 100:
        raise DomainError(f"JPEG quality must be an integer in [1, 100], got {quality!r}")
    quantized = np.rint(np.clip(x, 0.0, 1.0) * 255.0).astype(np.uint8)
    if x.shape[0] == 1:
        img = Image.fromarray(quantized[0], mode="L")
    else:
        img = Image.fromarray(quantized.transpose(1, 2, 0), mode="RGB")
    buf = io.BytesIO()
    img.save(buf, format="JPEG", quality=int(quality))
    buf.seek(0)
    with Image.open(buf) as decoded:
        arr = np.asarray(decoded.convert(img.mode), dtype=np.uint8)
    if x.shape[0] == 1:
        arr = arr[None, :, :]
    else:
        arr = arr.transpose(2, 0, 1)
    return arr.astype(np.float32) / 255.0


@dataclass(frozen=True)
class PerturbSpec:
    """One robustness manipulation: Gaussian blur, resizing or JPEG round-trip."""

    kind: str
    param: float

    def __post_init__(self):
        if self.kind == "blur":
            k = self.param
            if k != int(k) or int(k) % 2 == 0 or int(k) < 3:
                raise DomainError(f"blur kernel size must be an odd integer >= 3, got {k}")
        elif self.kind == "resize":
            if self.param <= 0:
                raise DomainError(f"resize factor must be positive, got {self.param}")
        elif self.kind == "jpeg":
            q = self.param
            if q != int(q) or not 1 <= int(q) <= 100:
                raise DomainError(f"JPEG quality must be an integer in [1, 100], got {q}")
        else:
            raise DomainError(f"unknown perturbation kind {self.kind!r}")

    @classmethod
    def parse(cls, token: str) -> "PerturbSpec":
        """Parse a ``kind:param`` token such as ``blur:7`` or ``resize:0.5``."""
        parts = token.strip().split(":")
        if len(parts) != 2:
            raise DomainError(f"expected '<kind>:<param>', got {token!r}")
        kind = parts[0].strip()
        try:
            param = float(parts[1])
        except ValueError as exc:
            raise DomainError(f"bad perturbation parameter in {token!r}") from exc
        return cls(kind=kind, param=param)

    @property
    def label(self) -> str:
        if self.kind in ("blur", "jpeg"):
            return f"{self.kind}:{int(self.param)}"
        return f"{self.kind}:{self.param:g}"

    def apply(self, x) -> np.ndarray:
        """Apply the manipulation; outputs are clamped to [0, 1]."""
        if self.kind == "blur":
            out = gaussian_blur(x, int(self.param))
        elif self.kind == "resize":
            out = resize(x, self.param)
        else:
            out = jpeg_roundtrip(x, int(self.param))
        return np.clip(out, 0.0, 1.0)


DEFAULT_PERTURBATIONS = (
    PerturbSpec("blur", 7),
    PerturbSpec("blur", 9),
    PerturbSpec("resize", 0.5),
    PerturbSpec("resize", 1.5),
    PerturbSpec("jpeg", 75),
)
