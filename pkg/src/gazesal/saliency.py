"""Gaussian-kernel heatmaps rendered at native resolution, plus map I/O.

Pixel ``(c, r)`` has its centre at continuous position ``(c, r)``; a grid point
``(gx, gy)`` lands at ``(gx * W / 1000, gy * H / 1000)``.

Binary map format (``.salmap``): a 16-byte little-endian header
``b"GZSALMAP"``, ``uint32 width``, ``uint32 height``, followed by
``width * height`` float64 values in row-major order.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .geometry import GRID_MAX

MAP_MAGIC = b"GZSALMAP"
_HEADER = struct.Struct("<8sII")


class DegenerateMapError(ValueError):
    pass


@dataclass(frozen=True)
class KernelConfig:
    """Gaussian bandwidth in pixels (``None`` = width / 25) and truncation radius in sigmas."""

    sigma: Optional[float] = None
    radius: float = 3.0

    def __post_init__(self):
        if self.sigma is not None and self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.radius < 1:
            raise ValueError("radius must be >= 1 sigma")

    def sigma_for(self, width: int) -> float:
        return self.sigma if self.sigma is not None else width / 25.0


@dataclass(frozen=True)
class SaliencyMap:
    values: np.ndarray  # (height, width) float64
    normalized: bool = False

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape


def grid_to_pixel(points, width: int, height: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    return pts * np.array([width / GRID_MAX, height / GRID_MAX])


def render_heatmap(points, width: int, height: int, cfg: KernelConfig = KernelConfig()) -> SaliencyMap:
    """Sum of truncated isotropic Gaussians (unit peak) centred on each grid point.

    Points are accumulated one at a time in input order so the result is
    reproducible bit for bit.
    """
    if width <= 0 or height <= 0:
        raise ValueError("scene size must be positive")
    sigma = cfg.sigma_for(width)
    cut = cfg.radius * sigma
    out = np.zeros((height, width), dtype=np.float64)
    for px, py in grid_to_pixel(points, width, height):
        c0 = max(int(np.ceil(px - cut)), 0)
        c1 = min(int(np.floor(px + cut)), width - 1)
        r0 = max(int(np.ceil(py - cut)), 0)
        r1 = min(int(np.floor(py + cut)), height - 1)
        if c0 > c1 or r0 > r1:
            continue
        dx = np.arange(c0, c1 + 1) - px
        dy = np.arange(r0, r1 + 1) - py
        d2 = dy[:, None] ** 2 + dx[None, :] ** 2
        patch = np.exp(-d2 / (2.0 * sigma * sigma))
        patch[d2 > cut * cut] = 0.0
        out[r0 : r1 + 1, c0 : c1 + 1] += patch
    return SaliencyMap(out)


def center_bias(width: int, height: int, spread: float = 0.25) -> SaliencyMap:
    """Separable Gaussian centred on the frame, sigma = ``spread`` times each side.

    The usual content-free baseline for fixation prediction.
    """
    if width <= 0 or height <= 0:
        raise ValueError("scene size must be positive")
    gx = np.exp(-((np.arange(width) - (width - 1) / 2.0) ** 2) / (2.0 * (spread * width) ** 2))
    gy = np.exp(-((np.arange(height) - (height - 1) / 2.0) ** 2) / (2.0 * (spread * height) ** 2))
    return SaliencyMap(gy[:, None] * gx[None, :])


def normalize_map(smap: Union[SaliencyMap, np.ndarray]) -> SaliencyMap:
    values = smap.values if isinstance(smap, SaliencyMap) else np.asarray(smap, dtype=float)
    if np.any(values < 0):
        raise ValueError("saliency values must be nonnegative")
    total = values.sum()
    if not total > 0:
        raise DegenerateMapError("degenerate map")
    return SaliencyMap(values / total, normalized=True)


def downsample(smap: SaliencyMap, factor: int) -> SaliencyMap:
    """Block-sum downsampling for fast metric configs; trailing rows/cols are dropped."""
    if factor <= 1:
        return smap
    h, w = smap.height // factor, smap.width // factor
    v = smap.values[: h * factor, : w * factor].reshape(h, factor, w, factor).sum(axis=(1, 3))
    return replace(smap, values=v)


# --------------------------------------------------------------------------
# export
# --------------------------------------------------------------------------


def map_to_bytes(smap: SaliencyMap) -> bytes:
    header = _HEADER.pack(MAP_MAGIC, smap.width, smap.height)
    return header + np.ascontiguousarray(smap.values, dtype="<f8").tobytes()


def map_from_bytes(blob: bytes) -> SaliencyMap:
    if len(blob) < _HEADER.size:
        raise ValueError("truncated map header")
    magic, w, h = _HEADER.unpack_from(blob)
    if magic != MAP_MAGIC:
        raise ValueError("not a saliency map file")
    body = blob[_HEADER.size :]
    if len(body) != 8 * w * h:
        raise ValueError(f"expected {8 * w * h} data bytes, found {len(body)}")
    values = np.frombuffer(body, dtype="<f8").reshape(h, w).astype(np.float64)
    return SaliencyMap(values)


def save_map(path, smap: SaliencyMap) -> None:
    with open(path, "wb") as fh:
        fh.write(map_to_bytes(smap))


def load_map(path) -> SaliencyMap:
    with open(path, "rb") as fh:
        return map_from_bytes(fh.read())


def to_uint8(smap: SaliencyMap) -> np.ndarray:
    v = smap.values
    peak = v.max() if v.size else 0.0
    if peak <= 0:
        return np.zeros(v.shape, dtype=np.uint8)
    return np.round(v / peak * 255.0).astype(np.uint8)


def png_bytes(smap: SaliencyMap, cmap: Optional[str] = None) -> bytes:
    """8-bit PNG scaled to the map's maximum; grayscale, or RGB through a matplotlib colormap."""
    from PIL import Image

    gray = to_uint8(smap)
    if cmap is None:
        img = Image.fromarray(gray, mode="L")
    else:
        from matplotlib import colormaps

        rgb = colormaps[cmap](np.arange(256))[:, :3]
        lut = np.round(rgb * 255).astype(np.uint8)
        img = Image.fromarray(lut[gray], mode="RGB")
    buf = io.BytesIO()
    img.save(buf, format="PNG", optimize=False)
    return buf.getvalue()


def save_png(path, smap: SaliencyMap, cmap: Optional[str] = None) -> None:
    with open(path, "wb") as fh:
        fh.write(png_bytes(smap, cmap))
