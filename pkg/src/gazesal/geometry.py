"""Coordinate bookkeeping: dynamic tile-grid choice, proportional rescaling and
the integer [0, 1000]^2 grid used on the model side."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Tuple

BASE_SIZE = 448
MAX_BLOCKS = 12
GRID_MAX = 1000


@dataclass(frozen=True, order=True)
class TileGrid:
    i: int  # columns
    j: int  # rows

    @property
    def blocks(self) -> int:
        return self.i * self.j

    @property
    def target_w(self) -> int:
        return BASE_SIZE * self.i

    @property
    def target_h(self) -> int:
        return BASE_SIZE * self.j

    @property
    def target_size(self) -> Tuple[int, int]:
        return self.target_w, self.target_h


class GridPoint(NamedTuple):
    gx: float
    gy: float


def candidate_grids(max_blocks: int = MAX_BLOCKS) -> List[TileGrid]:
    """All (columns, rows) layouts with at most ``max_blocks`` tiles, ascending i then j."""
    return [
        TileGrid(i, j)
        for i in range(1, max_blocks + 1)
        for j in range(1, max_blocks + 1)
        if i * j <= max_blocks
    ]


def select_tile_grid(width: float, height: float) -> TileGrid:
    """Pick the layout whose aspect ratio best matches ``width/height``.

    Layouts whose resized area exceeds twice the original are excluded unless
    that would leave nothing. Ties go to fewer blocks, then fewer columns.
    """
    if width <= 0 or height <= 0:
        raise ValueError("image size must be positive")
    cands = candidate_grids()
    area = width * height
    feasible = [g for g in cands if g.target_w * g.target_h <= 2 * area]
    if feasible:
        cands = feasible
    ratio = width / height
    return min(cands, key=lambda g: (abs(ratio - g.i / g.j), g.blocks, g.i))


def rescale_point(x: float, y: float, W: float, H: float, W2: float, H2: float) -> Tuple[float, float]:
    if W == 0 or H == 0:
        raise ValueError("source size must be nonzero")
    return x / W * W2, y / H * H2


def normalize_to_grid(x: float, y: float, W: float, H: float) -> GridPoint:
    """Map a pixel position inside a ``W x H`` frame to integer grid units (half-up rounding)."""
    if W <= 0 or H <= 0:
        raise ValueError("frame size must be positive")
    if not (0 <= x <= W and 0 <= y <= H):
        raise ValueError(f"point ({x}, {y}) outside {W}x{H} frame")
    return GridPoint(math.floor(GRID_MAX * x / W + 0.5), math.floor(GRID_MAX * y / H + 0.5))


def denormalize_from_grid(gx: float, gy: float, W: float, H: float) -> Tuple[float, float]:
    if W <= 0 or H <= 0:
        raise ValueError("frame size must be positive")
    if not (0 <= gx <= GRID_MAX and 0 <= gy <= GRID_MAX):
        raise ValueError(f"grid point ({gx}, {gy}) outside [0, {GRID_MAX}]")
    return gx * W / GRID_MAX, gy * H / GRID_MAX


def pixel_to_grid(x: float, y: float, W: float, H: float) -> GridPoint:
    """Full path from a native-resolution pixel to grid units via the tiled size."""
    grid = select_tile_grid(W, H)
    x2, y2 = rescale_point(x, y, W, H, grid.target_w, grid.target_h)
    return normalize_to_grid(x2, y2, grid.target_w, grid.target_h)
