"""Format- and spatial-consistency rewards for point-protocol outputs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import GRID_MAX
from .protocol import ParseOutcome

D_MAX = 2.0 * GRID_MAX**2  # largest squared distance on the grid


@dataclass(frozen=True)
class RewardConfig:
    r_base: float = 0.2
    r_extra: float = 0.8
    d_max: float = D_MAX

    def __post_init__(self):
        if self.r_base < 0 or self.r_extra < 0:
            raise ValueError("reward weights must be nonnegative")
        if self.r_base + self.r_extra > 1 + 1e-12:
            raise ValueError("r_base + r_extra must not exceed 1")
        if self.d_max <= 0:
            raise ValueError("d_max must be positive")


def count_agreement(n_ref: int, n_actual: int) -> float:
    if n_ref == n_actual:
        return 1.0
    return min(n_ref, n_actual) / max(n_ref, n_actual)


def format_reward(outcome: ParseOutcome, cfg: RewardConfig = RewardConfig()) -> float:
    if not outcome.valid_format:
        return 0.0
    lo, hi = sorted((outcome.n_ref, outcome.n_actual))
    if lo == hi:
        return cfg.r_base + cfg.r_extra
    # one rounding instead of two: (10, 5) gives 0.6, not 0.6000000000000001;
    # the clamp keeps lo=0 from landing an ulp below r_base
    r = (cfg.r_base * hi + cfg.r_extra * lo) / hi
    return min(max(r, cfg.r_base), cfg.r_base + cfg.r_extra)


def nearest_sq_dists(pred, target) -> np.ndarray:
    """Squared distance from each predicted point to its nearest target."""
    P = np.asarray(pred, dtype=float).reshape(-1, 2)
    T = np.asarray(target, dtype=float).reshape(-1, 2)
    d2 = ((P[:, None, :] - T[None, :, :]) ** 2).sum(axis=-1)
    return d2.min(axis=1)


def spatial_reward(pred, target, cfg: RewardConfig = RewardConfig()) -> float:
    P = np.asarray(pred, dtype=float).reshape(-1, 2)
    T = np.asarray(target, dtype=float).reshape(-1, 2)
    if len(P) == 0 or len(T) == 0:
        raise ValueError("undefined reward: empty prediction or target set")
    return math.exp(-nearest_sq_dists(P, T).sum() / (cfg.d_max * len(P)))


def total_reward(outcome: ParseOutcome, pred, target, cfg: RewardConfig = RewardConfig()) -> float:
    """Unweighted sum of the two rewards.

    ``pred=None`` scores the parsed points. The spatial term is zero when
    the format is invalid or there is nothing to score.
    """
    r_fmt = format_reward(outcome, cfg)
    return r_fmt + _spatial_term(outcome, target, pred, cfg)


def _spatial_term(outcome: ParseOutcome, target, pred, cfg: RewardConfig) -> float:
    P = outcome.points if pred is None else pred
    if not outcome.valid_format or len(P) == 0 or len(np.asarray(target).reshape(-1, 2)) == 0:
        return 0.0
    return spatial_reward(P, target, cfg)


@dataclass(frozen=True)
class RewardBreakdown:
    r_format: float
    r_distance: float
    valid_format: bool
    mean_nn_dist: Optional[float]
    coverage: Optional[float]

    @property
    def r_total(self) -> float:
        return self.r_format + self.r_distance


def score_outcome(outcome: ParseOutcome, target, cfg: RewardConfig = RewardConfig()) -> RewardBreakdown:
    """Rewards plus diagnostics.

    ``mean_nn_dist`` is the mean Euclidean distance (grid units) from each
    predicted point to its nearest target; ``coverage`` is the fraction of
    targets that are the nearest target of at least one prediction.
    """
    T = np.asarray(target, dtype=float).reshape(-1, 2)
    P = np.asarray(outcome.points, dtype=float).reshape(-1, 2)
    mean_nn = cov = None
    if len(P) and len(T):
        d2 = ((P[:, None, :] - T[None, :, :]) ** 2).sum(axis=-1)
        mean_nn = float(np.sqrt(d2.min(axis=1)).mean())
        cov = len(np.unique(d2.argmin(axis=1))) / len(T)
    return RewardBreakdown(
        r_format=format_reward(outcome, cfg),
        r_distance=_spatial_term(outcome, T, None, cfg),
        valid_format=outcome.valid_format,
        mean_nn_dist=mean_nn,
        coverage=cov,
    )
