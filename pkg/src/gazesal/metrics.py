"""Saliency metrics: KL, CC, SIM, NSS and AUC-Judd.

Distribution metrics (KL, SIM) compare maps normalized to unit mass.
Fixation metrics (NSS, AUC) take grid-unit points and snap them to the
nearest pixel of the prediction map.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional, Union

import numpy as np

from .saliency import KernelConfig, SaliencyMap, grid_to_pixel, normalize_map, render_heatmap

KL_EPS = 1e-12
NORM_TOL = 1e-9
METRIC_FIELDS = ("kl", "cc", "sim", "nss", "auc")

MapLike = Union[SaliencyMap, np.ndarray]


class MetricError(ValueError):
    pass


def _values(m: MapLike) -> np.ndarray:
    return m.values if isinstance(m, SaliencyMap) else np.asarray(m, dtype=float)


def _same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise MetricError(f"map dimensions differ: {a.shape} vs {b.shape}")


def kl_div(gt: MapLike, pred: MapLike) -> float:
    """KL(gt || pred) after normalizing both maps, with 1e-12 regularization."""
    g, p = _values(gt), _values(pred)
    _same_shape(g, p)
    g = normalize_map(g).values
    p = normalize_map(p).values
    return float(np.sum(g * np.log((g + KL_EPS) / (p + KL_EPS))))


def cc(gt: MapLike, pred: MapLike) -> float:
    g, p = _values(gt).ravel(), _values(pred).ravel()
    _same_shape(g, p)
    g = g - g.mean()
    p = p - p.mean()
    sg, sp = np.sqrt(np.sum(g * g)), np.sqrt(np.sum(p * p))
    if sg == 0 or sp == 0:
        raise MetricError("zero-variance map")
    return float(np.sum(g * p) / (sg * sp))


def sim(gt: MapLike, pred: MapLike) -> float:
    """Histogram intersection of two unit-mass maps."""
    g, p = _values(gt), _values(pred)
    _same_shape(g, p)
    for name, m in (("gt", g), ("pred", p)):
        if np.any(m < 0) or abs(m.sum() - 1.0) > NORM_TOL:
            raise MetricError(f"{name} map is not normalized")
    return float(np.sum(np.minimum(g, p)))


def fixation_pixels(points, width: int, height: int) -> np.ndarray:
    """Nearest-pixel (row, col) index pairs for grid-unit fixations."""
    px = grid_to_pixel(points, width, height)
    cols = np.clip(np.floor(px[:, 0] + 0.5), 0, width - 1).astype(int)
    rows = np.clip(np.floor(px[:, 1] + 0.5), 0, height - 1).astype(int)
    return np.column_stack([rows, cols])


def nss(pred: MapLike, fixations) -> float:
    p = _values(pred)
    pts = np.asarray(fixations, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise MetricError("no fixations")
    std = p.std()
    if std == 0:
        raise MetricError("zero-variance map")
    z = (p - p.mean()) / std
    rc = fixation_pixels(pts, p.shape[1], p.shape[0])
    return float(z[rc[:, 0], rc[:, 1]].mean())


def auc_judd(pred: MapLike, fixations) -> float:
    """AUC-Judd: ROC swept over the saliency values at fixated pixels.

    Pixels hit by several fixations count once. Tied values share one
    threshold, so a constant map scores exactly 0.5.
    """
    p = _values(pred)
    pts = np.asarray(fixations, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise MetricError("no fixations")
    rc = np.unique(fixation_pixels(pts, p.shape[1], p.shape[0]), axis=0)
    fix_vals = np.sort(p[rc[:, 0], rc[:, 1]])
    flat = np.sort(p.ravel())
    n_fix, n_pix = len(fix_vals), p.size
    n_neg = n_pix - n_fix
    thresholds = np.unique(fix_vals)[::-1]
    fix_above = n_fix - np.searchsorted(fix_vals, thresholds, side="left")
    all_above = n_pix - np.searchsorted(flat, thresholds, side="left")
    tp = np.concatenate([[0.0], fix_above / n_fix, [1.0]])
    neg_above = all_above - fix_above
    fp = np.concatenate([[0.0], neg_above / n_neg if n_neg > 0 else np.zeros(len(thresholds)), [1.0]])
    return float(np.sum((fp[1:] - fp[:-1]) * (tp[1:] + tp[:-1]) / 2.0))


@dataclass
class MetricReport:
    kl: float
    cc: float
    sim: float
    nss: float
    auc: float
    scene: str = ""
    group: str = ""

    def as_row(self) -> dict:
        d = asdict(self)
        return {"scene": d.pop("scene"), "group": d.pop("group"), **d}


def compare_maps(pred: MapLike, gt_map: MapLike, fixations, scene: str = "", group: str = "") -> MetricReport:
    pred_n = normalize_map(pred)
    gt_n = normalize_map(gt_map)
    return MetricReport(
        kl=kl_div(gt_n, pred_n),
        cc=cc(gt_n, pred_n),
        sim=sim(gt_n, pred_n),
        nss=nss(pred_n, fixations),
        auc=auc_judd(pred_n, fixations),
        scene=scene,
        group=group,
    )


def evaluate(
    pred: MapLike,
    gt_points,
    width: Optional[int] = None,
    height: Optional[int] = None,
    scene: str = "",
    group: str = "",
    cfg: KernelConfig = KernelConfig(),
    nss_points=None,
) -> MetricReport:
    """All five metrics for one scene.

    The ground-truth map is rendered from ``gt_points`` with ``cfg``; NSS and
    AUC use ``gt_points`` too unless ``nss_points`` (e.g. raw fixations) is given.
    """
    p = _values(pred)
    pts = np.asarray(gt_points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise MetricError("no ground-truth fixations")
    height = p.shape[0] if height is None else height
    width = p.shape[1] if width is None else width
    gt_map = render_heatmap(pts, width, height, cfg)
    fix = pts if nss_points is None else nss_points
    return compare_maps(p, gt_map, fix, scene, group)
