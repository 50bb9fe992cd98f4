"""Gaze-point saliency toolkit: fixation ingestion, DBSCAN consolidation,
heatmap rendering, saliency metrics, the point message protocol, consistency
rewards and a toy group-relative policy optimizer."""

from .clustering import ClusterPolicy, adaptive_cluster, dbscan
from .data import GroupLabel, Protocol, ValidationError
from .metrics import auc_judd, cc, evaluate, kl_div, nss, sim
from .protocol import ParseOutcome, PointMessage, parse, serialize
from .rewards import RewardConfig, format_reward, spatial_reward, total_reward
from .saliency import KernelConfig, SaliencyMap, normalize_map, render_heatmap

__version__ = "0.1.0"

__all__ = [
    "ClusterPolicy", "adaptive_cluster", "dbscan",
    "GroupLabel", "Protocol", "ValidationError",
    "auc_judd", "cc", "evaluate", "kl_div", "nss", "sim",
    "ParseOutcome", "PointMessage", "parse", "serialize",
    "RewardConfig", "format_reward", "spatial_reward", "total_reward",
    "KernelConfig", "SaliencyMap", "normalize_map", "render_heatmap",
]
