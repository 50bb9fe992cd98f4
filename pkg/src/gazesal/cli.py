"""``gazesal`` command line: ingest -> cluster -> render -> eval -> report, plus
parameter sweeps and toy policy training.

Output tree (``--out``)::

    ingest_summary.csv
    fixations/<P>/<group>/<video>_<ssss>.json   raw gaze, grid units
    clustered/<P>/<group>/<video>_<ssss>.json   consolidated fixations
    maps/<P>/<group>/<video>_<ssss>.salmap      ground-truth heatmaps
    eval/<P>/per_scene.csv, eval/<P>/aggregate.csv
    report/...                                  PNGs and tables

Every stage reads only the files of the previous one and rewrites its own
directory from scratch, so any suffix of the pipeline can be re-run.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import shutil
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import plots
from .cgrpo import (
    Example,
    GrpoConfig,
    ToyPolicy,
    evaluate_policy,
    offline_scores,
    sample_group,
    save_policy,
    synthetic_group_dataset,
    train,
)
from .clustering import ClusterPolicy, adaptive_cluster, dbscan
from .data import (
    GroupLabel,
    Protocol,
    ValidationError,
    dump_gaze_log,
    dump_manifest,
    dump_profiles,
    group_by_protocol,
    load_gaze_log,
    load_manifest,
    load_profiles,
    segment_scenes,
    synthesize_corpus,
)
from .geometry import normalize_to_grid
from .metrics import METRIC_FIELDS, MetricError, compare_maps
from .protocol import parse, read_batch
from .rewards import RewardConfig
from .saliency import (
    DegenerateMapError,
    KernelConfig,
    SaliencyMap,
    center_bias,
    downsample,
    load_map,
    render_heatmap,
    save_map,
    save_png,
)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("gazesal")

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_INTERNAL = 0, 1, 2, 3
FLOAT_FMT = "{:.6f}"


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------


@dataclass
class PipelineConfig:
    gaze_log: Optional[Path] = None
    gaze_format: str = "csv"
    profiles: Optional[Path] = None
    manifest: Optional[Path] = None
    out: Path = Path("out")
    protocols: Tuple[str, ...] = ("P1", "P2")
    nss_fixations: str = "clustered"  # or "raw"
    downsample: int = 1
    seed: int = 0
    jobs: int = 1
    cluster: ClusterPolicy = field(default_factory=ClusterPolicy)
    kernel: KernelConfig = field(default_factory=KernelConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    grpo: GrpoConfig = field(default_factory=GrpoConfig)

    def __post_init__(self):
        self.protocols = tuple(Protocol(p).value for p in self.protocols)
        if self.nss_fixations not in ("clustered", "raw"):
            raise ValidationError("nss_fixations must be 'clustered' or 'raw'")
        if self.gaze_format not in ("csv", "jsonl"):
            raise ValidationError("gaze_format must be 'csv' or 'jsonl'")
        if self.downsample < 1 or self.jobs < 1:
            raise ValidationError("downsample and jobs must be >= 1")


_SECTIONS = {"cluster": ClusterPolicy, "kernel": KernelConfig, "reward": RewardConfig, "grpo": GrpoConfig}
_PATH_KEYS = ("gaze_log", "profiles", "manifest", "out")


def _build(cls, values: dict, where: str):
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ValidationError(f"unknown key(s) in [{where}]: {', '.join(unknown)}")
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"[{where}]: {exc}") from None


def load_config(path: Optional[Path]) -> PipelineConfig:
    """TOML or JSON with sections ``paths``, ``pipeline``, ``cluster``,
    ``kernel``, ``reward`` and ``grpo``. Relative paths resolve against the
    config file's directory."""
    if path is None:
        return PipelineConfig()
    path = Path(path)
    raw = path.read_bytes()
    try:
        data = json.loads(raw) if path.suffix == ".json" else tomllib.loads(raw.decode("utf-8"))
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ValidationError(f"cannot parse config: {exc}", source=str(path)) from None
    unknown = sorted(set(data) - {"paths", "pipeline", *_SECTIONS})
    if unknown:
        raise ValidationError(f"unknown config section(s): {', '.join(unknown)}", source=str(path))
    top: dict = {}
    for key, value in data.get("paths", {}).items():
        if key in _PATH_KEYS:
            value = path.parent / value
        top[key] = value
    top.update(data.get("pipeline", {}))
    if "protocols" in top and isinstance(top["protocols"], str):
        top["protocols"] = [top["protocols"]]
    for name, cls in _SECTIONS.items():
        if name in data:
            top[name] = _build(cls, data[name], name)
    if "seed" in top and "seed" not in data.get("grpo", {}):
        top["grpo"] = replace(top.get("grpo", GrpoConfig()), seed=int(top["seed"]))
    return _build(PipelineConfig, top, "paths/pipeline")


def _apply_overrides(cfg: PipelineConfig, args: argparse.Namespace) -> PipelineConfig:
    over = {}
    for key in ("gaze_log", "profiles", "manifest", "out"):
        v = getattr(args, key, None)
        if v is not None:
            over[key] = Path(v)
    if getattr(args, "gaze_format", None):
        over["gaze_format"] = args.gaze_format
    if getattr(args, "protocol", None):
        over["protocols"] = tuple(args.protocol)
    if getattr(args, "nss_fixations", None):
        over["nss_fixations"] = args.nss_fixations
    if getattr(args, "downsample", None):
        over["downsample"] = args.downsample
    if args.jobs is not None:
        over["jobs"] = args.jobs
    grpo = cfg.grpo
    if args.seed is not None:
        over["seed"] = args.seed
        grpo = replace(grpo, seed=args.seed)
    for section, cls, current in (("grpo", GrpoConfig, grpo), ("reward", RewardConfig, cfg.reward)):
        sec_over = {
            f.name: getattr(args, f"{section}__{f.name}") for f in fields(cls)
            if getattr(args, f"{section}__{f.name}", None) is not None
        }
        over[section] = _build(cls, {**asdict(current), **sec_over}, section) if sec_over else current
    return replace(cfg, **over)


def _require(path: Optional[Path], what: str) -> Path:
    if path is None:
        raise ValidationError(f"no {what} given (use --{what.replace('_', '-')} or [paths] {what})")
    return path


# --------------------------------------------------------------------------
# file helpers
# --------------------------------------------------------------------------


def _fresh_dir(path: Path) -> Path:
    if path.exists():
        shutil.rmtree(path)
    path.mkdir(parents=True)
    return path


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else FLOAT_FMT.format(v)
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[dict]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r[h]) for h in header])
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue())


def read_csv(path: Path) -> List[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def text_table(header: Sequence[str], rows: Iterable[dict]) -> str:
    body = [[_fmt(r[h]) for h in header] for r in rows]
    widths = [max([len(h)] + [len(b[i]) for b in body]) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(b, widths)) for b in body]
    return "\n".join(lines)


@dataclass(frozen=True)
class SceneFile:
    video_id: str
    second: int
    group: str
    protocol: str
    width: int
    height: int
    points: np.ndarray

    @property
    def stem(self) -> str:
        return f"{self.video_id}_{self.second:04d}"

    def header(self) -> dict:
        return {
            "video_id": self.video_id, "second": self.second, "group": self.group,
            "protocol": self.protocol, "width": self.width, "height": self.height,
        }


def write_scene(path: Path, scene: SceneFile) -> None:
    """JSON with one point per line so diffs stay readable."""
    head = json.dumps(scene.header())[:-1]
    pts = ",\n".join(json.dumps([_num(x), _num(y)]) for x, y in scene.points)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(f'{head}, "points": [\n{pts}\n]}}\n' if pts else f'{head}, "points": []}}\n')


def _num(v: float):
    v = float(v)
    return int(v) if v.is_integer() else v


def read_scene(path: Path) -> SceneFile:
    try:
        obj = json.loads(Path(path).read_text())
        pts = np.asarray(obj["points"], dtype=float).reshape(-1, 2)
        return SceneFile(
            str(obj["video_id"]), int(obj["second"]), str(obj["group"]), str(obj["protocol"]),
            int(obj["width"]), int(obj["height"]), pts,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad scene file ({exc})", source=str(path)) from None


def scene_files(root: Path, protocol: str, group: Optional[str] = None) -> List[Path]:
    base = root / protocol
    if not base.is_dir():
        return []
    groups = [group] if group else [g.value for g in Protocol(protocol).groups]
    out = []
    for g in groups:
        out += sorted((base / g).glob("*.json"))
    return out


def pmap(fn: Callable, items: Sequence, jobs: int) -> List:
    """Ordered map, in-process for ``jobs == 1``."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


# --------------------------------------------------------------------------
# stages
# --------------------------------------------------------------------------


SUMMARY_HEADER = ("protocol", "videos", "scenes", "avg_fixpn")


def cmd_ingest(cfg: PipelineConfig, args) -> List[dict]:
    samples = load_gaze_log(_require(cfg.gaze_log, "gaze_log"), cfg.gaze_format)
    videos = load_manifest(_require(cfg.manifest, "manifest"))
    profiles = load_profiles(_require(cfg.profiles, "profiles"))

    by_video: Dict[str, list] = {}
    for i, s in enumerate(samples, start=1):
        if s.video_id not in videos:
            raise ValidationError(f"video {s.video_id!r} not in manifest", i, str(cfg.gaze_log))
        by_video.setdefault(s.video_id, []).append(s)

    root = _fresh_dir(cfg.out / "fixations")
    counts = {p: [0, 0] for p in cfg.protocols}  # scenes, points
    for vid in sorted(by_video):
        info = videos[vid]
        for window, scene_samples in segment_scenes(by_video[vid], info).items():
            for proto in cfg.protocols:
                groups = group_by_protocol(scene_samples, profiles, proto)
                for label in Protocol(proto).groups:
                    members = groups[label]
                    if not members:
                        log.warning("scene %s: no samples for group %s under %s", window.stem, label.value, proto)
                        continue
                    try:
                        pts = np.array([normalize_to_grid(s.x, s.y, info.width, info.height) for s in members], dtype=float)
                    except ValueError as exc:
                        raise ValidationError(f"scene {window.stem}: {exc}", source=str(cfg.gaze_log)) from None
                    scene = SceneFile(vid, window.second_index, label.value, proto, info.width, info.height, pts)
                    write_scene(root / proto / label.value / f"{window.stem}.json", scene)
                    counts[proto][0] += 1
                    counts[proto][1] += len(pts)

    rows = [
        {"protocol": p, "videos": len(by_video), "scenes": n, "avg_fixpn": (k / n) if n else float("nan")}
        for p, (n, k) in counts.items()
    ]
    write_csv(cfg.out / "ingest_summary.csv", SUMMARY_HEADER, rows)
    print(text_table(SUMMARY_HEADER, rows))
    return rows


def _cluster_one(job) -> int:
    src, dst, policy = job
    scene = read_scene(src)
    write_scene(dst, replace(scene, points=adaptive_cluster(scene.points, policy)))
    return len(scene.points)


def cmd_cluster(cfg: PipelineConfig, args) -> None:
    src_root = cfg.out / "fixations"
    dst_root = _fresh_dir(cfg.out / "clustered")
    for proto in cfg.protocols:
        files = scene_files(src_root, proto)
        if not files:
            raise ValidationError(f"no {proto} fixation files under {src_root}; run ingest first")
        jobs = [(f, dst_root / f.relative_to(src_root), cfg.cluster) for f in files]
        n = pmap(_cluster_one, jobs, cfg.jobs)
        log.info("%s: clustered %d scene files (%d raw points)", proto, len(files), sum(n))


def _render_one(job) -> None:
    src, dst, kernel = job
    scene = read_scene(src)
    save_map(dst, render_heatmap(scene.points, scene.width, scene.height, kernel))


def cmd_render(cfg: PipelineConfig, args) -> None:
    src_root = cfg.out / "clustered"
    dst_root = _fresh_dir(cfg.out / "maps")
    for proto in cfg.protocols:
        files = scene_files(src_root, proto)
        if not files:
            raise ValidationError(f"no {proto} clustered files under {src_root}; run cluster first")
        jobs = []
        for f in files:
            dst = (dst_root / f.relative_to(src_root)).with_suffix(".salmap")
            dst.parent.mkdir(parents=True, exist_ok=True)
            jobs.append((f, dst, cfg.kernel))
        pmap(_render_one, jobs, cfg.jobs)


# -- evaluation -------------------------------------------------------------

EVAL_HEADER = ("scene", "group") + METRIC_FIELDS
AGG_HEADER = ("aggregation", "group", "n_scenes") + METRIC_FIELDS
SUMMARY_EVAL_HEADER = ("method", "protocol") + METRIC_FIELDS


def _load_predictions(pred: Optional[Path]) -> Tuple[str, object]:
    """``("baseline", None)``, ``("maps", root)`` or ``("text", {id: text})``."""
    if pred is None:
        return "baseline", None
    if pred.is_dir():
        return "maps", pred
    with open(pred) as fh:
        records = read_batch(fh)
    return "text", {r.prompt_id: r.text for r in records}


def _eval_one(job) -> dict:
    gt_path, map_path, fix_path, pred_kind, pred_src, kernel, factor = job
    gt = read_scene(gt_path)
    key = f"{gt.protocol}/{gt.group}/{gt.stem}"
    row = {"scene": gt.stem, "group": gt.group, **{m: float("nan") for m in METRIC_FIELDS}}
    gt_map = load_map(map_path)
    if pred_kind == "baseline":
        pred = center_bias(gt.width, gt.height)
    elif pred_kind == "maps":
        p = Path(pred_src) / gt.protocol / gt.group / f"{gt.stem}.salmap"
        if not p.exists():
            log.warning("%s: no prediction map", key)
            return row
        pred = load_map(p)
    else:
        text = pred_src.get(key)
        outcome = parse(text) if text is not None else None
        if outcome is None or not outcome.valid_format or not outcome.points:
            log.warning("%s: missing or unusable prediction", key)
            return row
        pred = render_heatmap(outcome.points, gt.width, gt.height, kernel)
    fix = gt.points if fix_path is None else read_scene(fix_path).points
    try:
        rep = compare_maps(downsample(pred, factor), downsample(gt_map, factor), fix)
    except (MetricError, DegenerateMapError) as exc:
        log.warning("%s: %s", key, exc)
        return row
    row.update({m: getattr(rep, m) for m in METRIC_FIELDS})
    return row


def aggregate(rows: Sequence[dict], protocol: str) -> List[dict]:
    """Mean metrics per group. Under P2 two aggregations are reported: each
    group over all of its own scenes, and every group restricted to the
    scenes that all six groups share."""
    labels = [g.value for g in Protocol(protocol).groups]

    def mean_rows(name: str, subset: Sequence[dict]) -> List[dict]:
        out = []
        for g in labels:
            sel = [r for r in subset if r["group"] == g]
            if not sel:
                continue
            agg = {"aggregation": name, "group": g, "n_scenes": len(sel)}
            for m in METRIC_FIELDS:
                vals = np.array([float(r[m]) for r in sel])
                agg[m] = float(np.nanmean(vals)) if np.isfinite(vals).any() else float("nan")
            out.append(agg)
        return out

    out = mean_rows("independent", rows)
    if protocol == Protocol.P2.value:
        scenes: Dict[str, set] = {}
        for r in rows:
            scenes.setdefault(r["scene"], set()).add(r["group"])
        shared = {s for s, g in scenes.items() if len(g) == len(labels)}
        out += mean_rows("shared_scenes", [r for r in rows if r["scene"] in shared])
    return out


def cmd_eval(cfg: PipelineConfig, args) -> Dict[str, List[dict]]:
    pred_kind, pred_src = _load_predictions(Path(args.pred) if getattr(args, "pred", None) else None)
    gt_root, map_root, raw_root = cfg.out / "clustered", cfg.out / "maps", cfg.out / "fixations"
    out_root = _fresh_dir(cfg.out / "eval")
    method = getattr(args, "method", None) or ("center_bias" if pred_kind == "baseline" else Path(args.pred).stem)
    results = {}
    summary = []
    for proto in cfg.protocols:
        files = scene_files(gt_root, proto)
        if not files:
            raise ValidationError(f"no {proto} clustered files under {gt_root}")
        jobs = []
        for f in files:
            rel = f.relative_to(gt_root)
            m = (map_root / rel).with_suffix(".salmap")
            if not m.exists():
                raise FileNotFoundError(f"missing map {m}; run render first")
            fix = raw_root / rel if cfg.nss_fixations == "raw" else None
            jobs.append((f, m, fix, pred_kind, pred_src, cfg.kernel, cfg.downsample))
        rows = pmap(_eval_one, jobs, cfg.jobs)
        order = {g.value: i for i, g in enumerate(Protocol(proto).groups)}
        rows.sort(key=lambda r: (r["scene"], order[r["group"]]))
        agg = aggregate(rows, proto)
        write_csv(out_root / proto / "per_scene.csv", EVAL_HEADER, rows)
        write_csv(out_root / proto / "aggregate.csv", AGG_HEADER, agg)
        print(f"[{proto}] prediction: {pred_kind}")
        print(text_table(AGG_HEADER, agg))
        results[proto] = rows
        row = {"method": method, "protocol": proto}
        for m in METRIC_FIELDS:
            vals = np.array([float(r[m]) for r in rows])
            row[m] = float(np.nanmean(vals)) if np.isfinite(vals).any() else float("nan")
        summary.append(row)
    write_csv(out_root / "summary.csv", SUMMARY_EVAL_HEADER, summary)
    print(text_table(SUMMARY_EVAL_HEADER, summary))
    return results


# -- report -----------------------------------------------------------------


def cmd_report(cfg: PipelineConfig, args) -> None:
    map_root = cfg.out / "maps"
    rep_root = _fresh_dir(cfg.out / "report")
    md = ["# Saliency report", ""]
    summary = cfg.out / "ingest_summary.csv"
    if summary.exists():
        shutil.copyfile(summary, rep_root / "ingest_summary.csv")
        md += ["## Ingest", "", "```", text_table(SUMMARY_HEADER, read_csv(summary)), "```", ""]
    for proto in cfg.protocols:
        labels = [g.value for g in Protocol(proto).groups]
        base = map_root / proto
        stems = sorted({p.stem for g in labels for p in (base / g).glob("*.salmap")}) if base.is_dir() else []
        if not stems:
            log.warning("%s: no maps to report", proto)
            continue
        for label in labels:
            if not (base / label).is_dir():
                log.warning("%s: group %s has no observers; skipped", proto, label)
        md += [f"## {proto}", ""]
        for stem in stems:
            panels: Dict[str, Optional[SaliencyMap]] = {}
            for label in labels:
                p = base / label / f"{stem}.salmap"
                if not p.exists():
                    log.warning("%s %s: group %s empty; skipped", proto, stem, label)
                    panels[label] = None
                    continue
                smap = load_map(p)
                panels[label] = smap
                out = rep_root / proto / "heatmaps" / stem / f"{label}.png"
                out.parent.mkdir(parents=True, exist_ok=True)
                save_png(out, smap, cmap="jet")
            grid = rep_root / proto / "grids" / f"{stem}.png"
            grid.parent.mkdir(parents=True, exist_ok=True)
            plots.group_grid(panels, grid, title=f"{proto} {stem}", ncols=min(3, len(labels)))
        agg_path = cfg.out / "eval" / proto / "aggregate.csv"
        if agg_path.exists():
            agg = read_csv(agg_path)
            shutil.copyfile(agg_path, rep_root / proto / "aggregate.csv")
            plots.metric_bars([r for r in agg if r["aggregation"] == "independent"], rep_root / proto / "metrics.png", title=proto)
            md += ["```", text_table(AGG_HEADER, agg), "```", ""]
        else:
            log.warning("%s: no evaluation results; metric tables skipped", proto)
        md += [f"{len(stems)} scenes, heatmaps under `{proto}/heatmaps/`, group grids under `{proto}/grids/`.", ""]
    (rep_root / "report.md").write_text("\n".join(md))


def cmd_run(cfg: PipelineConfig, args) -> None:
    cmd_ingest(cfg, args)
    cmd_cluster(cfg, args)
    cmd_render(cfg, args)
    cmd_eval(cfg, args)
    cmd_report(cfg, args)


# -- scoring ----------------------------------------------------------------

SCORE_HEADER = ("prompt_id", "r_format", "r_distance", "r_total", "advantage")


def _load_targets(path: Path) -> Dict[str, np.ndarray]:
    """A JSON object ``{prompt_id: [[gx, gy], ...]}`` or a scene-file tree
    (ids ``<P>/<group>/<stem>``)."""
    if path.is_dir():
        out = {}
        for f in sorted(path.glob("*/*/*.json")):
            s = read_scene(f)
            out[f"{s.protocol}/{s.group}/{s.stem}"] = s.points
        return out
    data = json.loads(path.read_text())
    if not isinstance(data, dict):
        raise ValidationError("targets file must be a JSON object", source=str(path))
    return {str(k): np.asarray(v, dtype=float).reshape(-1, 2) for k, v in data.items()}


def cmd_score(cfg: PipelineConfig, args) -> List[dict]:
    with open(args.outputs) as fh:
        records = read_batch(fh)
    targets = _load_targets(Path(args.targets))
    try:
        rows = offline_scores(records, targets, cfg.reward)
    except KeyError as exc:
        raise ValidationError(str(exc.args[0])) from None
    dst = Path(args.dest) if args.dest else cfg.out / "scores.csv"
    write_csv(dst, SCORE_HEADER, rows)
    if rows:
        print(f"{len(rows)} outputs, mean r_total {np.mean([r['r_total'] for r in rows]):.6f}, "
              f"valid {np.mean([r['r_format'] > 0 for r in rows]):.3f} -> {dst}")
    return rows


# -- sweeps -----------------------------------------------------------------

DBSCAN_HEADER = ("eps", "min_pts") + METRIC_FIELDS + ("maxn_pts",)


def _dbscan_one(job) -> Tuple[dict, int]:
    path, eps, min_pts, kernel, factor = job
    scene = read_scene(path)
    cents = dbscan(scene.points, eps, min_pts).centroids
    row = {m: float("nan") for m in METRIC_FIELDS}
    raw_map = render_heatmap(scene.points, scene.width, scene.height, kernel)
    try:
        cl_map = render_heatmap(cents, scene.width, scene.height, kernel)
        rep = compare_maps(downsample(cl_map, factor), downsample(raw_map, factor), scene.points)
        row = {m: getattr(rep, m) for m in METRIC_FIELDS}
    except (MetricError, DegenerateMapError) as exc:
        log.warning("%s eps=%g minPts=%d: %s", scene.stem, eps, min_pts, exc)
    return row, len(cents)


def sweep_dbscan(files: Sequence[Path], settings: Sequence[Tuple[float, int]], kernel: KernelConfig,
                 factor: int = 1, jobs: int = 1) -> List[dict]:
    """Clustered-vs-raw heatmap agreement and the largest per-scene cluster count per setting."""
    rows = []
    for eps, min_pts in settings:
        res = pmap(_dbscan_one, [(f, eps, min_pts, kernel, factor) for f in files], jobs)
        row = {"eps": eps, "min_pts": min_pts}
        for m in METRIC_FIELDS:
            vals = np.array([r[m] for r, _ in res])
            row[m] = float(np.nanmean(vals)) if np.isfinite(vals).any() else float("nan")
        row["maxn_pts"] = max(n for _, n in res)
        rows.append(row)
    return rows


def cmd_sweep_dbscan(cfg: PipelineConfig, args) -> List[dict]:
    proto = args.sweep_protocol
    files = scene_files(cfg.out / "fixations", proto, args.group)
    if not files:
        raise ValidationError(f"no {proto}/{args.group} fixation files; run ingest first")
    settings = [(e, m) for e in args.eps for m in args.min_pts]
    rows = sweep_dbscan(files, settings, cfg.kernel, cfg.downsample, cfg.jobs)
    dst = cfg.out / "sweeps"
    write_csv(dst / "sweep_dbscan.csv", DBSCAN_HEADER, rows)
    plots.sweep_lines(rows, "eps", "min_pts", dst / "sweep_dbscan.png", title="DBSCAN parameters")
    print(text_table(DBSCAN_HEADER, rows))
    return rows


TOY_HEADER = ("r_base", "r_extra") + METRIC_FIELDS + ("valid_rate", "mean_reward", "mean_nn_dist")


def toy_dataset(cfg: PipelineConfig, source: str, protocol: str = "P2") -> List[Example]:
    if source == "synthetic":
        return synthetic_group_dataset(seed=cfg.seed)
    files = scene_files(cfg.out / "clustered", protocol)
    if not files:
        raise ValidationError(f"no {protocol} clustered files; run the pipeline first")
    out = []
    for f in files:
        s = read_scene(f)
        out.append(Example(f"{s.group}|{s.stem}", s.points))
    return out


def toy_metrics(policy: ToyPolicy, dataset: Sequence[Example], reward_cfg: RewardConfig, kernel: KernelConfig) -> dict:
    """Sampled-output statistics plus saliency metrics of the pooled predicted
    points against each example's target heatmap."""
    ev = evaluate_policy(policy, dataset, reward_cfg)
    per = {m: [] for m in METRIC_FIELDS}
    for ex in dataset:
        pts = ev.points[ex.context]
        try:
            pred = render_heatmap(pts, ex.width, ex.height, kernel)
            rep = compare_maps(pred, render_heatmap(ex.targets, ex.width, ex.height, kernel), ex.targets)
        except (MetricError, DegenerateMapError):
            continue
        for m in METRIC_FIELDS:
            per[m].append(getattr(rep, m))
    row = {"r_base": reward_cfg.r_base, "r_extra": reward_cfg.r_extra}
    row.update({m: float(np.mean(v)) if v else float("nan") for m, v in per.items()})
    row.update(valid_rate=ev.valid_rate, mean_reward=ev.mean_reward, mean_nn_dist=ev.mean_nn_dist)
    return row


def run_toy(cfg: PipelineConfig, reward_cfg: RewardConfig, dataset: Sequence[Example]):
    policy, trace = train(dataset, cfg.grpo, reward_cfg)
    return policy, trace, toy_metrics(policy, dataset, reward_cfg, cfg.kernel)


def cmd_train_toy(cfg: PipelineConfig, args) -> dict:
    dataset = toy_dataset(cfg, args.dataset)
    policy, trace, row = run_toy(cfg, cfg.reward, dataset)
    dst = Path(args.dest) if args.dest else cfg.out / "toy"
    dst.mkdir(parents=True, exist_ok=True)
    (dst / "trace.csv").write_text(trace.to_csv())
    save_policy(dst / "policy.bin", policy, cfg.grpo, cfg.reward)
    write_csv(dst / "metrics.csv", TOY_HEADER, [row])
    plots.training_curves(trace, dst / "training.png")
    if args.predictions:
        lines = []
        for k, ex in enumerate(dataset):
            s = sample_group(policy, ex.context, 2, (cfg.grpo.seed, 1_000_003, k))[0]
            lines.append(json.dumps({"prompt_id": ex.context, "text": s.text}) + "\n")
        (dst / "predictions.jsonl").write_text("".join(lines))
    print(text_table(TOY_HEADER, [row]))
    return row


def _parse_settings(text: str) -> List[Tuple[float, float]]:
    out = []
    for item in text.split(","):
        try:
            a, b = item.split(":")
            out.append((float(a), float(b)))
        except ValueError:
            raise ValidationError(f"bad reward setting {item!r}; expected r_base:r_extra") from None
    return out


def cmd_sweep_reward(cfg: PipelineConfig, args) -> List[dict]:
    dataset = toy_dataset(cfg, args.dataset)
    rows = []
    for r_base, r_extra in _parse_settings(args.settings):
        reward_cfg = _build(RewardConfig, {**asdict(cfg.reward), "r_base": r_base, "r_extra": r_extra}, "reward")
        _, _, row = run_toy(cfg, reward_cfg, dataset)
        rows.append(row)
        log.info("r_base=%g r_extra=%g done", r_base, r_extra)
    dst = cfg.out / "sweeps"
    write_csv(dst / "sweep_reward.csv", TOY_HEADER, rows)
    for r in rows:
        r["setting"] = f"{r['r_base']:g}/{r['r_extra']:g}"
    plots.metric_bars(rows, dst / "sweep_reward.png", label_key="setting", title="format reward balance")
    print(text_table(TOY_HEADER, rows))
    return rows


def cmd_synth(cfg: PipelineConfig, args) -> None:
    """Write a synthetic corpus and a config file pointing at it."""
    corpus = synthesize_corpus(n_videos=args.videos, n_observers=args.observers, seconds=args.seconds,
                               seed=cfg.seed, resolution=(args.width, args.height))
    dst = Path(args.dest)
    dst.mkdir(parents=True, exist_ok=True)
    (dst / "gaze.csv").write_text(dump_gaze_log(corpus.samples))
    (dst / "profiles.csv").write_text(dump_profiles(corpus.profiles.values()))
    (dst / "manifest.json").write_text(dump_manifest(corpus.videos.values()))
    (dst / "config.toml").write_text(
        '[paths]\ngaze_log = "gaze.csv"\nprofiles = "profiles.csv"\nmanifest = "manifest.json"\nout = "out"\n\n'
        f'[pipeline]\nprotocols = ["P1", "P2"]\nseed = {cfg.seed}\n'
    )
    print(f"{len(corpus.samples)} samples, {len(corpus.profiles)} observers, {len(corpus.videos)} videos -> {dst}")


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _csv_floats(text: str) -> List[float]:
    return [float(x) for x in text.split(",")]


def _csv_ints(text: str) -> List[int]:
    return [int(x) for x in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML or JSON config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int, help="worker processes for scene-level work")
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    proto = _Parser(add_help=False)
    proto.add_argument("--protocol", action="append", choices=[p.value for p in Protocol], help="repeatable; default from config")

    data = _Parser(add_help=False)
    data.add_argument("--gaze-log", dest="gaze_log")
    data.add_argument("--gaze-format", dest="gaze_format", choices=["csv", "jsonl"])
    data.add_argument("--profiles")
    data.add_argument("--manifest")

    evalp = _Parser(add_help=False)
    evalp.add_argument("--pred", help="directory of .salmap predictions or JSONL {prompt_id, text}; default: center-bias baseline")
    evalp.add_argument("--nss-fixations", dest="nss_fixations", choices=["clustered", "raw"])
    evalp.add_argument("--method", help="label for the prediction in eval/summary.csv")
    evalp.add_argument("--downsample", type=int, help="block-sum factor applied to maps before metrics")

    toy = _Parser(add_help=False)
    toy.add_argument("--dataset", choices=["synthetic", "clustered"], default="synthetic")
    for section, cls in (("grpo", GrpoConfig), ("reward", RewardConfig)):
        for f in fields(cls):
            if f.name == "seed":
                continue
            flag = "--" + f.name.replace("_", "-")
            if isinstance(f.default, bool):
                toy.add_argument(flag, dest=f"{section}__{f.name}", action=argparse.BooleanOptionalAction, default=None)
            else:
                toy.add_argument(flag, dest=f"{section}__{f.name}", type=type(f.default), metavar=f.name.upper(), help=f"[{section}] {f.name}")

    parser = _Parser(prog="gazesal", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, parents, help):
        p = sub.add_parser(name, parents=[common, *parents], help=help)
        p.set_defaults(func=fn)
        return p

    add("ingest", cmd_ingest, [proto, data], "segment gaze logs into per-scene fixation files")
    add("cluster", cmd_cluster, [proto], "consolidate fixations with adaptive DBSCAN")
    add("render", cmd_render, [proto], "render clustered fixations to heatmaps")
    add("eval", cmd_eval, [proto, evalp], "score predictions against the heatmaps")
    add("report", cmd_report, [proto], "write heatmap PNGs, group grids and metric tables")
    add("run", cmd_run, [proto, data, evalp], "ingest, cluster, render, eval and report in one go")

    p = add("score", cmd_score, [], "format/spatial rewards for a JSONL dump of model outputs")
    p.add_argument("outputs", help="JSONL with prompt_id and text")
    p.add_argument("--targets", required=True, help="JSON {prompt_id: points} or a scene-file tree")
    p.add_argument("--dest", help="CSV path (default <out>/scores.csv)")

    p = add("sweep-dbscan", cmd_sweep_dbscan, [evalp], "clustered-vs-raw heatmap agreement over DBSCAN settings")
    p.add_argument("--eps", type=_csv_floats, default=[0.03, 0.04, 0.05])
    p.add_argument("--min-pts", dest="min_pts", type=_csv_ints, default=[1])
    p.add_argument("--sweep-protocol", dest="sweep_protocol", choices=[p.value for p in Protocol], default="P1")
    p.add_argument("--group", default=GroupLabel.ALL.value)

    p = add("sweep-reward", cmd_sweep_reward, [toy], "toy training per (r_base, r_extra) setting")
    p.add_argument("--settings", default="0.2:0.8,0.5:0.5,0.8:0.2")

    p = add("train-toy", cmd_train_toy, [toy], "train the toy point policy with group-relative updates")
    p.add_argument("--dest", help="output directory (default <out>/toy)")
    p.add_argument("--predictions", action="store_true", help="also write one sampled output per context")

    p = add("synth", cmd_synth, [], "write a synthetic gaze corpus and config")
    p.add_argument("dest")
    p.add_argument("--videos", type=int, default=3)
    p.add_argument("--observers", type=int, default=24)
    p.add_argument("--seconds", type=int, default=4)
    p.add_argument("--width", type=int, default=960)
    p.add_argument("--height", type=int, default=540)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        args.func(cfg, args)
    except (ValidationError, MetricError, DegenerateMapError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # invariant violations and bugs
        log.debug("internal error", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
