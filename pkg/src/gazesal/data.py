"""Gaze, observer and scene records; log ingestion, one-second segmentation and
demographic grouping, plus a synthetic corpus generator for tests and demos."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

log = logging.getLogger(__name__)

GAZE_COLUMNS = ("observer_id", "video_id", "t", "x", "y")
PROFILE_COLUMNS = ("observer_id", "age", "gender")
SAMPLE_RATE_HZ = 30
AGE_RANGE = (20, 55)
AGE_SPLIT = 30
SPA_ADV_RESOLUTIONS = ((960, 540), (640, 360))

Source = Union[str, os.PathLike, bytes, IO[bytes], IO[str]]


class ValidationError(ValueError):
    """Malformed or out-of-contract input. ``row`` is 1-based over data rows."""

    def __init__(self, message: str, row: Optional[int] = None, source: Optional[str] = None):
        self.row = row
        self.source = source
        prefix = ""
        if source:
            prefix += f"{source}: "
        if row is not None:
            prefix += f"row {row}: "
        super().__init__(prefix + message)


class Gender(str, Enum):
    MALE = "male"
    FEMALE = "female"

    @classmethod
    def parse(cls, text: str) -> "Gender":
        key = text.strip().upper()
        if key in ("M", "MALE"):
            return cls.MALE
        if key in ("F", "FEMALE"):
            return cls.FEMALE
        raise ValueError(f"unknown gender {text!r}")

    @property
    def code(self) -> str:
        return "M" if self is Gender.MALE else "F"


class GroupLabel(str, Enum):
    ALL = "all"
    MALE = "male"
    FEMALE = "female"
    MALE_OVER30 = "male_over30"
    MALE_UNDER30 = "male_under30"
    FEMALE_OVER30 = "female_over30"
    FEMALE_UNDER30 = "female_under30"


P2_GROUPS = (
    GroupLabel.MALE,
    GroupLabel.FEMALE,
    GroupLabel.MALE_OVER30,
    GroupLabel.MALE_UNDER30,
    GroupLabel.FEMALE_OVER30,
    GroupLabel.FEMALE_UNDER30,
)
GENDER_GROUPS = (GroupLabel.MALE, GroupLabel.FEMALE)
AGE_GROUPS = P2_GROUPS[2:]


class Protocol(str, Enum):
    P1 = "P1"
    P2 = "P2"

    @property
    def groups(self) -> Tuple[GroupLabel, ...]:
        return (GroupLabel.ALL,) if self is Protocol.P1 else P2_GROUPS


@dataclass(frozen=True)
class GazeSample:
    observer_id: str
    video_id: str
    t: float
    x: float
    y: float


@dataclass(frozen=True)
class ObserverProfile:
    observer_id: str
    age: int
    gender: Gender


@dataclass(frozen=True, order=True)
class SceneWindow:
    video_id: str
    second_index: int
    width: int
    height: int

    @property
    def stem(self) -> str:
        return f"{self.video_id}_{self.second_index:04d}"


@dataclass(frozen=True)
class VideoInfo:
    """One entry of a scene manifest."""

    video_id: str
    width: int
    height: int
    seconds: Optional[int] = None


def age_group(gender: Gender, age: int) -> GroupLabel:
    """Gendered age bucket. Age exactly 30 counts as over 30."""
    over = age >= AGE_SPLIT
    if gender is Gender.MALE:
        return GroupLabel.MALE_OVER30 if over else GroupLabel.MALE_UNDER30
    return GroupLabel.FEMALE_OVER30 if over else GroupLabel.FEMALE_UNDER30


def gender_group(gender: Gender) -> GroupLabel:
    return GroupLabel.MALE if gender is Gender.MALE else GroupLabel.FEMALE


# --------------------------------------------------------------------------
# ingestion
# --------------------------------------------------------------------------


def _read_text(source: Source) -> Tuple[str, Optional[str]]:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return fh.read().decode("utf-8"), os.fspath(source)
    if isinstance(source, bytes):
        return source.decode("utf-8"), None
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data, getattr(source, "name", None)


def _parse_float(value, name: str, row: int, src) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"cannot parse {name}={value!r}", row, src) from None
    if not math.isfinite(out):
        raise ValidationError(f"{name} is not finite", row, src)
    return out


def _make_sample(rec: Sequence, row: int, src) -> GazeSample:
    observer_id, video_id, t, x, y = rec
    if observer_id in (None, "") or video_id in (None, ""):
        raise ValidationError("empty identifier", row, src)
    t = _parse_float(t, "t", row, src)
    x = _parse_float(x, "x", row, src)
    y = _parse_float(y, "y", row, src)
    if t < 0:
        raise ValidationError("negative timestamp", row, src)
    if x < 0 or y < 0:
        raise ValidationError("coordinate out of range", row, src)
    return GazeSample(str(observer_id), str(video_id), t, x, y)


def load_gaze_log(source: Source, format: str = "csv") -> List[GazeSample]:
    """Parse a gaze log in ``csv`` or ``jsonl`` layout.

    CSV files carry the header ``observer_id,video_id,t,x,y``; a header-less
    file is accepted when its first row does not look like the header. Rows
    are numbered from 1 (the header is not counted) in error messages.
    """
    text, src = _read_text(source)
    samples: List[GazeSample] = []
    if format == "csv":
        rows = list(csv.reader(io.StringIO(text)))
        if rows and [c.strip() for c in rows[0]] == list(GAZE_COLUMNS):
            rows = rows[1:]
        for i, rec in enumerate(rows, start=1):
            if not rec:
                continue
            if len(rec) != len(GAZE_COLUMNS):
                raise ValidationError(f"expected 5 fields, got {len(rec)}", i, src)
            samples.append(_make_sample([c.strip() for c in rec], i, src))
    elif format == "jsonl":
        row = 0
        for line in text.splitlines():
            if not line.strip():
                continue
            row += 1
            try:
                obj = json.loads(line)
                rec = [obj[k] for k in GAZE_COLUMNS]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValidationError(f"malformed record ({exc})", row, src) from None
            samples.append(_make_sample(rec, row, src))
    else:
        raise ValueError(f"unknown gaze log format {format!r}")
    return samples


def dump_gaze_log(samples: Iterable[GazeSample], format: str = "csv") -> str:
    """Serialize samples; floats are written with ``repr`` so reloading is exact."""
    out = io.StringIO()
    if format == "csv":
        out.write(",".join(GAZE_COLUMNS) + "\n")
        for s in samples:
            out.write(f"{s.observer_id},{s.video_id},{s.t!r},{s.x!r},{s.y!r}\n")
    elif format == "jsonl":
        for s in samples:
            rec = {"observer_id": s.observer_id, "video_id": s.video_id, "t": s.t, "x": s.x, "y": s.y}
            out.write(json.dumps(rec) + "\n")
    else:
        raise ValueError(f"unknown gaze log format {format!r}")
    return out.getvalue()


def load_profiles(source: Source) -> Dict[str, ObserverProfile]:
    text, src = _read_text(source)
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != list(PROFILE_COLUMNS):
        raise ValidationError("profile file must start with header observer_id,age,gender", source=src)
    profiles: Dict[str, ObserverProfile] = {}
    for i, rec in enumerate(rows[1:], start=1):
        if not rec:
            continue
        if len(rec) != 3:
            raise ValidationError(f"expected 3 fields, got {len(rec)}", i, src)
        oid, age_s, gender_s = (c.strip() for c in rec)
        try:
            age = int(age_s)
            gender = Gender.parse(gender_s)
        except ValueError as exc:
            raise ValidationError(str(exc), i, src) from None
        if not AGE_RANGE[0] <= age <= AGE_RANGE[1]:
            log.warning("observer %s: age %d outside %d-%d", oid, age, *AGE_RANGE)
        profiles[oid] = ObserverProfile(oid, age, gender)
    return profiles


def dump_profiles(profiles: Iterable[ObserverProfile]) -> str:
    lines = [",".join(PROFILE_COLUMNS)]
    lines += [f"{p.observer_id},{p.age},{p.gender.code}" for p in profiles]
    return "\n".join(lines) + "\n"


def load_manifest(source: Source) -> Dict[str, VideoInfo]:
    """Scene manifest: one JSON object ``{video_id, width, height, seconds}`` or a list of them."""
    text, src = _read_text(source)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON ({exc})", source=src) from None
    if isinstance(data, dict):
        data = [data]
    videos: Dict[str, VideoInfo] = {}
    for i, obj in enumerate(data, start=1):
        try:
            info = VideoInfo(
                str(obj["video_id"]), int(obj["width"]), int(obj["height"]),
                None if obj.get("seconds") is None else int(obj["seconds"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad manifest entry ({exc})", i, src) from None
        if info.width <= 0 or info.height <= 0:
            raise ValidationError("non-positive frame size", i, src)
        if (info.width, info.height) not in SPA_ADV_RESOLUTIONS:
            log.info("video %s uses non-standard resolution %dx%d", info.video_id, info.width, info.height)
        videos[info.video_id] = info
    return videos


def dump_manifest(videos: Iterable[VideoInfo]) -> str:
    return json.dumps(
        [{"video_id": v.video_id, "width": v.width, "height": v.height, "seconds": v.seconds} for v in videos],
        indent=1,
    ) + "\n"


# --------------------------------------------------------------------------
# segmentation and grouping
# --------------------------------------------------------------------------


def segment_scenes(samples: Sequence[GazeSample], video: VideoInfo) -> Dict[SceneWindow, List[GazeSample]]:
    """Bucket one video's samples into one-second scenes (``floor(t)``).

    Samples past the nominal duration are kept. Buckets come back in
    ascending second order; sample order inside a bucket follows the input.
    """
    buckets: Dict[int, List[GazeSample]] = {}
    for s in samples:
        if s.video_id != video.video_id:
            raise ValueError(f"sample from video {s.video_id!r} passed to segmentation of {video.video_id!r}")
        buckets.setdefault(int(math.floor(s.t)), []).append(s)
    return {
        SceneWindow(video.video_id, sec, video.width, video.height): buckets[sec]
        for sec in sorted(buckets)
    }


def group_by_protocol(
    samples: Sequence[GazeSample],
    profiles: Mapping[str, ObserverProfile],
    protocol: Union[Protocol, str],
) -> Dict[GroupLabel, List[GazeSample]]:
    """Split samples into the protocol's groups.

    P1 returns ``{all: samples}``. P2 returns all six demographic groups (empty
    lists included); the gender groups overlap their two age groups by design.
    """
    protocol = Protocol(protocol)
    for s in samples:
        if s.observer_id not in profiles:
            raise ValidationError(f"no profile for observer {s.observer_id!r}")
    if protocol is Protocol.P1:
        return {GroupLabel.ALL: list(samples)}
    groups: Dict[GroupLabel, List[GazeSample]] = {g: [] for g in P2_GROUPS}
    for s in samples:
        p = profiles[s.observer_id]
        groups[gender_group(p.gender)].append(s)
        groups[age_group(p.gender, p.age)].append(s)
    return groups


# --------------------------------------------------------------------------
# synthetic corpus
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupGazeModel:
    """How one gendered age group looks at a scene.

    ``x_bias`` shifts every hotspot horizontally (fraction of width),
    ``spread`` is the gaze scatter std (fraction of width) and ``focus`` the
    concentration of the hotspot preference (higher = fewer hotspots used).
    """

    x_bias: float = 0.0
    spread: float = 0.02
    focus: float = 1.0


DEFAULT_GROUP_MODELS: Dict[GroupLabel, GroupGazeModel] = {
    GroupLabel.MALE_UNDER30: GroupGazeModel(x_bias=-0.10, spread=0.012, focus=3.0),
    GroupLabel.MALE_OVER30: GroupGazeModel(x_bias=-0.04, spread=0.015, focus=2.0),
    GroupLabel.FEMALE_UNDER30: GroupGazeModel(x_bias=0.04, spread=0.028, focus=0.8),
    GroupLabel.FEMALE_OVER30: GroupGazeModel(x_bias=0.10, spread=0.032, focus=0.6),
}


@dataclass
class SyntheticCorpus:
    samples: List[GazeSample]
    profiles: Dict[str, ObserverProfile]
    videos: Dict[str, VideoInfo]
    hotspots: Dict[Tuple[str, int], np.ndarray] = field(default_factory=dict)


def synthesize_corpus(
    n_videos: int = 3,
    n_observers: int = 24,
    seconds: int = 4,
    n_hotspots: int = 4,
    seed: int = 0,
    resolution: Tuple[int, int] = (960, 540),
    group_models: Optional[Mapping[GroupLabel, GroupGazeModel]] = None,
) -> SyntheticCorpus:
    """Mixture-of-Gaussians gaze clouds sampled at 30 Hz.

    Every scene gets ``n_hotspots`` shared hotspots; each observer picks one per
    300 ms dwell according to a group-specific preference and scatters
    samples around it with the group's spread and horizontal bias.
    """
    models = dict(DEFAULT_GROUP_MODELS)
    if group_models:
        models.update(group_models)
    rng = np.random.default_rng(seed)
    W, H = resolution

    profiles: Dict[str, ObserverProfile] = {}
    ages = (22, 26, 29, 30, 38, 47)
    for k in range(n_observers):
        gender = Gender.MALE if k % 2 == 0 else Gender.FEMALE
        age = ages[(k // 2) % len(ages)]
        oid = f"u{k:03d}"
        profiles[oid] = ObserverProfile(oid, age, gender)

    videos = {f"v{v:02d}": VideoInfo(f"v{v:02d}", W, H, seconds) for v in range(n_videos)}
    hotspots: Dict[Tuple[str, int], np.ndarray] = {}
    prefs: Dict[Tuple[str, int, GroupLabel], np.ndarray] = {}
    for vid in videos:
        for sec in range(seconds):
            spots = np.column_stack([rng.uniform(0.2, 0.8, n_hotspots), rng.uniform(0.2, 0.8, n_hotspots)])
            hotspots[(vid, sec)] = spots
            for g, m in models.items():
                prefs[(vid, sec, g)] = rng.dirichlet(np.full(n_hotspots, 1.0 / m.focus))

    dwell = 9  # samples per dwell at 30 Hz
    samples: List[GazeSample] = []
    for vid in videos:
        for oid, prof in profiles.items():
            g = age_group(prof.gender, prof.age)
            m = models[g]
            for sec in range(seconds):
                spots = hotspots[(vid, sec)]
                p = prefs[(vid, sec, g)]
                for k in range(SAMPLE_RATE_HZ):
                    if k % dwell == 0:
                        cx, cy = spots[rng.choice(n_hotspots, p=p)]
                        cx = cx + m.x_bias
                    gx = (cx + rng.normal(0.0, m.spread)) * W
                    gy = (cy + rng.normal(0.0, m.spread) * W / H) * H
                    x = float(np.clip(round(gx, 3), 0.0, W - 0.001))
                    y = float(np.clip(round(gy, 3), 0.0, H - 0.001))
                    t = round(sec + k / SAMPLE_RATE_HZ, 6)
                    samples.append(GazeSample(oid, vid, t, x, y))
    return SyntheticCorpus(samples, profiles, videos, hotspots)
