"""The ``<ref>``/``<point>`` message carried by model outputs.

Wire layout (no whitespace outside the brackets)::

    <ref>N</ref><point>[[x1,y1],[x2,y2],...]</point>

``N`` is the declared number of fixations, coordinates are integers on the
[0, 1000] grid. The parser is a tolerant scanner: it never raises and reports
problems through ``valid_format`` and ``diagnostics``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

from .geometry import GRID_MAX

REF_OPEN, REF_CLOSE = "<ref>", "</ref>"
POINT_OPEN, POINT_CLOSE = "<point>", "</point>"

_PAIR = r"\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]"
_PAIR_RE = re.compile(_PAIR, re.ASCII)
_LIST_RE = re.compile(rf"\s*\[\s*(?:{_PAIR}(?:\s*,\s*{_PAIR})*)?\s*\]\s*", re.ASCII)
_SINGLE_RE = re.compile(rf"\s*{_PAIR}\s*", re.ASCII)
_WS = " \t\n\r\f\v"  # what \s matches under re.ASCII
_COUNT_RE = re.compile(r"\s*(\d+)\s*", re.ASCII)

Point = Tuple[int, int]


@dataclass(frozen=True)
class PointMessage:
    n_ref: int
    points: Tuple[Point, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "points", tuple((int(x), int(y)) for x, y in self.points))


@dataclass
class ParseOutcome:
    valid_format: bool
    n_ref: Optional[int]
    points: List[Point] = field(default_factory=list)
    diagnostics: List[str] = field(default_factory=list)

    @property
    def n_actual(self) -> int:
        return len(self.points)

    def to_message(self) -> PointMessage:
        if not self.valid_format:
            raise ValueError("cannot build a message from an invalid parse")
        return PointMessage(self.n_ref, tuple(self.points))


def _to_int(digits: str) -> int:
    """``int`` that tolerates arbitrarily long digit runs from garbage input."""
    neg = digits.startswith("-")
    body = digits.lstrip("-").lstrip("0") or "0"
    if len(body) > 18:
        # far outside any meaningful range; exact value is irrelevant
        value = 10**18
    else:
        value = int(body)
    return -value if neg else value


def _in_range(p: Sequence[float]) -> bool:
    return 0 <= p[0] <= GRID_MAX and 0 <= p[1] <= GRID_MAX


def serialize(msg: PointMessage) -> str:
    if msg.n_ref < 0:
        raise ValueError("declared count must be nonnegative")
    for p in msg.points:
        if not _in_range(p):
            raise ValueError(f"point {p} outside [0, {GRID_MAX}]^2")
    body = ",".join(f"[{x},{y}]" for x, y in msg.points)
    return f"{REF_OPEN}{msg.n_ref}{REF_CLOSE}{POINT_OPEN}[{body}]{POINT_CLOSE}"


def _spans(text: str, open_tok: str, close_tok: str) -> Iterator[Tuple[int, int, Optional[int]]]:
    """Yield (content_start, content_end, after_close) for each opening token.

    An opening token without a matching close yields ``after_close=None`` and
    stops the scan.
    """
    pos = 0
    while True:
        start = text.find(open_tok, pos)
        if start < 0:
            return
        cstart = start + len(open_tok)
        end = text.find(close_tok, cstart)
        if end < 0:
            yield cstart, len(text), None
            return
        yield cstart, end, end + len(close_tok)
        pos = end + len(close_tok)


def parse(text: str) -> ParseOutcome:
    """Scan ``text`` for the first ``<ref>`` and ``<point>`` spans.

    The first span of each kind wins. As an extension, a message written as
    one ``<point>[x,y]</point>`` span per point is accepted: single-pair spans
    that directly follow one another are concatenated.
    """
    diags: List[str] = []
    valid = True
    n_ref: Optional[int] = None

    ref_spans = list(_spans(text, REF_OPEN, REF_CLOSE))
    if not ref_spans:
        valid = False
        diags.append(f"missing {REF_OPEN}")
    else:
        cs, ce, after = ref_spans[0]
        if after is None:
            valid = False
            diags.append(f"missing {REF_CLOSE}")
        else:
            m = _COUNT_RE.fullmatch(text, cs, ce)
            if m:
                n_ref = _to_int(m.group(1))
            else:
                valid = False
                diags.append(f"{REF_OPEN} content {text[cs:ce]!r} is not a nonnegative integer")
        if len(ref_spans) > 1:
            diags.append(f"ignored {len(ref_spans) - 1} extra {REF_OPEN} span(s)")

    points: List[Point] = []
    point_spans = list(_spans(text, POINT_OPEN, POINT_CLOSE))
    if not point_spans:
        valid = False
        diags.append(f"missing {POINT_OPEN}")
    else:
        cs, ce, after = point_spans[0]
        points = [(_to_int(a), _to_int(b)) for a, b in _PAIR_RE.findall(text, cs, ce)]
        used = 1
        if after is None:
            valid = False
            diags.append(f"missing {POINT_CLOSE}")
        elif _LIST_RE.fullmatch(text, cs, ce):
            pass
        elif _SINGLE_RE.fullmatch(text, cs, ce):
            # one span per point: absorb directly following single-pair spans
            # (a span with an out-of-range point ends the run, so trailing
            # garbage can never invalidate a complete message)
            for ncs, nce, nafter in point_spans[1:]:
                gap = text[after : ncs - len(POINT_OPEN)]
                if gap.strip(_WS) or nafter is None or not _SINGLE_RE.fullmatch(text, ncs, nce):
                    break
                extra = [(_to_int(a), _to_int(b)) for a, b in _PAIR_RE.findall(text, ncs, nce)]
                if not all(_in_range(p) for p in extra):
                    break
                points.extend(extra)
                after = nafter
                used += 1
        else:
            valid = False
            diags.append(f"malformed coordinate list in {POINT_OPEN} span")
        if len(point_spans) > used:
            diags.append(f"ignored {len(point_spans) - used} extra {POINT_OPEN} span(s)")

    bad = [p for p in points if not _in_range(p)]
    if bad:
        valid = False
        diags.append(f"{len(bad)} point(s) outside [0, {GRID_MAX}]^2, first {bad[0]}")

    return ParseOutcome(valid, n_ref, points, diags)


# --------------------------------------------------------------------------
# JSONL batches of model outputs: {"prompt_id": ..., "text": ...}
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BatchRecord:
    prompt_id: str
    text: str


def read_batch(lines: Iterable[str]) -> List[BatchRecord]:
    out = []
    for i, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            out.append(BatchRecord(str(obj["prompt_id"]), str(obj["text"])))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"batch line {i}: {exc}") from None
    return out


def write_batch(records: Iterable[BatchRecord]) -> str:
    return "".join(json.dumps({"prompt_id": r.prompt_id, "text": r.text}) + "\n" for r in records)
