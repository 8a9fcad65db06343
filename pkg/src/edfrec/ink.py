"""Core domain types and the line-delimited stroke dataset format.

A dataset file (``.strokes.jsonl``) holds one JSON object per line:

    {"id": "w01_s1", "writer": "w01", "label": "k", "points": [[x, y], ...]}

Points are ``[x, y]`` or ``[x, y, t]`` arrays (t in milliseconds since
stroke start); the two arities may not be mixed within one stroke.
Unknown top-level keys are preserved on round-trip.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

log = logging.getLogger(__name__)

OOV_LABEL = "OOV"


class DatasetError(ValueError):
    """Raised for malformed or inconsistent dataset content."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class Point:
    x: float
    y: float
    t: int | None = None

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DatasetError(f"non-finite coordinates ({self.x}, {self.y})")
        if self.t is not None and self.t < 0:
            raise DatasetError(f"negative timestamp {self.t}")

    def same_position(self, other: "Point") -> bool:
        return self.x == other.x and self.y == other.y


@dataclass(frozen=True)
class Stroke:
    """Pen trace between one pen-down and the next pen-up."""

    id: str
    writer: str
    points: tuple[Point, ...]
    label: str | None = None
    extra: tuple[tuple[str, object], ...] = ()

    def __post_init__(self):
        if len(self.points) < 2:
            raise DatasetError(
                f"stroke {self.id!r} has {len(self.points)} distinct points, need >= 2"
            )
        arities = {p.t is None for p in self.points}
        if len(arities) > 1:
            raise DatasetError(f"stroke {self.id!r} mixes timed and untimed points")
        prev_t = None
        for p in self.points:
            if p.t is not None:
                if prev_t is not None and p.t < prev_t:
                    raise DatasetError(f"stroke {self.id!r} has decreasing timestamps")
                prev_t = p.t
        # Consecutive duplicate positions are deduplicated at parse time;
        # smoothing may reintroduce them, so they are not rejected here.

    @property
    def xs(self) -> list[float]:
        return [p.x for p in self.points]

    @property
    def ys(self) -> list[float]:
        return [p.y for p in self.points]


@dataclass
class Dataset:
    strokes: list[Stroke] = field(default_factory=list)

    @property
    def writers(self) -> set[str]:
        return {s.writer for s in self.strokes}

    def __len__(self) -> int:
        return len(self.strokes)

    def __iter__(self):
        return iter(self.strokes)

    def by_label(self) -> dict[str, list[Stroke]]:
        """Labeled strokes grouped by label; OOV and untagged excluded."""
        groups: dict[str, list[Stroke]] = {}
        for s in self.strokes:
            if s.label is None or s.label == OOV_LABEL:
                continue
            groups.setdefault(s.label, []).append(s)
        return groups


def load_vocabulary(text: str) -> list[str]:
    """Parse a vocabulary file: one label per line, '#' comments allowed."""
    labels: list[str] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line in seen:
            raise DatasetError(f"duplicate vocabulary label {line!r}", line=lineno)
        seen.add(line)
        labels.append(line)
    return labels


def _dedup_positions(points: list[Point]) -> list[Point]:
    out: list[Point] = []
    for p in points:
        if out and out[-1].same_position(p):
            continue
        out.append(p)
    return out


def _parse_points(raw: object, stroke_id: str, line: int) -> list[Point]:
    if not isinstance(raw, list) or not raw:
        raise DatasetError(f"stroke {stroke_id!r}: 'points' must be a non-empty array", line)
    arity = None
    points: list[Point] = []
    for item in raw:
        if not isinstance(item, list) or len(item) not in (2, 3):
            raise DatasetError(
                f"stroke {stroke_id!r}: each point must be [x, y] or [x, y, t]", line
            )
        if arity is None:
            arity = len(item)
        elif len(item) != arity:
            raise DatasetError(
                f"stroke {stroke_id!r}: mixed 2- and 3-element points", line
            )
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in item):
            raise DatasetError(f"stroke {stroke_id!r}: non-numeric point value", line)
        x, y = float(item[0]), float(item[1])
        t = int(item[2]) if len(item) == 3 else None
        try:
            points.append(Point(x, y, t))
        except DatasetError as e:
            raise DatasetError(f"stroke {stroke_id!r}: {e}", line) from None
    return points


def parse_dataset(
    text: str,
    vocabulary: list[str] | None = None,
    unknown_labels: str = "reject",
) -> Dataset:
    """Parse line-delimited stroke records into a validated Dataset.

    Consecutive duplicate points (same x, y) are removed. When a
    vocabulary is given, labels outside it (other than "OOV") are
    rejected, or passed through with a warning if
    ``unknown_labels="warn"``.
    """
    if unknown_labels not in ("reject", "warn"):
        raise ValueError(f"unknown_labels must be 'reject' or 'warn', got {unknown_labels!r}")
    vocab = set(vocabulary) if vocabulary is not None else None
    strokes: list[Stroke] = []
    seen_ids: set[str] = set()
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise DatasetError(f"invalid JSON: {e.msg}", lineno) from None
        if not isinstance(record, dict):
            raise DatasetError("record is not a JSON object", lineno)
        for key in ("id", "writer"):
            if not isinstance(record.get(key), str) or not record.get(key):
                raise DatasetError(f"missing or invalid {key!r} field", lineno)
        stroke_id = record["id"]
        if stroke_id in seen_ids:
            raise DatasetError(f"duplicate stroke id {stroke_id!r}", lineno)
        seen_ids.add(stroke_id)
        label = record.get("label")
        if label is not None:
            if not isinstance(label, str):
                raise DatasetError(f"stroke {stroke_id!r}: label must be a string", lineno)
            if vocab is not None and label != OOV_LABEL and label not in vocab:
                if unknown_labels == "reject":
                    raise DatasetError(
                        f"stroke {stroke_id!r}: label {label!r} not in vocabulary", lineno
                    )
                log.warning("line %d: stroke %r has unknown label %r", lineno, stroke_id, label)
        points = _dedup_positions(_parse_points(record["points"], stroke_id, lineno))
        if len(points) < 2:
            raise DatasetError(f"stroke {stroke_id!r} has fewer than 2 distinct points", lineno)
        extra = tuple(
            (k, v) for k, v in record.items() if k not in ("id", "writer", "label", "points")
        )
        try:
            strokes.append(
                Stroke(id=stroke_id, writer=record["writer"], points=tuple(points),
                       label=label, extra=extra)
            )
        except DatasetError as e:
            raise DatasetError(str(e), lineno) from None
    return Dataset(strokes=strokes)


def stroke_to_record(stroke: Stroke) -> dict:
    record: dict = {"id": stroke.id, "writer": stroke.writer}
    if stroke.label is not None:
        record["label"] = stroke.label
    timed = stroke.points[0].t is not None
    if timed:
        record["points"] = [[p.x, p.y, p.t] for p in stroke.points]
    else:
        record["points"] = [[p.x, p.y] for p in stroke.points]
    record.update(dict(stroke.extra))
    return record


def write_dataset(dataset: Dataset) -> str:
    """Serialize a dataset; parse_dataset(write_dataset(d)) == d."""
    lines = [json.dumps(stroke_to_record(s)) for s in dataset.strokes]
    return "".join(line + "\n" for line in lines)
