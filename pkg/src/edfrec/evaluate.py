"""Writer-independent evaluation protocol and synthetic corpus generator.

Splits enumerate every train/test partition of the writer set
(C(|W|, train_size) combinations). Per split, labels must occur at
least min_count times on both sides; a model is trained on the train
writers and every retained-label test stroke is classified with both
methods. Counts are averaged across splits the way the original
protocol reports them.
"""

from __future__ import annotations

import io
import itertools
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classifier import classify_method1, classify_method2
from .dtw import DtwConfig, dtw_distance
from .features import FeatureConfig, stroke_features
from .ink import Dataset, DatasetError, Point, Stroke
from .trainer import TrainerConfig, build_model

log = logging.getLogger(__name__)

_BASE_POINTS = 32


@dataclass(frozen=True)
class Split:
    train_writers: tuple[str, ...]
    test_writers: tuple[str, ...]

    def __post_init__(self):
        if set(self.train_writers) & set(self.test_writers):
            raise ValueError("train and test writers must be disjoint")


def enumerate_splits(writers: set[str], train_size: int) -> list[Split]:
    """All C(|writers|, train_size) splits, lexicographic by sorted ids."""
    ordered = sorted(writers)
    if not 0 < train_size < len(ordered):
        raise ValueError(
            f"train_size must be in (0, {len(ordered)}), got {train_size}"
        )
    splits = []
    for combo in itertools.combinations(ordered, train_size):
        test = tuple(w for w in ordered if w not in combo)
        splits.append(Split(train_writers=combo, test_writers=test))
    return splits


def filter_primitives(train: Dataset, test: Dataset, min_count: int) -> set[str]:
    """Labels with at least min_count strokes on both sides; OOV and
    untagged never qualify."""
    train_counts = {label: len(ss) for label, ss in train.by_label().items()}
    test_counts = {label: len(ss) for label, ss in test.by_label().items()}
    return {
        label
        for label, n in train_counts.items()
        if n >= min_count and test_counts.get(label, 0) >= min_count
    }


@dataclass(frozen=True)
class NoiseConfig:
    jitter_sd: float = 0.0
    rotation_sd_rad: float = 0.0
    scale_range: tuple[float, float] = (1.0, 1.0)
    resample_rate_range: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        for lo, hi in (self.scale_range, self.resample_rate_range):
            if not (0 < lo <= hi):
                raise ValueError("ranges must satisfy 0 < lo <= hi")
        if self.jitter_sd < 0 or self.rotation_sd_rad < 0:
            raise ValueError("noise magnitudes must be >= 0")


@dataclass(frozen=True)
class SynthConfig:
    templates: dict[str, list[tuple[float, float]]]
    writers: int = 10
    samples_per_writer_per_label: int = 5
    noise: NoiseConfig = NoiseConfig()
    seed: int = 1

    def __post_init__(self):
        if len(self.templates) < 2:
            raise ValueError("need at least 2 templates")
        if self.writers < 1 or self.samples_per_writer_per_label < 1:
            raise ValueError("writers and samples_per_writer_per_label must be >= 1")
        for label, pts in self.templates.items():
            if len(pts) < 2:
                raise ValueError(f"template {label!r} needs at least 2 points")


# Frozen noise presets for the regression corpora. The pipeline is
# deterministic, so accuracies measured on these never drift.
LOW_NOISE = NoiseConfig(
    jitter_sd=0.05,
    rotation_sd_rad=0.02,
    scale_range=(0.9, 1.1),
    resample_rate_range=(0.8, 1.2),
)
LOW_NOISE_SEED = 7
MODERATE_NOISE = NoiseConfig(
    jitter_sd=5.0,
    rotation_sd_rad=0.3,
    scale_range=(0.7, 1.3),
    resample_rate_range=(0.7, 1.3),
)
MODERATE_NOISE_SEED = 11


def load_templates(text: str) -> dict[str, list[tuple[float, float]]]:
    doc = json.loads(text)
    if not isinstance(doc, dict):
        raise DatasetError("template file must be a JSON object of label -> polyline")
    return {
        label: [(float(p[0]), float(p[1])) for p in pts] for label, pts in doc.items()
    }


def _resample_polyline(pts: np.ndarray, n: int) -> np.ndarray:
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, cum[-1], n)
    return np.column_stack(
        [np.interp(targets, cum, pts[:, 0]), np.interp(targets, cum, pts[:, 1])]
    )


def generate_synthetic_dataset(config: SynthConfig) -> Dataset:
    """Deterministic synthetic corpus: per-writer style transform
    (rotation + scale) plus per-sample resampling and point jitter."""
    rng = np.random.default_rng(config.seed)
    noise = config.noise
    labels = sorted(config.templates)
    strokes: list[Stroke] = []
    for w in range(config.writers):
        writer = f"w{w:02d}"
        rotation = rng.normal(0.0, noise.rotation_sd_rad)
        scale = rng.uniform(*noise.scale_range)
        cos_r, sin_r = math.cos(rotation), math.sin(rotation)
        for label in labels:
            template = np.asarray(config.templates[label], dtype=float)
            center = template.mean(axis=0)
            for s in range(config.samples_per_writer_per_label):
                rate = rng.uniform(*noise.resample_rate_range)
                n = max(4, round(_BASE_POINTS * rate))
                pts = _resample_polyline(template, n)
                rel = (pts - center) * scale
                pts = np.column_stack(
                    [
                        rel[:, 0] * cos_r - rel[:, 1] * sin_r,
                        rel[:, 0] * sin_r + rel[:, 1] * cos_r,
                    ]
                ) + center
                pts = pts + rng.normal(0.0, noise.jitter_sd, pts.shape)
                pts = np.round(pts, 3)
                points: list[Point] = []
                for x, y in pts:
                    p = Point(float(x), float(y))
                    if points and points[-1].same_position(p):
                        continue
                    points.append(p)
                strokes.append(
                    Stroke(
                        id=f"{writer}_{label}_{s}",
                        writer=writer,
                        points=tuple(points),
                        label=label,
                    )
                )
    return Dataset(strokes=strokes)


@dataclass(frozen=True)
class LabelCounts:
    test: int = 0
    correct_method1: int = 0
    correct_method2: int = 0


@dataclass(frozen=True)
class SplitResult:
    split: Split
    retained: tuple[str, ...]
    per_label: dict[str, LabelCounts]


@dataclass
class EvaluationReport:
    per_split: list[SplitResult]
    config_snapshot: dict = field(default_factory=dict)

    @property
    def labels(self) -> list[str]:
        seen: set[str] = set()
        for r in self.per_split:
            seen.update(r.per_label)
        return sorted(seen)

    def aggregate(self) -> dict[str, tuple[float, float, float]]:
        """Per-label (test, method1-correct, method2-correct), averaged
        over all executed splits."""
        n = max(len(self.per_split), 1)
        out: dict[str, tuple[float, float, float]] = {}
        for label in self.labels:
            t = c1 = c2 = 0
            for r in self.per_split:
                counts = r.per_label.get(label)
                if counts:
                    t += counts.test
                    c1 += counts.correct_method1
                    c2 += counts.correct_method2
            out[label] = (t / n, c1 / n, c2 / n)
        return out

    def totals(self) -> tuple[int, int, int]:
        t = c1 = c2 = 0
        for r in self.per_split:
            for counts in r.per_label.values():
                t += counts.test
                c1 += counts.correct_method1
                c2 += counts.correct_method2
        return t, c1, c2

    def overall_accuracy(self) -> tuple[float, float]:
        t, c1, c2 = self.totals()
        if t == 0:
            return 0.0, 0.0
        return c1 / t, c2 / t


def _subset(dataset: Dataset, writers: set[str], labels: set[str] | None = None) -> Dataset:
    return Dataset(
        strokes=[
            s
            for s in dataset.strokes
            if s.writer in writers and (labels is None or s.label in labels)
        ]
    )


def run_experiment(
    dataset: Dataset,
    feature_config: FeatureConfig = FeatureConfig(),
    trainer_config: TrainerConfig = TrainerConfig(),
    dtw_config: DtwConfig = DtwConfig(),
    splits: list[Split] | None = None,
    train_size: int | None = None,
    workers: int = 1,
) -> EvaluationReport:
    """Run the full writer-independent protocol over the given splits
    (default: all combinations at train_size = half the writers)."""
    writers = dataset.writers
    if len(writers) < 2:
        raise ValueError("need at least 2 writers")
    if splits is None:
        if train_size is None:
            train_size = len(writers) // 2
        splits = enumerate_splits(writers, train_size)

    features = {s.id: stroke_features(s, feature_config) for s in dataset.strokes}
    cache: dict[tuple[str, str], float] = {}

    def dist(id_a: str, id_b: str) -> float:
        key = (id_a, id_b) if id_a <= id_b else (id_b, id_a)
        d = cache.get(key)
        if d is None:
            d = dtw_distance(features[id_a], features[id_b], dtw_config)
            cache[key] = d
        return d

    def run_split(split: Split) -> SplitResult | None:
        train = _subset(dataset, set(split.train_writers))
        test = _subset(dataset, set(split.test_writers))
        retained = filter_primitives(train, test, trainer_config.min_count)
        if not retained:
            log.warning("split %s: no label passes min_count on both sides, skipped",
                        split.train_writers)
            return None
        model = build_model(
            _subset(dataset, set(split.train_writers), retained),
            feature_config,
            trainer_config,
            dtw_config,
            features=features,
            distance_fn=dist,
        )
        tallies = {label: [0, 0, 0] for label in retained}
        for stroke in test.strokes:
            if stroke.label not in retained:
                continue
            edf = features[stroke.id]

            def ref_dist(_edf, ref, _sid=stroke.id):
                return dist(_sid, ref.source_id)

            r1 = classify_method1(edf, model, dtw_config, distance_fn=ref_dist)
            r2 = classify_method2(edf, model, dtw_config, distance_fn=ref_dist)
            tally = tallies[stroke.label]
            tally[0] += 1
            tally[1] += r1.top[0] == stroke.label
            tally[2] += r2.top[0] == stroke.label
        return SplitResult(
            split=split,
            retained=tuple(sorted(retained)),
            per_label={
                label: LabelCounts(*counts) for label, counts in sorted(tallies.items())
            },
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_split, splits))
    else:
        results = [run_split(split) for split in splits]
    per_split = [r for r in results if r is not None]
    if not per_split:
        raise ValueError("no split retained any label")
    snapshot = {
        "features": feature_config.to_dict(),
        "dtw": {"normalize": dtw_config.normalize, "window": dtw_config.window},
        "trainer": {
            "max_refs": trainer_config.max_refs,
            "min_count": trainer_config.min_count,
        },
        "splits": len(per_split),
    }
    return EvaluationReport(per_split=per_split, config_snapshot=snapshot)


def emit_report(report: EvaluationReport, format: str = "text-table") -> str:
    if format == "text-table":
        return _emit_text(report)
    if format == "csv":
        return _emit_csv(report)
    if format == "json":
        return _emit_json(report)
    raise ValueError(f"unknown report format {format!r}")


def _emit_text(report: EvaluationReport) -> str:
    agg = report.aggregate()
    rows = [("Primitive", "#Test", "Method I", "Method II")]
    for label in report.labels:
        t, c1, c2 = agg[label]
        rows.append((label, str(round(t)), str(round(c1)), str(round(c2))))
    t, c1, c2 = report.totals()
    n = max(len(report.per_split), 1)
    rows.append(("Total", str(round(t / n)), str(round(c1 / n)), str(round(c2 / n))))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
             for row in rows]
    lines.insert(1, "-" * len(lines[0]))
    lines.insert(-1, "-" * len(lines[0]))
    acc1, acc2 = report.overall_accuracy()
    lines.append("")
    lines.append(f"Splits: {len(report.per_split)}")
    lines.append(f"Method I accuracy:  {acc1:.1%}")
    lines.append(f"Method II accuracy: {acc2:.1%}")
    return "\n".join(lines) + "\n"


def _emit_csv(report: EvaluationReport) -> str:
    import csv

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["split", "train_writers", "test_writers", "label",
         "test", "recognized_method1", "recognized_method2"]
    )
    for i, r in enumerate(report.per_split):
        for label, counts in r.per_label.items():
            writer.writerow(
                [i, " ".join(r.split.train_writers), " ".join(r.split.test_writers),
                 label, counts.test, counts.correct_method1, counts.correct_method2]
            )
    return buf.getvalue()


def _emit_json(report: EvaluationReport) -> str:
    acc1, acc2 = report.overall_accuracy()
    doc = {
        "config": report.config_snapshot,
        "splits": [
            {
                "train_writers": list(r.split.train_writers),
                "test_writers": list(r.split.test_writers),
                "retained_labels": list(r.retained),
                "per_label": {
                    label: {
                        "test": c.test,
                        "recognized_method1": c.correct_method1,
                        "recognized_method2": c.correct_method2,
                    }
                    for label, c in r.per_label.items()
                },
            }
            for r in report.per_split
        ],
        "aggregate": {
            label: {"test": t, "recognized_method1": c1, "recognized_method2": c2}
            for label, (t, c1, c2) in report.aggregate().items()
        },
        "overall_accuracy": {"method1": acc1, "method2": acc2},
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
