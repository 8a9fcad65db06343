"""Reference model building: per-label leader clustering under a DTW
radius tau, medoid selection, and model persistence.

Training groups labeled strokes by label, drops labels with fewer than
min_count samples, and for each surviving label searches for the
smallest tau whose leader clustering yields at most max_refs clusters.
Each cluster contributes its medoid as a reference.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from .dtw import DtwConfig, dtw_distance
from .features import EdfVector, FeatureConfig, stroke_features
from .ink import Dataset

log = logging.getLogger(__name__)

MODEL_VERSION = 1


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class Reference:
    edf: EdfVector
    source_id: str
    label: str


@dataclass(frozen=True)
class LabelModel:
    label: str
    tau: float
    references: tuple[Reference, ...]


@dataclass(frozen=True)
class TauSearch:
    lo: float = 0.0
    hi: float = 4.0
    iterations: int = 24

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("tau search range requires lo <= hi")


@dataclass(frozen=True)
class TrainerConfig:
    max_refs: int = 3
    min_count: int = 10
    tau_search: TauSearch = TauSearch()

    def __post_init__(self):
        if self.max_refs < 1:
            raise ValueError("max_refs must be >= 1")
        if self.min_count < 1:
            raise ValueError("min_count must be >= 1")


@dataclass(frozen=True)
class ReferenceModel:
    labels: tuple[LabelModel, ...]
    config_snapshot: dict
    version: int = MODEL_VERSION

    def label_names(self) -> list[str]:
        return [lm.label for lm in self.labels]

    def all_references(self) -> list[Reference]:
        return [r for lm in self.labels for r in lm.references]


@dataclass
class Cluster:
    founder: int
    members: list[int] = field(default_factory=list)
    medoid: int = -1


def _pairwise_matrix(edfs: list[EdfVector], dtw_config: DtwConfig) -> list[list[float]]:
    n = len(edfs)
    mat = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d = dtw_distance(edfs[i], edfs[j], dtw_config)
            mat[i][j] = d
            mat[j][i] = d
    return mat


def cluster_primitive(
    edfs: list[EdfVector],
    tau: float,
    dtw_config: DtwConfig = DtwConfig(),
    distances: list[list[float]] | None = None,
) -> list[Cluster]:
    """Greedy leader clustering in input order, with medoid selection.

    Each item joins the first existing cluster whose founder is within
    tau, else founds a new cluster. The medoid minimizes the sum of
    distances to the other members (ties broken by lowest index).
    """
    if not edfs:
        raise ValueError("cannot cluster an empty collection")
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if distances is None:
        distances = _pairwise_matrix(edfs, dtw_config)
    clusters: list[Cluster] = []
    for i in range(len(edfs)):
        for c in clusters:
            if distances[c.founder][i] <= tau:
                c.members.append(i)
                break
        else:
            clusters.append(Cluster(founder=i, members=[i]))
    for c in clusters:
        c.medoid = min(
            c.members, key=lambda i: (sum(distances[i][j] for j in c.members), i)
        )
    return clusters


def find_tau(
    edfs: list[EdfVector],
    max_refs: int,
    dtw_config: DtwConfig = DtwConfig(),
    search: TauSearch = TauSearch(),
    distances: list[list[float]] | None = None,
) -> float:
    """Smallest tau (within binary-search resolution) giving at most
    max_refs clusters; returns search.hi if even that is insufficient."""
    if not edfs:
        raise ValueError("cannot search tau for an empty collection")
    if distances is None:
        distances = _pairwise_matrix(edfs, dtw_config)

    def n_clusters(tau: float) -> int:
        return len(cluster_primitive(edfs, tau, dtw_config, distances))

    if n_clusters(search.lo) <= max_refs:
        return search.lo
    if n_clusters(search.hi) > max_refs:
        return search.hi
    lo, hi = search.lo, search.hi
    for _ in range(search.iterations):
        mid = (lo + hi) / 2
        if n_clusters(mid) <= max_refs:
            hi = mid
        else:
            lo = mid
    return hi


def build_model(
    train: Dataset,
    feature_config: FeatureConfig = FeatureConfig(),
    trainer_config: TrainerConfig = TrainerConfig(),
    dtw_config: DtwConfig = DtwConfig(),
    features: dict[str, EdfVector] | None = None,
    distance_fn=None,
) -> ReferenceModel:
    """Build a reference model from labeled training strokes.

    OOV and untagged strokes are skipped; labels with fewer than
    min_count strokes are dropped. `features` may carry precomputed EDF
    vectors keyed by stroke id, and `distance_fn(id_a, id_b)` a
    memoized distance, to avoid recomputation across repeated builds.
    """
    groups = train.by_label()
    label_models: list[LabelModel] = []
    for label in sorted(groups):
        strokes = groups[label]
        if len(strokes) < trainer_config.min_count:
            log.debug("label %r dropped: %d < min_count %d",
                      label, len(strokes), trainer_config.min_count)
            continue
        if features is not None:
            edfs = [features[s.id] for s in strokes]
        else:
            edfs = [stroke_features(s, feature_config) for s in strokes]
        n = len(edfs)
        if distance_fn is not None:
            distances = [[0.0] * n for _ in range(n)]
            for i in range(n):
                for j in range(i + 1, n):
                    d = distance_fn(strokes[i].id, strokes[j].id)
                    distances[i][j] = d
                    distances[j][i] = d
        else:
            distances = _pairwise_matrix(edfs, dtw_config)
        tau = find_tau(edfs, trainer_config.max_refs, dtw_config,
                       trainer_config.tau_search, distances)
        clusters = cluster_primitive(edfs, tau, dtw_config, distances)
        if len(clusters) > trainer_config.max_refs:
            # No tau in range reached max_refs clusters: keep the largest
            # clusters (ties by earliest founder).
            log.warning("label %r: %d clusters at tau=%g, keeping largest %d",
                        label, len(clusters), tau, trainer_config.max_refs)
            clusters = sorted(clusters, key=lambda c: (-len(c.members), c.founder))
            clusters = clusters[: trainer_config.max_refs]
            clusters.sort(key=lambda c: c.founder)
        references = tuple(
            Reference(edf=edfs[c.medoid], source_id=strokes[c.medoid].id, label=label)
            for c in clusters
        )
        label_models.append(LabelModel(label=label, tau=tau, references=references))
    if not label_models:
        raise ModelError(
            f"no label has at least {trainer_config.min_count} training strokes"
        )
    snapshot = {
        "features": feature_config.to_dict(),
        "dtw": {"normalize": dtw_config.normalize, "window": dtw_config.window},
        "trainer": {
            "max_refs": trainer_config.max_refs,
            "min_count": trainer_config.min_count,
            "tau_search": {
                "lo": trainer_config.tau_search.lo,
                "hi": trainer_config.tau_search.hi,
                "iterations": trainer_config.tau_search.iterations,
            },
        },
    }
    return ReferenceModel(labels=tuple(label_models), config_snapshot=snapshot)


def _k_from_length(length: int) -> int:
    # length = k(k-1)/2
    k = int((1 + (1 + 8 * length) ** 0.5) / 2 + 0.5)
    if k * (k - 1) // 2 != length:
        raise ModelError(f"EDF length {length} is not of the form k(k-1)/2")
    return k


def save_model(model: ReferenceModel) -> str:
    doc = {
        "version": model.version,
        "config": model.config_snapshot,
        "labels": [
            {
                "label": lm.label,
                "tau": lm.tau,
                "references": [
                    {"source_id": r.source_id, "edf": list(r.edf.codes)}
                    for r in lm.references
                ],
            }
            for lm in model.labels
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def load_model(text: str) -> ReferenceModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelError(f"malformed model file: {e.msg}") from None
    if not isinstance(doc, dict) or "version" not in doc:
        raise ModelError("malformed model file: missing version")
    if doc["version"] != MODEL_VERSION:
        raise ModelError(
            f"unsupported model version {doc['version']} (supported: {MODEL_VERSION})"
        )
    try:
        labels = tuple(
            LabelModel(
                label=lm["label"],
                tau=lm["tau"],
                references=tuple(
                    Reference(
                        edf=EdfVector(codes=tuple(r["edf"]),
                                      k=_k_from_length(len(r["edf"]))),
                        source_id=r["source_id"],
                        label=lm["label"],
                    )
                    for r in lm["references"]
                ),
            )
            for lm in doc["labels"]
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ModelError(f"malformed model file: {e}") from None
    return ReferenceModel(labels=labels, config_snapshot=doc.get("config", {}))
