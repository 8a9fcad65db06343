"""Stroke classification against a reference model.

Method 1 scores each label by the minimum DTW distance to that label's
references; Method 2 by the mean distance. Both return a full ranking,
ascending by score with lexicographic tie-breaking.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dtw import DtwConfig, dtw_distance
from .features import EdfVector
from .trainer import ReferenceModel

METHOD1 = "method1"
METHOD2 = "method2"


@dataclass(frozen=True)
class RecognitionResult:
    ranking: tuple[tuple[str, float], ...]
    method: str

    @property
    def top(self) -> tuple[str, float]:
        return self.ranking[0]


def _rank(scores: dict[str, float], method: str) -> RecognitionResult:
    ranking = tuple(sorted(scores.items(), key=lambda kv: (kv[1], kv[0])))
    return RecognitionResult(ranking=ranking, method=method)


def _label_distances(edf, model: ReferenceModel, dtw_config, distance_fn):
    if model.labels == ():
        raise ValueError("cannot classify against an empty model")
    for lm in model.labels:
        if distance_fn is not None:
            yield lm.label, [distance_fn(edf, r) for r in lm.references]
        else:
            yield lm.label, [dtw_distance(edf, r.edf, dtw_config) for r in lm.references]


def classify_method1(
    edf: EdfVector,
    model: ReferenceModel,
    dtw_config: DtwConfig = DtwConfig(),
    distance_fn=None,
) -> RecognitionResult:
    """Nearest-reference rule: score = min distance to a label's references."""
    scores = {
        label: min(ds) for label, ds in _label_distances(edf, model, dtw_config, distance_fn)
    }
    return _rank(scores, METHOD1)


def classify_method2(
    edf: EdfVector,
    model: ReferenceModel,
    dtw_config: DtwConfig = DtwConfig(),
    distance_fn=None,
) -> RecognitionResult:
    """Average-distance rule: score = mean distance to a label's references."""
    scores = {
        label: sum(ds) / len(ds)
        for label, ds in _label_distances(edf, model, dtw_config, distance_fn)
    }
    return _rank(scores, METHOD2)


def classify(
    edf: EdfVector,
    model: ReferenceModel,
    method: str = METHOD2,
    dtw_config: DtwConfig = DtwConfig(),
    distance_fn=None,
) -> RecognitionResult:
    if method in (METHOD1, "1", 1):
        return classify_method1(edf, model, dtw_config, distance_fn)
    if method in (METHOD2, "2", 2):
        return classify_method2(edf, model, dtw_config, distance_fn)
    raise ValueError(f"unknown method {method!r}")
