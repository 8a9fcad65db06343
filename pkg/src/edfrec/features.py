"""Curvature-point extraction and extended directional features.

A curvature point is a trace point where the sign of the first
difference of the x or y coordinate sequence changes; stroke endpoints
are always included. The feature vector is the sequence of quantized
directions (codes 1..8, 45-degree bins) between every ordered pair of
curvature points, flattened row-major over the upper triangle of the
pairwise direction matrix: length k(k-1)/2 for k curvature points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ink import Point, Stroke
from .smoothing import SmoothingConfig, smooth_stroke

_EIGHTH = math.pi / 8
_QUARTER = math.pi / 4
_TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class CurvaturePointSet:
    """Strictly increasing point indices; always contains both endpoints."""

    indices: tuple[int, ...]

    def __post_init__(self):
        if len(self.indices) < 2:
            raise ValueError("need at least 2 curvature points")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("indices must be strictly increasing")

    @property
    def k(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class EdfVector:
    codes: tuple[int, ...]
    k: int

    def __post_init__(self):
        if len(self.codes) != self.k * (self.k - 1) // 2:
            raise ValueError(
                f"expected {self.k * (self.k - 1) // 2} codes for k={self.k}, "
                f"got {len(self.codes)}"
            )
        if any(not 1 <= c <= 8 for c in self.codes):
            raise ValueError("direction codes must be in 1..8")

    def __len__(self) -> int:
        return len(self.codes)


def sign_diff(seq: list[float], epsilon: float = 0.0) -> list[int]:
    """Sign of seq[i] - seq[i+1] with a +/- epsilon dead zone."""
    if len(seq) < 2:
        raise ValueError("need at least 2 samples")
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    out = []
    for a, b in zip(seq, seq[1:]):
        d = a - b
        out.append(1 if d > epsilon else -1 if d < -epsilon else 0)
    return out


def extract_curvature_points(stroke: Stroke, epsilon: float = 0.0) -> CurvaturePointSet:
    """Interior points where the x or y difference-sign sequence changes,
    plus both endpoints."""
    xd = sign_diff(stroke.xs, epsilon)
    yd = sign_diff(stroke.ys, epsilon)
    n = len(stroke.points)
    indices = [0]
    for i in range(1, n - 1):
        if xd[i - 1] != xd[i] or yd[i - 1] != yd[i]:
            indices.append(i)
    indices.append(n - 1)
    return CurvaturePointSet(indices=tuple(indices))


def pair_angle(p: Point, q: Point, y_up: bool = False) -> float:
    """Quadrant-aware angle of the vector from p to q, in (-pi, pi].

    With y_up=False (device coordinates, y grows downward) the y
    difference is negated so angles come out in mathematical
    orientation: moving up on paper gives pi/2.
    """
    dx = q.x - p.x
    dy = q.y - p.y
    if dx == 0 and dy == 0:
        raise ValueError("coincident points have no direction")
    if not y_up:
        dy = -dy
    return math.atan2(dy, dx)


def quantize_direction(theta: float) -> int:
    """Map an angle to one of 8 direction codes.

    Code 1 is centered on 0 (east), code 3 on pi/2 (north), code 5 on
    pi (west), code 7 on -pi/2 (south); each bin is half-open
    [center - pi/8, center + pi/8). Total over all finite angles.
    """
    if not math.isfinite(theta):
        raise ValueError(f"non-finite angle {theta!r}")
    return int(((theta + _EIGHTH) % _TWO_PI) // _QUARTER) % 8 + 1


def extract_edf(
    stroke: Stroke,
    cps: CurvaturePointSet | None = None,
    y_up: bool = False,
    epsilon: float = 0.0,
) -> EdfVector:
    """Direction codes between every ordered curvature-point pair.

    Coincident curvature-point coordinates (possible after smoothing)
    reuse the previous pair's code; a degenerate first pair gets code 1.
    """
    if cps is None:
        cps = extract_curvature_points(stroke, epsilon)
    pts = [stroke.points[i] for i in cps.indices]
    codes: list[int] = []
    for l in range(len(pts) - 1):
        for m in range(l + 1, len(pts)):
            p, q = pts[l], pts[m]
            if p.same_position(q):
                codes.append(codes[-1] if codes else 1)
            else:
                codes.append(quantize_direction(pair_angle(p, q, y_up)))
    return EdfVector(codes=tuple(codes), k=cps.k)


@dataclass(frozen=True)
class FeatureConfig:
    """End-to-end feature pipeline settings: smoothing, sign tolerance,
    and y-axis orientation of the input coordinates."""

    smoothing: SmoothingConfig = SmoothingConfig()
    epsilon: float = 0.0
    y_up: bool = False

    def to_dict(self) -> dict:
        return {
            "smoothing": {
                "wavelet": self.smoothing.wavelet,
                "levels": self.smoothing.levels,
                "enabled": self.smoothing.enabled,
            },
            "epsilon": self.epsilon,
            "y_up": self.y_up,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureConfig":
        sm = d.get("smoothing", {})
        return cls(
            smoothing=SmoothingConfig(
                wavelet=sm.get("wavelet", "haar"),
                levels=sm.get("levels", 1),
                enabled=sm.get("enabled", True),
            ),
            epsilon=d.get("epsilon", 0.0),
            y_up=d.get("y_up", False),
        )


def stroke_features(stroke: Stroke, config: FeatureConfig = FeatureConfig()) -> EdfVector:
    """Full pipeline: smooth, extract curvature points, compute the EDF."""
    smoothed = smooth_stroke(stroke, config.smoothing)
    cps = extract_curvature_points(smoothed, config.epsilon)
    return extract_edf(smoothed, cps, config.y_up)
