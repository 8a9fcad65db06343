"""Haar wavelet smoothing of stroke coordinate sequences.

The x and y sequences are smoothed independently: Haar analysis keeps
the pairwise approximation coefficients, drops the detail coefficients,
and reconstructs. Odd-length sequences are padded by repeating the last
sample and truncated after synthesis, so length is always preserved.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .ink import Point, Stroke


@dataclass(frozen=True)
class SmoothingConfig:
    wavelet: str = "haar"
    levels: int = 1
    enabled: bool = True

    def __post_init__(self):
        if self.wavelet != "haar":
            raise ValueError(f"unsupported wavelet {self.wavelet!r}")
        if self.enabled and self.levels < 1:
            raise ValueError("levels must be >= 1")


def _haar_smooth(seq: list[float], levels: int) -> list[float]:
    if levels == 0 or len(seq) == 1:
        return list(seq)
    padded = list(seq)
    if len(padded) % 2:
        padded.append(padded[-1])
    approx = [(padded[2 * j] + padded[2 * j + 1]) / 2 for j in range(len(padded) // 2)]
    approx = _haar_smooth(approx, levels - 1)
    out = []
    for a in approx:
        out.append(a)
        out.append(a)
    return out[: len(seq)]


def dwt_smooth_sequence(seq: list[float], config: SmoothingConfig = SmoothingConfig()) -> list[float]:
    """Smooth one coordinate sequence; output length equals input length."""
    if not seq:
        raise ValueError("cannot smooth an empty sequence")
    if not config.enabled:
        return list(seq)
    return _haar_smooth([float(v) for v in seq], config.levels)


def smooth_stroke(stroke: Stroke, config: SmoothingConfig = SmoothingConfig()) -> Stroke:
    """Smooth a stroke's x and y sequences; id, writer, label, t unchanged."""
    if not config.enabled:
        return stroke
    xs = dwt_smooth_sequence(stroke.xs, config)
    ys = dwt_smooth_sequence(stroke.ys, config)
    points = tuple(
        Point(x, y, p.t) for x, y, p in zip(xs, ys, stroke.points)
    )
    return replace(stroke, points=points)
