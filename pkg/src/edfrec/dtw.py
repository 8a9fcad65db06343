"""Dynamic time warping distance between direction-code sequences.

The local cost is the circular distance between codes (code 8 is
adjacent to code 1). Costs and path lengths are tracked in exact
integer arithmetic; normalization divides the accumulated cost by the
length of the optimal warping path (shortest among minimum-cost paths,
which keeps the normalized distance symmetric).

A numba-compiled kernel is used when available; the pure-Python DP is
the fallback and the reference for its semantics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import EdfVector

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

_INF_INT = 1 << 60


@dataclass(frozen=True)
class DtwConfig:
    normalize: bool = True
    window: int | None = None  # Sakoe-Chiba band half-width

    def __post_init__(self):
        if self.window is not None and self.window < 0:
            raise ValueError("window must be >= 0")


def direction_cost(a: int, b: int) -> int:
    """Circular distance between direction codes, in [0, 4]."""
    d = abs(a - b)
    return min(d, 8 - d)


def _codes(seq) -> tuple[int, ...]:
    if isinstance(seq, EdfVector):
        return seq.codes
    return tuple(seq)


def _dtw_py(sa, sb, big, window) -> int:
    n, m = len(sa), len(sb)
    inf = _INF_INT
    prev = [inf] * (m + 1)
    prev[0] = 0  # virtual start, diagonal predecessor of cell (1,1) only
    for i in range(1, n + 1):
        cur = [inf] * (m + 1)
        ca = sa[i - 1]
        lo = 1 if window < 0 else max(1, i - window)
        hi = m if window < 0 else min(m, i + window)
        for j in range(lo, hi + 1):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            if best < inf:
                d = abs(ca - sb[j - 1])
                if 8 - d < d:
                    d = 8 - d
                cur[j] = best + d * big + 1
        prev = cur
    return prev[m]


if _HAVE_NUMBA:

    @njit(cache=True)
    def _dtw_numba(sa, sb, big, window):  # pragma: no cover - mirrored by _dtw_py
        n, m = sa.shape[0], sb.shape[0]
        inf = np.int64(_INF_INT)
        prev = np.full(m + 1, inf, dtype=np.int64)
        prev[0] = 0
        for i in range(1, n + 1):
            cur = np.full(m + 1, inf, dtype=np.int64)
            ca = sa[i - 1]
            lo = 1 if window < 0 else max(1, i - window)
            hi = m if window < 0 else min(m, i + window)
            for j in range(lo, hi + 1):
                best = prev[j - 1]
                if prev[j] < best:
                    best = prev[j]
                if cur[j - 1] < best:
                    best = cur[j - 1]
                if best < inf:
                    d = ca - sb[j - 1]
                    if d < 0:
                        d = -d
                    if 8 - d < d:
                        d = 8 - d
                    cur[j] = best + d * big + 1
            prev = cur
        return prev[m]


def dtw_distance(a, b, config: DtwConfig = DtwConfig()) -> float:
    """DTW distance between two code sequences (EdfVector or iterable).

    Standard step set (diagonal, insertion, deletion). With
    normalize=True the accumulated cost is divided by the warping-path
    length, bounding the result by the maximum local cost (4).
    """
    sa, sb = _codes(a), _codes(b)
    n, m = len(sa), len(sb)
    if n == 0 or m == 0:
        raise ValueError("cannot compute DTW of an empty sequence")
    if config.window is not None and abs(n - m) > config.window:
        raise ValueError(
            f"window {config.window} admits no monotone path for lengths {n} and {m}"
        )
    window = -1 if config.window is None else config.window
    # Combined DP value cost * big + path_length; path length < big, so
    # minimizing the combined value is a lexicographic (cost, length) min.
    big = n + m + 1
    if _HAVE_NUMBA:
        total = int(
            _dtw_numba(
                np.asarray(sa, dtype=np.int64), np.asarray(sb, dtype=np.int64),
                big, window,
            )
        )
    else:
        total = _dtw_py(sa, sb, big, window)
    if total >= _INF_INT:
        raise ValueError("no feasible warping path within the window")
    cost, length = divmod(total, big)
    if not config.normalize:
        return float(cost)
    return cost / length
