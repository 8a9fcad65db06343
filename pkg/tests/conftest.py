import math
import random

import pytest

from edfrec.ink import Point, Stroke


def make_stroke(xs, ys, id="s", writer="w", label=None, ts=None):
    if ts is None:
        points = tuple(Point(float(x), float(y)) for x, y in zip(xs, ys))
    else:
        points = tuple(Point(float(x), float(y), t) for x, y, t in zip(xs, ys, ts))
    return Stroke(id=id, writer=writer, points=points, label=label)


def random_walk_stroke(rng: random.Random, n: int, id="s", writer="w", label=None):
    """Random integer-coordinate stroke with no consecutive duplicates."""
    x, y = rng.randint(-50, 50), rng.randint(-50, 50)
    xs, ys = [x], [y]
    while len(xs) < n:
        dx, dy = rng.randint(-3, 3), rng.randint(-3, 3)
        if dx == 0 and dy == 0:
            continue
        x, y = x + dx, y + dy
        xs.append(x)
        ys.append(y)
    return make_stroke(xs, ys, id=id, writer=writer, label=label)


@pytest.fixture
def rng():
    return random.Random(0xED5)


def assert_angles_close(a, b, tol=1e-12):
    assert abs(math.remainder(a - b, 2 * math.pi)) <= tol
