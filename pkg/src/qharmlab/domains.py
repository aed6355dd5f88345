"""Domain geometry: membership tests and distance to the boundary.

The invariant tying the two queries together is
``distance_to_boundary(x) > 0  iff  x is interior``.

Point batches follow the sampling convention: for d = 1 an array of shape
``(n,)`` holds n points; for d >= 2 the shape is ``(n, d)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedRegimeError
from .params import BallSpec, ReflectionFrame


class Domain:
    """Base domain interface (kind, dimension, boundedness, geometry queries)."""

    kind: str = "abstract"
    d: int = 1
    bounded: bool = True

    def contains(self, x):
        raise NotImplementedError

    def distance_to_boundary(self, x):
        raise NotImplementedError

    def is_symmetric(self, frame: ReflectionFrame) -> bool:
        """True when the reflection maps the domain onto itself."""
        return False


@dataclass
class IntervalDomain(Domain):
    a: float
    b: float
    kind: str = field(default="interval", init=False)
    d: int = field(default=1, init=False)
    bounded: bool = field(default=True, init=False)

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("interval requires a < b")

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return (x > self.a) & (x < self.b)

    def distance_to_boundary(self, x):
        x = np.asarray(x, dtype=float)
        return np.minimum(x - self.a, self.b - x)

    def is_symmetric(self, frame: ReflectionFrame) -> bool:
        return frame.axis == 0 and np.isclose(self.a + self.b, 2.0 * frame.offset)

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)

    @property
    def half_length(self) -> float:
        return 0.5 * (self.b - self.a)


@dataclass
class BallDomain(Domain):
    ball: BallSpec
    kind: str = field(default="ball", init=False)
    bounded: bool = field(default=True, init=False)

    def __post_init__(self):
        self.d = self.ball.d

    def contains(self, x):
        return self.ball.contains(x)

    def distance_to_boundary(self, x):
        return self.ball.boundary_distance(x)

    def is_symmetric(self, frame: ReflectionFrame) -> bool:
        return np.isclose(self.ball.center[frame.axis], frame.offset)


@dataclass
class BoxDomain(Domain):
    """Half-space-truncated box {y : 0 < y_d < height, |y_i| < half_width}."""

    height: float
    half_width: float
    d: int = 2
    kind: str = field(default="box", init=False)
    bounded: bool = field(default=True, init=False)

    def __post_init__(self):
        if self.height <= 0 or self.half_width <= 0:
            raise ValueError("box requires positive height and half_width")
        if self.d < 1:
            raise ValueError("dimension must be positive")

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        if self.d == 1:
            return (x > 0.0) & (x < self.height)
        vert = (x[..., -1] > 0.0) & (x[..., -1] < self.height)
        lat = np.max(np.abs(x[..., :-1]), axis=-1) < self.half_width
        return vert & lat

    def distance_to_boundary(self, x):
        x = np.asarray(x, dtype=float)
        if self.d == 1:
            return np.minimum(x, self.height - x)
        vert = np.minimum(x[..., -1], self.height - x[..., -1])
        lat = self.half_width - np.max(np.abs(x[..., :-1]), axis=-1)
        return np.minimum(vert, lat)


@dataclass
class BallUnionDomain(Domain):
    """Finite union of balls.

    ``distance_to_boundary`` returns max_i (r_i - |x - c_i|), a lower bound on
    the true distance that is exact for disjoint balls and still satisfies the
    positivity-iff-interior invariant when the balls overlap.
    """

    balls: list
    kind: str = field(default="union-of-balls", init=False)
    bounded: bool = field(default=True, init=False)

    def __post_init__(self):
        if not self.balls:
            raise ValueError("union requires at least one ball")
        self.d = self.balls[0].d
        if any(b.d != self.d for b in self.balls):
            raise ValueError("all balls must share one dimension")

    def contains(self, x):
        out = self.balls[0].contains(x)
        for b in self.balls[1:]:
            out = out | b.contains(x)
        return out

    def distance_to_boundary(self, x):
        out = self.balls[0].boundary_distance(x)
        for b in self.balls[1:]:
            out = np.maximum(out, b.boundary_distance(x))
        return out


@dataclass
class WholeSpace(Domain):
    d: int = 1
    kind: str = field(default="whole-space", init=False)
    bounded: bool = field(default=False, init=False)

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        shape = x.shape if self.d == 1 else x.shape[:-1]
        return np.ones(shape, dtype=bool) if shape else True

    def distance_to_boundary(self, x):
        x = np.asarray(x, dtype=float)
        shape = x.shape if self.d == 1 else x.shape[:-1]
        return np.full(shape, np.inf) if shape else np.inf

    def is_symmetric(self, frame: ReflectionFrame) -> bool:
        return True


def positive_part(dom: Domain, frame: ReflectionFrame) -> "PositiveSideDomain":
    return PositiveSideDomain(dom, frame)


@dataclass
class PositiveSideDomain(Domain):
    """D_+ = {y in D : y[axis] > offset} for a frame-symmetric domain D."""

    base: Domain
    frame: ReflectionFrame
    kind: str = field(default="positive-side", init=False)

    def __post_init__(self):
        self.d = self.base.d
        self.bounded = self.base.bounded

    def contains(self, x):
        return self.base.contains(x) & (self._signed(x) > 0)

    def distance_to_boundary(self, x):
        return np.minimum(self.base.distance_to_boundary(x), self._signed(x))

    def _signed(self, x):
        x = np.asarray(x, dtype=float)
        if self.d == 1:
            return x - self.frame.offset
        return x[..., self.frame.axis] - self.frame.offset


def require_interval(dom: Domain, op_name: str) -> IntervalDomain:
    if not isinstance(dom, IntervalDomain):
        raise UnsupportedRegimeError(f"{op_name} is implemented for interval domains only")
    return dom
