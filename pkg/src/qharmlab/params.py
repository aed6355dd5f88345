"""Parameters of the rotation-invariant stable process and basic geometry.

The process with stability index ``alpha`` in (0, 2) has characteristic
function ``exp(-t |xi|^alpha)``.  Its potential-theoretic constants are all
built from

    A(d, gamma) = Gamma((d - gamma)/2) / (2^gamma pi^(d/2) |Gamma(gamma/2)|),

with ``gamma = alpha`` for the Riesz kernel and ``gamma = -alpha`` for the
pointwise fractional Laplacian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def riesz_constant(d: int, gamma: float) -> float:
    """A(d, gamma); requires (d - gamma)/2 away from the poles of Gamma."""
    num = math.gamma((d - gamma) / 2.0)
    den = 2.0**gamma * math.pi ** (d / 2.0) * abs(math.gamma(gamma / 2.0))
    return num / den


def exit_time_constant(d: int, alpha: float) -> float:
    """C(d, alpha) in E^x tau_B = C (r^2 - |x - c|^2)^(alpha/2) for a ball."""
    return math.gamma(d / 2.0) / (
        2.0**alpha * math.gamma(1.0 + alpha / 2.0) * math.gamma((d + alpha) / 2.0)
    )


def poisson_constant(d: int, alpha: float) -> float:
    """Normalizing constant of the ball Poisson kernel (exit-place density)."""
    return math.gamma(d / 2.0) * math.sin(math.pi * alpha / 2.0) / math.pi ** (d / 2.0 + 1.0)


@dataclass(frozen=True)
class StableParams:
    """Dimension and stability index together with the derived constants.

    ``A_d_alpha`` is the Riesz-kernel constant (NaN in the recurrent case
    d = alpha where only the compensated kernel exists); ``A_d_neg_alpha``
    is the constant in front of the pointwise fractional Laplacian.
    """

    d: int
    alpha: float
    A_d_alpha: float = field(init=False)
    A_d_neg_alpha: float = field(init=False)

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.d}")
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"stability index must lie in (0, 2), got {self.alpha}")
        a = riesz_constant(self.d, self.alpha) if self.d != self.alpha else math.nan
        object.__setattr__(self, "A_d_alpha", a)
        object.__setattr__(self, "A_d_neg_alpha", riesz_constant(self.d, -self.alpha))

    @property
    def alpha_half(self) -> float:
        return self.alpha / 2.0

    @property
    def transient(self) -> bool:
        return self.d > self.alpha


@dataclass(frozen=True)
class BallSpec:
    """Open ball B(center, radius); in d = 1 this is an interval."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        object.__setattr__(self, "center", c)
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    @property
    def d(self) -> int:
        return self.center.size

    def contains(self, x) -> np.ndarray | bool:
        x = np.asarray(x, dtype=float)
        if self.d == 1:
            return np.abs(x - self.center[0]) < self.radius
        return np.linalg.norm(x - self.center, axis=-1) < self.radius

    def boundary_distance(self, x):
        x = np.asarray(x, dtype=float)
        if self.d == 1:
            return self.radius - np.abs(x - self.center[0])
        return self.radius - np.linalg.norm(x - self.center, axis=-1)


@dataclass(frozen=True)
class ReflectionFrame:
    """Reflection through the hyperplane {x : x[axis] = offset}.

    ``reflect`` is an involution fixing the hyperplane pointwise; the
    "positive side" is x[axis] > offset.
    """

    axis: int = 0
    offset: float = 0.0

    def reflect(self, x):
        x = np.asarray(x, dtype=float)
        out = np.array(x, dtype=float, copy=True)
        if out.ndim == 0:
            return np.asarray(2.0 * self.offset - out)
        out[..., self.axis] = 2.0 * self.offset - out[..., self.axis]
        return out

    def signed_distance(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            return x - self.offset
        return x[..., self.axis] - self.offset

    def is_positive(self, x, strict: bool = True):
        s = self.signed_distance(x)
        return s > 0 if strict else s >= 0
