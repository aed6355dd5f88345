"""Potentials with declared Hoelder data and boundary data for exit problems."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass
class PotentialSpec:
    """Evaluatable potential q with declared Hoelder regularity.

    The declared data promise ``|q(x) - q(y)| <= holder_A |x - y|^holder_eta``
    on the domain of interest; ``spot_check_holder`` samples random pairs to
    audit the promise.
    """

    func: Callable
    holder_A: float
    holder_eta: float
    support: str = "unspecified"
    name: str = "potential"

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))

    def spot_check_holder(self, lo, hi, n_pairs: int, rng, d: int = 1) -> float:
        """Worst observed |q(x)-q(y)| / (A |x-y|^eta) over random pairs."""
        if d == 1:
            xs = rng.uniform(lo, hi, n_pairs)
            ys = rng.uniform(lo, hi, n_pairs)
            dist = np.abs(xs - ys)
        else:
            xs = rng.uniform(lo, hi, (n_pairs, d))
            ys = rng.uniform(lo, hi, (n_pairs, d))
            dist = np.linalg.norm(xs - ys, axis=-1)
        num = np.abs(self(xs) - self(ys))
        mask = dist > 1e-12
        denom = self.holder_A * dist[mask] ** self.holder_eta
        ratios = num[mask] / np.maximum(denom, 1e-300)
        return float(ratios.max()) if ratios.size else 0.0


def _radial_sq(x, w, d):
    x = np.asarray(x, dtype=float)
    if d == 1:
        return (x - w) ** 2
    return np.sum((x - np.asarray(w, dtype=float)) ** 2, axis=-1)


def _point_shape(x, d):
    x = np.asarray(x, dtype=float)
    return x.shape if d == 1 else x.shape[:-1]


def zero_potential(d: int = 1) -> PotentialSpec:
    return PotentialSpec(lambda x: np.zeros(_point_shape(x, d)),
                         holder_A=0.0, holder_eta=1.0, support="empty", name="zero")


def constant_potential(c: float, d: int = 1) -> PotentialSpec:
    return PotentialSpec(lambda x: np.full(_point_shape(x, d), float(c)),
                         holder_A=0.0, holder_eta=1.0, support="everywhere", name=f"const[{c}]")


def counterexample_potential(w, r: float, alpha: float, d: int = 1) -> PotentialSpec:
    """Critical-exponent potential ``(r^2 - |x - w|^2)_+^(1 - alpha)``.

    Hoelder continuous with exponent exactly 1 - alpha (for alpha = 1 it is
    the bounded indicator of the ball).  Constant: (2r)^(1-alpha) away from
    alpha = 1, and the sup-oscillation 1 at alpha = 1.
    """

    def q(x):
        s = np.clip(r * r - _radial_sq(x, w, d), 0.0, None)
        if alpha == 1.0:
            return (s > 0.0).astype(float)
        return s ** (1.0 - alpha)

    A = 1.0 if alpha == 1.0 else (2.0 * r) ** (1.0 - alpha)
    return PotentialSpec(q, holder_A=A, holder_eta=1.0 - alpha,
                         support=f"ball(w, {r})", name=f"critical[r={r}]")


def smooth_bump_potential(center, width: float, amplitude: float, d: int = 1) -> PotentialSpec:
    """C-infinity Gaussian bump; Lipschitz with A = amplitude/(width*sqrt(e))... computed exactly."""
    A = abs(amplitude) * np.exp(-0.5) / width  # sup |grad| of the Gaussian profile

    def q(x):
        return amplitude * np.exp(-0.5 * _radial_sq(x, center, d) / width**2)

    return PotentialSpec(q, holder_A=float(A), holder_eta=1.0,
                         support="everywhere", name=f"bump[{amplitude}@{center}]")


def parabolic_cap_potential(w, r: float, d: int = 1) -> PotentialSpec:
    """Lipschitz control potential ``(r^2 - |x - w|^2)_+ / r``, sup value r."""

    def q(x):
        return np.clip(r * r - _radial_sq(x, w, d), 0.0, None) / r

    return PotentialSpec(q, holder_A=2.0, holder_eta=1.0,
                         support=f"ball(w, {r})", name=f"cap[r={r}]")


def holder_cusp_potential(center, amplitude: float, eta: float, d: int = 1) -> PotentialSpec:
    """q(x) = amplitude * |x - center|^eta; Hoelder with exponent exactly eta."""

    def q(x):
        return amplitude * _radial_sq(x, center, d) ** (eta / 2.0)

    return PotentialSpec(q, holder_A=abs(amplitude), holder_eta=eta,
                         support="everywhere", name=f"cusp[eta={eta}]")


@dataclass
class BoundaryData:
    """Exterior data f for regular q-harmonic extensions u = E[e_q(tau) f(X_tau)]."""

    func: Callable
    bounded: bool = True
    nonnegative: bool = True
    name: str = "boundary-data"

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))


def constant_data(c: float, d: int = 1) -> BoundaryData:
    return BoundaryData(lambda x: np.full(_point_shape(x, d), float(c)),
                        bounded=True, nonnegative=c >= 0, name=f"const[{c}]")


def indicator_data(predicate: Callable, name: str = "indicator") -> BoundaryData:
    """f = 1 on {predicate}, 0 elsewhere; predicate is vectorized over points."""
    return BoundaryData(lambda x: predicate(x).astype(float), bounded=True,
                        nonnegative=True, name=name)


def interval_far_side_data(threshold: float, side: str = "left") -> BoundaryData:
    """d = 1 data equal to 1 on one side of a threshold, 0 on the other."""
    if side == "left":
        return indicator_data(lambda x: np.asarray(x) <= threshold, name=f"left-of[{threshold}]")
    return indicator_data(lambda x: np.asarray(x) >= threshold, name=f"right-of[{threshold}]")
