"""Compensated pure-jump Levy noise on the vertices.

A measure is a finite list of bands, each a compound Poisson component with
total rate ``rate`` and a mark distribution on R^n.  Infinite-activity
measures are represented by finitely many bands; the truncation is a
modelling choice of the caller.  Bands whose marks are not centred are
compensated by a deterministic drift ``-rate * E[mark]`` so the resulting
path is a martingale.

Randomness is counter-based: path ``k`` of seed ``s`` draws from
``numpy.random.default_rng([s, k])``, which makes Monte Carlo batches
order-independent.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class AtomMarks:
    """Finitely many mark values ``points[k]`` with probabilities ``probs[k]``."""

    kind = "atoms"

    def __init__(self, points, probs=None):
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        if points.ndim != 2 or points.shape[0] == 0:
            raise ValueError("atoms need a (k, n) array of points")
        if probs is None:
            probs = np.full(points.shape[0], 1.0 / points.shape[0])
        probs = np.asarray(probs, dtype=float)
        if probs.shape != (points.shape[0],) or np.any(probs < 0) or abs(probs.sum() - 1) > 1e-12:
            raise ValueError("atom probabilities must be nonnegative and sum to 1")
        self.points = points
        self.probs = probs

    @property
    def dim(self):
        return self.points.shape[1]

    def mean(self):
        return self.probs @ self.points

    def second_moment_matrix(self):
        return (self.points * self.probs[:, None]).T @ self.points

    def sample(self, rng, k):
        idx = rng.choice(self.points.shape[0], size=k, p=self.probs)
        return self.points[idx]

    def to_dict(self):
        return {"type": "atoms", "points": self.points.tolist(), "probs": self.probs.tolist()}


class GaussianMarks:
    """Isotropic Gaussian marks ``N(mean, std^2 I)``."""

    kind = "gaussian"

    def __init__(self, std, dim, mean=None):
        if std < 0:
            raise ValueError("std must be nonnegative")
        self.std = float(std)
        self._dim = int(dim)
        self._mean = np.zeros(self._dim) if mean is None else np.asarray(mean, dtype=float)
        if self._mean.shape != (self._dim,):
            raise ValueError("mean must have length dim")

    @property
    def dim(self):
        return self._dim

    def mean(self):
        return self._mean.copy()

    def second_moment_matrix(self):
        return self.std**2 * np.eye(self.dim) + np.outer(self._mean, self._mean)

    def sample(self, rng, k):
        return self._mean + self.std * rng.standard_normal((k, self.dim))

    def to_dict(self):
        return {"type": "gaussian", "std": self.std, "mean": self._mean.tolist()}


class BallMarks:
    """Marks uniform on the centred ball of the given radius."""

    kind = "ball"

    def __init__(self, radius, dim):
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        self.radius = float(radius)
        self._dim = int(dim)

    @property
    def dim(self):
        return self._dim

    def mean(self):
        return np.zeros(self.dim)

    def second_moment_matrix(self):
        # E|X|^2 = n r^2 / (n + 2), split evenly over coordinates
        return self.radius**2 / (self.dim + 2) * np.eye(self.dim)

    def sample(self, rng, k):
        g = rng.standard_normal((k, self.dim))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        r = self.radius * rng.random((k, 1)) ** (1.0 / self.dim)
        return g / norms * r

    def to_dict(self):
        return {"type": "ball", "radius": self.radius}


@dataclass(frozen=True)
class Band:
    rate: float
    marks: object

    def __post_init__(self):
        if not self.rate >= 0:
            raise ValueError(f"band rate must be nonnegative, got {self.rate}")


@dataclass(frozen=True)
class LevyMeasureSpec:
    """``variant`` is ``"compound_poisson"`` (one band) or ``"truncated_series"``."""

    bands: tuple
    variant: str = "compound_poisson"

    def __post_init__(self):
        if self.variant not in ("compound_poisson", "truncated_series"):
            raise ValueError(f"unknown noise variant {self.variant!r}")
        if not self.bands:
            raise ValueError("noise needs at least one band")
        if self.variant == "compound_poisson" and len(self.bands) != 1:
            raise ValueError("compound_poisson noise has exactly one band")
        dims = {b.marks.dim for b in self.bands}
        if len(dims) != 1:
            raise ValueError(f"bands disagree on the noise dimension: {sorted(dims)}")
        object.__setattr__(self, "bands", tuple(self.bands))

    @property
    def dim(self):
        return self.bands[0].marks.dim

    def second_moment_matrix(self):
        """``int x x^T nu(dx)``."""
        return sum(b.rate * b.marks.second_moment_matrix() for b in self.bands)

    def compensator_drift(self):
        return -sum(b.rate * b.marks.mean() for b in self.bands)


def second_moment(spec: LevyMeasureSpec) -> float:
    """``int |x|^2 nu(dx)``, finite for every representable spec."""
    return float(np.trace(spec.second_moment_matrix()))


@dataclass(frozen=True)
class NoisePath:
    horizon: float
    jump_times: np.ndarray
    jump_marks: np.ndarray = field(repr=False)  # (k, n)
    compensator_drift: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return self.compensator_drift.size

    @property
    def n_jumps(self):
        return self.jump_times.size

    def value_at(self, t):
        """``L(t) = sum_{s_k <= t} x_k + compensator_drift * t``."""
        k = np.searchsorted(self.jump_times, t, side="right")
        return self.jump_marks[:k].sum(axis=0) + self.compensator_drift * t


def path_rng(seed: int, path_index: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(path_index)])


def sample_jumps(spec: LevyMeasureSpec, T: float, rng_seed: int, path_index: int = 0) -> NoisePath:
    if not T > 0:
        raise ValueError(f"horizon must be positive, got {T}")
    rng = path_rng(rng_seed, path_index)
    times, marks = [], []
    for band in spec.bands:
        k = rng.poisson(band.rate * T)
        times.append(T * (1.0 - rng.random(k)))  # uniform on (0, T]
        marks.append(band.marks.sample(rng, k).reshape(k, spec.dim))
    times = np.concatenate(times)
    marks = np.concatenate(marks, axis=0)
    order = np.argsort(times, kind="stable")
    times, marks = times[order], marks[order]
    drift = np.asarray(spec.compensator_drift(), dtype=float) + np.zeros(spec.dim)
    for arr in (times, marks, drift):
        arr.setflags(write=False)
    return NoisePath(float(T), times, marks, drift)
