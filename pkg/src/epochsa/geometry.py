"""Euclidean ball domains, projection, and streaming averages.

Points are plain 1-D float64 numpy arrays; the helpers in
:mod:`epochsa.validation` enforce finiteness and matching dimensions at
module boundaries so the arithmetic here can stay unguarded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .validation import check_positive, check_vector

#: Absolute tolerance for membership and idempotence checks. Double-precision
#: noise floor for dimensions up to ~100.
MEMBERSHIP_TOL = 1e-12


@dataclass(frozen=True)
class BallDomain:
    """Closed Euclidean ball ``{w : ||w - center|| <= radius}``.

    The only constrained domain the solvers support. Balls keep the
    projection exact and closed-form, so no inner optimization is ever
    needed to enforce feasibility.
    """

    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = check_vector(self.center, name="center")
        center = center.copy()
        center.setflags(write=False)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", check_positive(self.radius, "radius"))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def contains(self, w, tol: float = MEMBERSHIP_TOL) -> bool:
        w = check_vector(w, dim=self.dim, name="w")
        return float(np.linalg.norm(w - self.center)) <= self.radius + tol

    def project(self, w) -> np.ndarray:
        """Nearest point of the ball: ``w`` itself inside, radial pullback outside."""
        w = check_vector(w, dim=self.dim, name="w")
        return project_raw(self.center, self.radius, w.copy())

    def boundary_point(self) -> np.ndarray:
        """Deterministic point on the sphere: center offset by radius along axis 0."""
        w = self.center.copy()
        w[0] += self.radius
        return w

    def sample_interior(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``n`` points uniformly from the ball, stacked as rows."""
        d = self.dim
        u = rng.standard_normal((n, d))
        norms = np.linalg.norm(u, axis=1, keepdims=True)
        np.maximum(norms, np.finfo(float).tiny, out=norms)
        radii = self.radius * rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / d)
        return self.center + u * (radii / norms)


def project_raw(center: np.ndarray, radius: float, w: np.ndarray) -> np.ndarray:
    """Projection without validation or copying; hot path for the solvers."""
    delta = w - center
    dist_sq = float(delta @ delta)
    if dist_sq <= radius * radius:
        return w
    return center + delta * (radius / np.sqrt(dist_sq))


def project(domain: BallDomain, w) -> np.ndarray:
    """Euclidean projection of ``w`` onto ``domain``."""
    return domain.project(w)


def project_rows(domain: BallDomain, W: np.ndarray) -> np.ndarray:
    """Row-wise projection of a stack of points onto ``domain``."""
    delta = W - domain.center
    dists = np.linalg.norm(delta, axis=1, keepdims=True)
    scale = np.where(dists > domain.radius, domain.radius / np.maximum(dists, np.finfo(float).tiny), 1.0)
    return domain.center + delta * scale


def squared_distance(a, b) -> float:
    """``sum_i (a_i - b_i)^2``; symmetric, zero iff the points coincide."""
    a = check_vector(a, name="a")
    b = check_vector(b, dim=a.shape[0], name="b")
    d = a - b
    return float(d @ d)


class RunningMean:
    """Streaming arithmetic mean of vectors in O(d) memory.

    Uses the update ``m <- m + (w - m)/t``, which drifts less than
    sum-then-divide over long streams.
    """

    def __init__(self, dim: int):
        self._mean = np.zeros(dim)
        self._count = 0

    def push(self, w: np.ndarray) -> None:
        self._count += 1
        self._mean += (w - self._mean) / self._count

    @property
    def count(self) -> int:
        return self._count

    @property
    def mean(self) -> np.ndarray:
        if self._count == 0:
            raise ValueError("mean of an empty stream is undefined")
        return self._mean.copy()


def running_average(vectors: Iterable, count: int) -> np.ndarray:
    """Incremental mean of the first ``count`` vectors of a stream."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    it = iter(vectors)
    try:
        first = check_vector(next(it), name="vectors[0]")
    except StopIteration:
        raise ValueError("stream exhausted before count vectors were seen") from None
    acc = RunningMean(first.shape[0])
    acc.push(first)
    for i in range(1, count):
        try:
            v = next(it)
        except StopIteration:
            raise ValueError("stream exhausted before count vectors were seen") from None
        acc.push(check_vector(v, dim=first.shape[0], name=f"vectors[{i}]"))
    return acc.mean
