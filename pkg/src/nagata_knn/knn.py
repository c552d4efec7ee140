"""Brute-force k-NN rule over an arbitrary metric space, with explicit tie handling."""

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError


class TieBreak(enum.Enum):
    INDEX_ORDER = "index"
    UNIFORM = "uniform"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown tie-break policy {value!r}; use 'index' or 'uniform'") from None


@dataclass
class LabelledSample:
    """Points (a space batch) with 0/1 labels, in draw order."""

    points: object
    labels: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.labels) != len(self.points):
            raise DomainError("points and labels differ in length")

    def __len__(self):
        return len(self.labels)


@dataclass(frozen=True)
class NeighbourSelection:
    indices: np.ndarray
    radius: float
    sphere_tie_count: int
    open_ball_count: int


def _points(sample):
    return sample.points if isinstance(sample, LabelledSample) else sample


def _check_k(n, k):
    if n == 0:
        raise DomainError("empty sample")
    if not 1 <= k <= n:
        raise DomainError(f"k must satisfy 1 <= k <= n, got k={k}, n={n}")


def radius_from_distances(dist, k):
    _check_k(len(dist), k)
    return np.partition(dist, k - 1)[k - 1]


def select_from_distances(dist, k, policy=TieBreak.UNIFORM, rng=None):
    """k-NN selection given the distance of every sample member to the query.

    Every member strictly inside the k-NN radius is taken; the remaining slots
    go to members on the sphere, by smallest index or uniformly at random.
    """
    dist = np.asarray(dist)
    r = radius_from_distances(dist, k)
    inside = np.flatnonzero(dist < r)
    sphere = np.flatnonzero(dist == r)
    need = k - len(inside)
    if need == len(sphere):
        chosen = sphere
    elif policy is TieBreak.INDEX_ORDER:
        chosen = sphere[:need]
    else:
        if rng is None:
            raise DomainError("uniform tie-breaking needs a random generator")
        chosen = np.sort(rng.choice(sphere, size=need, replace=False))
    return NeighbourSelection(np.concatenate([inside, chosen]), r, len(sphere), len(inside))


def knn_radius(sample, space, x, k):
    """Smallest ``r`` such that the closed ball ``B_r(x)`` holds at least ``k`` sample points."""
    pts = _points(sample)
    _check_k(space.size(pts), k)
    return radius_from_distances(space.distances(pts, x), k)


def knn_select(sample, space, x, k, policy=TieBreak.UNIFORM, rng=None):
    pts = _points(sample)
    _check_k(space.size(pts), k)
    return select_from_distances(space.distances(pts, x), k, TieBreak.parse(policy), rng)


def empirical_regression(sample, space, x, k, policy=TieBreak.UNIFORM, rng=None):
    sel = knn_select(sample, space, x, k, policy, rng)
    return sample.labels[sel.indices].sum() / k


def classify(sample, space, x, k, policy=TieBreak.UNIFORM, rng=None):
    """Majority vote of the selected neighbours; a voting tie goes to 1."""
    sel = knn_select(sample, space, x, k, policy, rng)
    return int(2 * sample.labels[sel.indices].sum() >= k)


def inclusion_probabilities(dist, k):
    """Exact probability that each member is selected under uniform tie-breaking."""
    dist = np.asarray(dist)
    r = radius_from_distances(dist, k)
    inside = dist < r
    sphere = dist == r
    fill = Fraction(int(k - inside.sum()), int(sphere.sum()))
    return [Fraction(1) if a else (fill if s else Fraction(0)) for a, s in zip(inside, sphere)]


def cover_hart_curve(sampler, k_rule, ns, test_points, rng):
    """For each ``n``: max over ``test_points`` of the k-NN radius in a fresh n-sample."""
    space = sampler.space
    test = space.stack(test_points)
    out = []
    for n in ns:
        k = k_rule(n)
        if k > n:
            raise DomainError(f"k_rule({n}) = {k} exceeds n")
        pts = sampler.draw(rng, n).points
        radii = [radius_from_distances(space.distances(pts, space.point(test, t)), k) for t in range(space.size(test))]
        out.append((n, float(max(radii))))
    return out


def ceil_sqrt(n):
    return math.isqrt(n - 1) + 1 if n > 0 else 0
