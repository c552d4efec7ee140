"""Ball families, Nagata-dimension witnesses and the Stone / Hardy-Littlewood
counting lemmas, checked on finite point sets."""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .errors import CapacityError, DomainError, PreconditionError
from .knn import TieBreak, radius_from_distances, select_from_distances


@dataclass(frozen=True)
class Ball:
    center: int
    radius: float
    closed: bool = True

    def __post_init__(self):
        if self.radius < 0:
            raise DomainError("ball radius must be >= 0")
        if self.radius == 0 and not self.closed:
            raise DomainError(f"open ball of radius 0 at {self.center} is empty")


@dataclass
class BallFamily:
    """Balls centred at members of ``points`` (a space batch)."""

    points: object
    space: object
    balls: list
    scale: float = math.inf
    _dist: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        n = self.space.size(self.points)
        for b in self.balls:
            if not 0 <= b.center < n:
                raise DomainError(f"ball centre index {b.center} out of range")
            if b.radius >= self.scale:
                raise DomainError(f"ball radius {b.radius} not below scale {self.scale}")

    @property
    def distances(self):
        if self._dist is None:
            self._dist = self.space.pairwise(self.points)
        return self._dist

    def subfamily(self, keep):
        return BallFamily(self.points, self.space, [self.balls[i] for i in keep], self.scale, self._dist)


def _contains(ball, d):
    return d <= ball.radius if ball.closed else d < ball.radius


def membership(balls, dist_to_probe):
    """Boolean matrix: ``[b, p]`` is True when probe ``p`` lies in ball ``b``.

    ``dist_to_probe[b, p]`` is the distance from ball ``b``'s centre to probe ``p``.
    """
    r = np.array([b.radius for b in balls], dtype=float)[:, None]
    closed = np.array([b.closed for b in balls])[:, None]
    return np.where(closed, dist_to_probe <= r, dist_to_probe < r)


def ball_multiplicity(family, probes=None):
    """Max over probes of the number of balls containing the probe.

    ``probes=None`` probes every point of the family.
    """
    if not family.balls:
        return 0
    centres = [b.center for b in family.balls]
    if probes is None:
        d = family.distances[centres]
    else:
        if len(probes) == 0:
            raise DomainError("probe set is empty")
        sp = family.space
        cb = sp.stack([sp.point(family.points, c) for c in centres])
        d = np.stack([sp.distances(cb, p) for p in probes], axis=1)
    return int(membership(family.balls, d).sum(axis=0).max())


def is_disconnected(family):
    """True iff no ball's centre lies in another ball of the family."""
    centres = [b.center for b in family.balls]
    inside = membership(family.balls, family.distances[np.ix_(centres, centres)])
    np.fill_diagonal(inside, False)
    return not inside.any()


def center_cover_subfamily(family):
    """Disconnected subfamily covering every original centre.

    Balls are scanned by decreasing radius (closed before open at equal radius,
    then by position) and kept when their centre is not yet covered by a kept
    ball.  A kept ball's centre lies outside every larger kept ball, and the
    larger ball's centre is then outside the smaller one, so the result is
    disconnected; every dropped centre is covered by construction.
    """
    balls = family.balls
    order = sorted(range(len(balls)), key=lambda i: (-balls[i].radius, not balls[i].closed, i))
    D = family.distances
    kept = []
    for i in order:
        c = balls[i].center
        if not any(_contains(balls[j], D[balls[j].center, c]) for j in kept):
            kept.append(i)
    return family.subfamily(sorted(kept))


@dataclass(frozen=True)
class NagataWitness:
    """``delta + 2`` points in the closed ball ``B_radius(center)`` with every pair
    farther apart than the larger of their distances to the centre."""

    center: int
    members: tuple
    radius: float

    def report(self, D):
        lines = [f"center: {self.center}", f"radius: {self.radius!r}", f"members: {list(self.members)}"]
        for i, j in combinations(self.members, 2):
            lines.append(
                f"d({i},{j}) = {float(D[i, j])!r} > max(d({self.center},{i}), d({self.center},{j}))"
                f" = {float(max(D[self.center, i], D[self.center, j]))!r}"
            )
        return "\n".join(lines)


def default_witness_cap(delta):
    if delta == 0:
        return 400
    return 30 if delta <= 2 else 16


def _find_clique(adj, candidates, size):
    """First clique of ``size`` vertices among ``candidates`` (sorted backtracking)."""

    def extend(chosen, pool):
        if len(chosen) == size:
            return chosen
        for pos, v in enumerate(pool):
            if len(chosen) + len(pool) - pos < size:
                return None
            rest = [u for u in pool[pos + 1 :] if adj[v, u]]
            found = extend(chosen + [v], rest)
            if found:
                return found
        return None

    return extend([], list(candidates))


def violation_witness_from_distances(D, delta, scale=math.inf):
    n = len(D)
    for x in range(n):
        dx = D[x]
        cand = np.flatnonzero(dx < scale)
        if len(cand) < delta + 2:
            continue
        far = np.maximum(dx[:, None], dx[None, :])
        adj = D > far
        if delta == 0:
            sub = adj[np.ix_(cand, cand)]
            hit = np.argwhere(np.triu(sub, 1))
            if len(hit):
                i, j = cand[hit[0][0]], cand[hit[0][1]]
                return NagataWitness(x, (int(i), int(j)), float(max(dx[i], dx[j])))
            continue
        clique = _find_clique(adj, cand, delta + 2)
        if clique:
            return NagataWitness(x, tuple(int(i) for i in clique), float(dx[clique].max()))
    return None


def nagata_violation_witness(points, space, delta, scale=math.inf, cap=None):
    """Search for ``x, x_1..x_{delta+2}`` with ``x_i`` in a closed ball ``B_r(x)``,
    ``r < scale``, and ``d(x_i, x_j) > max(d(x, x_i), d(x, x_j))`` for all pairs.

    ``None`` certifies Nagata dimension ``<= delta`` of the finite set on that scale.
    """
    cap = default_witness_cap(delta) if cap is None else cap
    n = space.size(points)
    if n > cap:
        raise CapacityError(f"{n} points exceeds the witness-search cap {cap} for delta={delta}")
    return violation_witness_from_distances(space.pairwise(points), delta, scale)


# -- Stone's lemma -----------------------------------------------------------------


def _substituted_rows(D, dx, i, x_first):
    row = D[i].copy()
    if x_first:
        others = np.delete(row, i)
        return np.concatenate([[dx[i]], others]), 0
    row[i] = dx[i]
    return row, i


def _stone_count_index(D, dx, k, x_first):
    # x sits at position i (or 0) of row i; index order selects it iff the
    # members strictly closer plus the tying members ahead of it number < k
    off = ~np.eye(len(dx), dtype=bool)
    less = ((D < dx[:, None]) & off).sum(axis=1)
    if x_first:
        ahead = 0
    else:
        ahead = np.tril((D == dx[:, None]) & off, -1).sum(axis=1)
    return int(((dx > 0) & (less + ahead < k)).sum())


def stone_count(points, space, x, k, policy=TieBreak.UNIFORM, rng=None, x_first=False):
    """Number of ``i`` with ``x_i != x`` such that ``x`` is among the k nearest
    neighbours of ``x_i`` in the sample with ``x_i`` replaced by ``x``.

    ``x_first`` moves ``x`` to the front of the substituted sample instead of
    position ``i`` (the adversarial order for index tie-breaking).
    """
    policy = TieBreak.parse(policy)
    n = space.size(points)
    if not 1 <= k <= n:
        raise DomainError(f"k must satisfy 1 <= k <= n, got k={k}, n={n}")
    D = space.pairwise(points)
    dx = space.distances(points, x)
    if policy is TieBreak.INDEX_ORDER:
        return _stone_count_index(D, dx, k, x_first)
    count = 0
    for i in np.flatnonzero(dx > 0):
        row, pos = _substituted_rows(D, dx, i, x_first)
        sel = select_from_distances(row, k, policy, rng)
        count += int(pos in sel.indices)
    return count


class BoundCheck(NamedTuple):
    count: int
    bound: float
    ok: bool


def _first_tie(values):
    """Positions ``(a, b)`` of two equal entries of ``values``, or None."""
    order = np.argsort(values, kind="stable")
    v = values[order]
    dup = np.flatnonzero(v[1:] == v[:-1])
    if dup.size:
        return order[dup[0]], order[dup[0] + 1]
    return None


def stone_bound_no_ties_check(points, space, x, k, delta, scale=math.inf):
    """``stone_count <= (k + 1)(delta + 1)`` on a sample without distance ties."""
    n = space.size(points)
    full = space.stack([x] + [space.point(points, i) for i in range(n)])
    D = space.pairwise(full)
    iu = np.triu_indices(n + 1, 1)
    vals = D[iu]
    tie = _first_tie(vals)
    if tie:
        p, q = tie
        raise PreconditionError(
            f"distance tie: d({iu[0][p]},{iu[1][p]}) = d({iu[0][q]},{iu[1][q]}) = {float(vals[p])!r} (index 0 is x)"
        )
    dx = D[0, 1:]
    S = D[1:, 1:].copy()
    S[np.diag_indices(n)] = dx
    radii = np.partition(S, k - 1, axis=1)[:, k - 1]
    bad = np.flatnonzero(radii >= scale)
    if bad.size:
        i = bad[0]
        raise PreconditionError(f"k-NN radius {radii[i]!r} of x_{i} is not below scale {scale}")
    count = stone_count(points, space, x, k, TieBreak.INDEX_ORDER)
    bound = (k + 1) * (delta + 1)
    return BoundCheck(count, bound, count <= bound)


# -- Hardy-Littlewood type lemmas ------------------------------------------------------


def hl_count_check(points, space, subset_mask, balls, alpha, delta, scale=math.inf):
    """Count centres whose ball holds at least an ``alpha`` fraction of subset
    points, against the bound ``(delta + 1) m / alpha``."""
    n = space.size(points)
    mask = np.asarray(subset_mask, dtype=bool)
    if mask.shape != (n,):
        raise DomainError("subset mask must have one entry per point")
    if len(balls) != n or any(b.center != i for i, b in enumerate(balls)):
        raise DomainError("need exactly one ball per point, ball i centred at point i")
    if not 0 < alpha <= 1:
        raise DomainError("alpha must lie in (0, 1]")
    for b in balls:
        if b.radius >= scale:
            raise DomainError(f"ball radius {b.radius} not below scale {scale}")
    inside = membership(balls, space.pairwise(points))
    tot = inside.sum(axis=1)
    sub = inside[:, mask].sum(axis=1)
    a = Fraction(alpha)
    count = int(np.sum(sub * a.denominator >= a.numerator * tot))
    m = int(mask.sum())
    bound = Fraction(delta + 1) * m / a
    return BoundCheck(count, float(bound), count <= bound)


def merge_fraction_bound(t1, t2, a1, a2, alpha):
    """Whether ``(t1 a1 + t2 a2) / (t1 + t2) <= alpha`` under the premises
    ``t2 <= 1 - t1``, ``a1 <= alpha`` and ``t1 a1 + (1 - t1) a2 <= alpha``."""
    if not (0 <= t1 <= 1 and 0 <= t2 <= 1 and t2 <= 1 - t1):
        raise PreconditionError("need t1, t2 in [0, 1] with t2 <= 1 - t1")
    if t1 + t2 == 0:
        raise PreconditionError("t1 + t2 must be positive")
    if min(a1, a2, alpha) < 0:
        raise PreconditionError("fractions must be non-negative")
    if a1 > alpha or t1 * a1 + (1 - t1) * a2 > alpha:
        raise PreconditionError("premise violated: need a1 <= alpha and t1 a1 + (1 - t1) a2 <= alpha")
    return t1 * a1 + t2 * a2 <= alpha * (t1 + t2)


def merge_fraction_grid(steps=20):
    """Exhaustive check of the merge inequality on the grid ``{0, 1/steps, ..., 1}^5``.

    Returns ``(premise_cells, holding_cells)``; integer arithmetic throughout.
    """
    g = np.arange(steps + 1, dtype=np.int64)
    t1, t2, a1, a2, al = np.meshgrid(g, g, g, g, g, indexing="ij", sparse=True)
    premise = (
        (t2 <= steps - t1)
        & (t1 + t2 > 0)
        & (a1 <= al)
        & (t1 * a1 + (steps - t1) * a2 <= steps * al)
    )
    holds = (t1 * a1 + t2 * a2) <= al * (t1 + t2)
    return int(premise.sum()), int((premise & holds).sum())


class FractionEstimate(NamedTuple):
    mean: float
    stderr: float


def expected_subset_fraction_in_knn(points, space, subset_mask, x, k, trials, rng):
    """Monte Carlo mean of the subset fraction among the k nearest neighbours
    of ``x`` under uniform tie-breaking.

    A uniform subset of the sphere has a hypergeometric subset count, so each
    trial is one hypergeometric draw.
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    mask = np.asarray(subset_mask, dtype=bool)
    dist = space.distances(points, x)
    r = radius_from_distances(dist, k)
    inside = dist < r
    sphere = dist == r
    need = k - int(inside.sum())
    good = int((sphere & mask).sum())
    bad = int(sphere.sum()) - good
    base = int((inside & mask).sum())
    draws = rng.hypergeometric(good, bad, need, size=trials) if need and good else np.zeros(trials, dtype=int)
    frac = (base + draws) / k
    se = frac.std(ddof=1) / math.sqrt(trials) if trials > 1 else 0.0
    return FractionEstimate(float(frac.mean()), float(se))
