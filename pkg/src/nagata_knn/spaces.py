"""Metric spaces with exact distances and seeded samplers.

Every space works on *batches*: the packed representation returned by
``space.stack(points)``.  ``space.distances(batch, q)`` returns a float array
of distances from every batch member to ``q``; ``space.point(batch, i)``
unpacks a single point again.
"""

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import accumulate
from numbers import Real

import numpy as np

from .errors import CapacityError, ConfigError, DepthExhaustedError, DomainError

MAX_LAZY_DEPTH = 10**6
SEED_BOUND = 2**63 - 1


class MetricSpace:
    family = "abstract"
    scale = math.inf

    def distance(self, p, q):
        return self.distances(self.stack([p]), q)[0]

    def distances(self, batch, q):
        raise NotImplementedError

    def pairwise(self, batch):
        n = self.size(batch)
        out = np.empty((n, n))
        for i in range(n):
            out[i] = self.distances(batch, self.point(batch, i))
        return out

    def stack(self, points):
        raise NotImplementedError

    def point(self, batch, i):
        return batch[i]

    def size(self, batch):
        return len(batch)

    def spec(self):
        return {"family": self.family, "params": {}}


def distance(space, p, q):
    """Exact distance between two points of ``space``."""
    return space.distance(p, q)


# -- Euclidean -----------------------------------------------------------------


class EuclideanSpace(MetricSpace):
    family = "euclidean"

    def __init__(self, dim=1):
        if dim < 1:
            raise ConfigError("dimension must be >= 1")
        self.dim = int(dim)

    def _coerce(self, p):
        if isinstance(p, (SeqPoint, SumPoint)):
            raise DomainError(f"{type(p).__name__} is not a point of {self.family}")
        arr = np.asarray(p, dtype=float).reshape(-1)
        if arr.shape != (self.dim,):
            raise DomainError(f"expected a {self.dim}-vector, got shape {arr.shape}")
        return arr

    def stack(self, points):
        if isinstance(points, np.ndarray) and points.ndim == 2:
            return points.astype(float)
        if len(points) == 0:
            return np.empty((0, self.dim))
        return np.stack([self._coerce(p) for p in points])

    def distances(self, batch, q):
        q = self._coerce(q)
        if self.dim == 1:
            return np.abs(batch[:, 0] - q[0])
        return np.sqrt(((batch - q) ** 2).sum(axis=1))

    def pairwise(self, batch):
        if self.dim == 1:
            x = batch[:, 0]
            return np.abs(x[:, None] - x[None, :])
        diff = batch[:, None, :] - batch[None, :, :]
        return np.sqrt((diff**2).sum(axis=2))

    def spec(self):
        return {"family": self.family, "params": {"dim": self.dim}}


# -- Sequence spaces -------------------------------------------------------------


@dataclass(frozen=True)
class SeqPoint:
    """Point of a product of finite alphabets ``[N_1] x [N_2] x ...``.

    A finite point (``seed is None``) is exactly ``symbols``.  An infinite point
    stores its first ``width`` symbols and produces the rest on demand from
    ``seed``, so repeated queries at the same depth always agree.
    """

    symbols: tuple
    seed: int | None = None

    @property
    def infinite(self):
        return self.seed is not None

    @property
    def level(self):
        return math.inf if self.infinite else len(self.symbols)


@dataclass
class SeqBatch:
    symbols: np.ndarray  # (n, width), zero-padded past a finite level
    levels: np.ndarray  # (n,), -1 marks an infinite point
    seeds: np.ndarray  # (n,), -1 for finite points

    def __len__(self):
        return len(self.levels)


class SequenceSpace(MetricSpace):
    """Shared machinery for spaces of finite/lazy-infinite symbol sequences."""

    def __init__(self, alphabet, tail=None, width=32, max_depth=MAX_LAZY_DEPTH):
        alphabet = tuple(int(a) for a in alphabet)
        if not alphabet or min(alphabet) < 2:
            raise ConfigError("alphabet sizes must be >= 2")
        self.alphabet = alphabet
        self.tail = int(tail) if tail is not None else alphabet[-1]
        if self.tail < 2:
            raise ConfigError("tail alphabet size must be >= 2")
        self.width = int(width)
        self.max_depth = int(max_depth)

    def alphabet_size(self, i):
        """Size of the alphabet at 1-based position ``i``."""
        return self.alphabet[i - 1] if i <= len(self.alphabet) else self.tail

    def _sizes(self, start, stop):
        return np.array([self.alphabet_size(i) for i in range(start + 1, stop + 1)])

    def continuation(self, seed, block):
        """Symbols ``block*width .. (block+1)*width - 1`` (0-based) of an infinite point."""
        sizes = self._sizes(block * self.width, (block + 1) * self.width)
        return np.random.default_rng([int(seed), int(block)]).integers(1, sizes + 1)

    def coordinate(self, p, i):
        """1-based coordinate ``i`` of ``p``."""
        if i <= len(p.symbols):
            return p.symbols[i - 1]
        if not p.infinite:
            raise DomainError(f"finite point has no coordinate {i}")
        block, offset = divmod(i - 1, self.width)
        return int(self.continuation(p.seed, block)[offset])

    def finite_point(self, symbols):
        p = SeqPoint(tuple(int(s) for s in symbols))
        self._check(p)
        return p

    def random_points(self, rng, size, depth=None):
        """Uniform (Haar) draws: infinite points, or finite ones of length ``depth``."""
        if depth is None:
            sizes = self._sizes(0, self.width)
            sym = rng.integers(1, sizes + 1, size=(size, self.width))
            seeds = rng.integers(0, SEED_BOUND, size=size)
            levels = np.full(size, -1)
        else:
            sizes = self._sizes(0, depth)
            sym = np.zeros((size, self.width), dtype=np.int64)
            sym[:, :depth] = rng.integers(1, sizes + 1, size=(size, depth))
            seeds = np.full(size, -1)
            levels = np.full(size, depth)
        return SeqBatch(sym.astype(np.int64), levels.astype(np.int64), seeds.astype(np.int64))

    def _check(self, p):
        if not isinstance(p, SeqPoint):
            raise DomainError(f"{type(p).__name__} is not a point of {self.family}")
        if p.infinite and len(p.symbols) != self.width:
            raise DomainError(f"infinite point must carry exactly {self.width} symbols")
        if not p.infinite and len(p.symbols) > self.width:
            raise DomainError(f"finite point longer than width {self.width}")
        for i, s in enumerate(p.symbols, start=1):
            if not 1 <= s <= self.alphabet_size(i):
                raise DomainError(f"symbol {s} at position {i} outside [1..{self.alphabet_size(i)}]")

    def _row(self, p):
        row = np.zeros(self.width, dtype=np.int64)
        row[: len(p.symbols)] = p.symbols
        return row

    def stack(self, points):
        if isinstance(points, SeqBatch):
            return points
        n = len(points)
        sym = np.zeros((n, self.width), dtype=np.int64)
        levels = np.empty(n, dtype=np.int64)
        seeds = np.empty(n, dtype=np.int64)
        for i, p in enumerate(points):
            self._check(p)
            sym[i, : len(p.symbols)] = p.symbols
            levels[i] = -1 if p.infinite else len(p.symbols)
            seeds[i] = p.seed if p.infinite else -1
        return SeqBatch(sym, levels, seeds)

    def point(self, batch, i):
        lvl = int(batch.levels[i])
        if lvl < 0:
            return SeqPoint(tuple(int(s) for s in batch.symbols[i]), int(batch.seeds[i]))
        return SeqPoint(tuple(int(s) for s in batch.symbols[i, :lvl]))

    def size(self, batch):
        return len(batch)

    def _lazy_prefix(self, seed_p, seed_q):
        if seed_p == seed_q:
            return math.inf
        block = 1
        while block * self.width < self.max_depth:
            a = self.continuation(seed_p, block)
            b = self.continuation(seed_q, block)
            diff = np.flatnonzero(a != b)
            if diff.size:
                return block * self.width + int(diff[0])
            block += 1
        raise DepthExhaustedError(
            f"seeds {seed_p} and {seed_q} agree on the first {self.max_depth} symbols"
        )

    def common_prefix(self, batch, q):
        """Length of the common prefix of each batch member with ``q`` (inf if equal)."""
        self._check(q)
        mism = batch.symbols != self._row(q)
        hit = mism.any(axis=1)
        j = np.where(hit, mism.argmax(axis=1), self.width).astype(float)
        lev = np.where(batch.levels < 0, np.inf, batch.levels.astype(float))
        j = np.minimum(j, lev)
        j = np.minimum(j, q.level)
        if q.infinite:
            for idx in np.flatnonzero(~hit & (batch.levels < 0)):
                j[idx] = self._lazy_prefix(int(batch.seeds[idx]), q.seed)
        return j, lev

    def spec(self):
        return {
            "family": self.family,
            "params": {"alphabet": list(self.alphabet), "tail": self.tail, "width": self.width},
        }


class CantorSpace(SequenceSpace):
    """Product of finite alphabets with ``d(s, t) = 2^-min{i : s_i != t_i}``."""

    family = "ultrametric"

    def __init__(self, alphabet, tail=None, depth=None, width=None, max_depth=MAX_LAZY_DEPTH):
        if depth is not None:
            width = depth
        super().__init__(alphabet, tail=tail, width=width or 32, max_depth=max_depth)
        self.depth = depth

    def distances(self, batch, q):
        j, lev = self.common_prefix(batch, q)
        same = np.isinf(j) | ((j == lev) & (j == q.level))
        return np.where(same, 0.0, np.power(2.0, -(j + 1)))

    def pairwise(self, batch):
        # all-finite fast path; infinite batches fall back to row-wise lazy comparisons
        if (batch.levels < 0).any():
            return super().pairwise(batch)
        mism = batch.symbols[:, None, :] != batch.symbols[None, :, :]
        hit = mism.any(axis=2)
        j = np.where(hit, mism.argmax(axis=2), self.width).astype(float)
        lev = batch.levels.astype(float)
        j = np.minimum(j, np.minimum(lev[:, None], lev[None, :]))
        same = (j == lev[:, None]) & (j == lev[None, :])
        return np.where(same, 0.0, np.power(2.0, -(j + 1)))

    def sample_points(self, rng, size):
        return self.random_points(rng, size, depth=self.depth)

    def spec(self):
        s = super().spec()
        s["params"]["depth"] = self.depth
        return s


def _as_level(j):
    return np.power(4.0, -np.asarray(j, dtype=float))


class PreissSpace(SequenceSpace):
    """Points of ``Q*`` (finite levels) and ``Q`` under the Hilbert embedding

    ``f(n) = sum_i 2^-i e_(n_1..n_i)``.  Distances use the closed forms for the
    squared norm: with common prefix ``j`` and levels ``a <= b`` (inf for
    infinite points), ``d^2 = 2/3 (4^-j - 4^-a) + 1/3 (4^-a - 4^-b)``.
    """

    family = "preiss"

    def __init__(self, params, width=None, max_depth=MAX_LAZY_DEPTH):
        self.params = params
        width = width or max(32, params.levels)
        super().__init__(params.alphabet, tail=params.alphabet[-1], width=width, max_depth=max_depth)

    def distances(self, batch, q):
        j, lev = self.common_prefix(batch, q)
        a = np.minimum(lev, q.level)
        b = np.maximum(lev, q.level)
        fj, fa, fb = _as_level(j), _as_level(a), _as_level(b)
        sq = (2.0 / 3.0) * (fj - fa) + (1.0 / 3.0) * (fa - fb)
        return np.sqrt(np.maximum(sq, 0.0))

    def spec(self):
        return {
            "family": self.family,
            "params": {"levels": self.params.levels, "exponent": self.params.exponent},
        }


# -- Preiss parameters --------------------------------------------------------------


@dataclass(frozen=True)
class PreissParams:
    """Alphabet sizes ``N_1..N_K`` and per-level atomic masses.

    ``level_masses[k-1]`` is ``b_k = a_k * N_1...N_k``, the total mu0-mass of
    level ``k``; the atom weight is ``a_k = b_k / (N_1...N_k)``.
    """

    alphabet: tuple
    level_masses: tuple
    exponent: int | None = None

    @property
    def levels(self):
        return len(self.alphabet)

    @property
    def cell_counts(self):
        """``(N_1, N_1 N_2, ..., N_1...N_K)`` as exact integers."""
        return tuple(accumulate(self.alphabet, lambda a, b: a * b))

    @property
    def atom_weights(self):
        return tuple(Fraction(b) / p for b, p in zip(self.level_masses, self.cell_counts))

    @property
    def normalizer_exact(self):
        return 1 + sum(Fraction(b) for b in self.level_masses)

    @property
    def normalizer(self):
        return float(self.normalizer_exact)

    def growth(self):
        """``a_k N_1...N_k N_{k+1}`` for ``k = 1..K-1``."""
        return [Fraction(b) * n for b, n in zip(self.level_masses, self.alphabet[1:])]

    def satisfies_conditions(self):
        if min(self.alphabet) < 2 or min(self.level_masses) <= 0:
            return False
        g = self.growth()
        if any(x > y for x, y in zip(g, g[1:])):
            return False
        # the ">= 10x" growth check needs at least three values to mean anything
        if len(g) >= 3 and g[-1] < 10 * g[0]:
            return False
        return True


def build_preiss_params(K, exponent=5):
    """``N_1 = 2``, ``N_{k+1} = max(2, k^exponent)``, ``a_k = k^-2 / (N_1...N_k)``."""
    if K < 2:
        raise DomainError("Preiss construction needs K >= 2 levels")
    if exponent < 3:
        raise ConfigError("exponent must be >= 3 for a_k N_1..N_{k+1} to diverge")
    alphabet = [2] + [max(2, k**exponent) for k in range(1, K)]
    masses = [Fraction(1, k * k) for k in range(1, K + 1)]
    return PreissParams(tuple(alphabet), tuple(masses), exponent)


def preiss_ball_masses(params, radius_sq):
    """Exact ``(mu1, mu0)`` masses (unnormalized) of the closed ball of squared
    radius ``radius_sq`` around ``f(n)`` for an infinite point ``n``."""
    r2 = Fraction(radius_sq)
    N = params.alphabet
    P = (1,) + params.cell_counts
    if r2 <= 0:
        mu1 = Fraction(0)
    else:
        j, cells = 0, 1
        while Fraction(2, 3) / 4**j > r2:
            j += 1
            cells *= N[j - 1] if j <= len(N) else N[-1]
        mu1 = Fraction(1, cells)
    mu0 = Fraction(0)
    for l, b in enumerate(params.level_masses, start=1):
        b = Fraction(b)
        for j in range(l + 1):
            d2 = Fraction(2, 3) * (Fraction(1, 4**j) - Fraction(1, 4**l)) + Fraction(1, 3 * 4**l)
            if d2 > r2:
                continue
            if j == l:
                mu0 += b / P[l]
            else:
                mu0 += b * (N[j] - 1) / P[j + 1]
    return mu1, mu0


def preiss_domination(params):
    """Per level ``k``: (ratio mu1/mu0 at the level-k atom sphere, bound 1/(N_1..N_{k+1} a_k))."""
    out = []
    P = params.cell_counts
    a = params.atom_weights
    for k in range(1, params.levels):
        mu1, mu0 = preiss_ball_masses(params, Fraction(1, 3 * 4**k))
        out.append((mu1 / mu0, Fraction(1, P[k]) / a[k - 1]))
    return out


# -- Ultrametric sample spaces with ties --------------------------------------------


class HubSpace(MetricSpace):
    """``x_1, x_2, ...`` with ``d(x_1, x_2) = 1`` and, for ``n >= 2``, ``x_{n+1}``
    at distance ``2^n`` from all earlier points."""

    family = "hub"

    def _coerce(self, i):
        if isinstance(i, (bool, SeqPoint, SumPoint)) or int(i) != i or i < 1:
            raise DomainError(f"hub points are naturals >= 1, got {i!r}")
        return int(i)

    def stack(self, points):
        return np.array([self._coerce(p) for p in points], dtype=np.int64)

    def point(self, batch, i):
        return int(batch[i])

    def distances(self, batch, q):
        q = self._coerce(q)
        m = np.maximum(batch, q)
        return np.where(batch == q, 0.0, np.where(m == 2, 1.0, np.power(2.0, m - 1)))


class DiscreteSpace(MetricSpace):
    """All distinct points at distance one (the regular simplex)."""

    family = "simplex"

    def stack(self, points):
        return np.array([int(p) for p in points], dtype=np.int64)

    def point(self, batch, i):
        return int(batch[i])

    def distances(self, batch, q):
        return np.where(batch == int(q), 0.0, 1.0)


class GeometricUltrametric(MetricSpace):
    """``x_0, x_1, ...`` with ``d(x_i, x_j) = sum_{k=1}^{max(i,j)} alpha^k`` for ``i != j``.

    Pass ``alpha`` as a ``Fraction`` to get exact rational distances.
    """

    family = "geometric"

    def __init__(self, alpha):
        if not 0 < alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        self.alpha = alpha

    def stack(self, points):
        return list(points)

    def distance(self, p, q):
        if isinstance(p, (SeqPoint, SumPoint)) or isinstance(q, (SeqPoint, SumPoint)):
            raise DomainError("geometric ultrametric points are naturals")
        if p == q:
            return 0 * self.alpha
        m = max(p, q)
        a = self.alpha
        return a * (1 - a**m) / (1 - a)

    def distances(self, batch, q):
        return np.array([self.distance(p, q) for p in batch])

    def spec(self):
        return {"family": self.family, "params": {"alpha": float(self.alpha)}}


class IntervalSpace(MetricSpace):
    family = "interval"

    def stack(self, points):
        return list(points)

    def distance(self, p, q):
        if not isinstance(p, Real) or not isinstance(q, Real):
            raise DomainError("interval points are reals")
        return abs(p - q)

    def distances(self, batch, q):
        return np.array([self.distance(p, q) for p in batch])


@dataclass(frozen=True)
class SumPoint:
    left: object
    right: object


class L1Sum(MetricSpace):
    """``X (+)_1 Y``: coordinatewise sum of the two metrics."""

    family = "l1sum"

    def __init__(self, left, right):
        self.left = left
        self.right = right

    def stack(self, points):
        return list(points)

    def distance(self, p, q):
        if not isinstance(p, SumPoint) or not isinstance(q, SumPoint):
            raise DomainError("l1-sum points must be SumPoint pairs")
        return self.left.distance(p.left, q.left) + self.right.distance(p.right, q.right)

    def distances(self, batch, q):
        return np.array([self.distance(p, q) for p in batch])

    def spec(self):
        return {"family": self.family, "params": {"left": self.left.spec(), "right": self.right.spec()}}


def l1_sum(left, right=None):
    return L1Sum(left, right if right is not None else IntervalSpace())


def l1_witness(alpha, beta, count):
    """Points ``z = (x_0, 0)`` and ``z_i = (x_i, beta^i)``, ``i = 1..count``, in
    ``GeometricUltrametric(alpha) (+)_1 [0, 1]``.

    Every pair ``i != j`` satisfies ``d(z_i, z_j) > max(d(z_i, z), d(z_j, z))``.
    Use ``Fraction`` inputs for exact arithmetic; with floats the gaps vanish
    once ``beta^i`` drops below machine precision.
    """
    if not 0 < beta < alpha < 1:
        raise ConfigError("need 0 < beta < alpha < 1")
    if beta >= Fraction(1, 2):
        raise ConfigError("need beta < 1/2")
    space = l1_sum(GeometricUltrametric(alpha), IntervalSpace())
    z = SumPoint(0, 0 * beta)
    zs = [SumPoint(i, beta**i) for i in range(1, count + 1)]
    return space, z, zs


# -- Cantor tie space ------------------------------------------------------------


def _coverage_size(cells, per_cell, risk):
    """Draws ``n`` so that each of ``cells`` uniform cells gets >= ``per_cell`` hits
    with probability > 1 - risk: union bound plus the Chernoff lower tail
    ``P(X < t) <= exp(-(mu - t)^2 / (2 mu))``."""
    log_term = math.log(cells / risk)
    mu = per_cell + log_term + math.sqrt(log_term**2 + 2 * per_cell * log_term)
    return math.ceil(cells * mu) + 1


def build_cantor_ties(delta, base_schedule, cap=10**12):
    """Choose ``(n_k, N_k)`` so that uniform samples carry ``n_k`` distance ties.

    ``N_k`` makes ``n_k`` uniform draws from ``[N_k]`` pairwise distinct with
    probability > 1 - delta_k (birthday bound ``N_k >= n_k^2 / (2 delta_k)``);
    ``n_{k+1}`` makes every cell of ``[N_1] x ... x [N_k]`` receive at least
    ``n_k`` of ``n_{k+1}`` draws with probability > 1 - delta_k.
    ``delta_k = delta / 2^(k+1)`` so that ``2 sum delta_k = delta``.
    """
    if not 0 < delta < 1:
        raise ConfigError("delta must lie in (0, 1)")
    base = [int(b) for b in base_schedule]
    if not base:
        raise ConfigError("base schedule is empty")
    if any(b >= c for b, c in zip(base, base[1:])):
        raise ConfigError("base schedule must be strictly increasing")
    schedule = []
    n = base[0]
    cells = 1
    for k in range(1, len(base) + 1):
        risk = delta / 2 ** (k + 1)
        N = max(2, math.ceil(n * n / (2 * risk)))
        if N > cap:
            raise CapacityError(f"N_{k} = {N} exceeds cap {cap}", level=k)
        schedule.append((n, N))
        cells *= N
        if k < len(base):
            n = max(base[k], _coverage_size(cells, n, risk), n + 1)
    space = CantorSpace([N for _, N in schedule], tail=2)
    space.family = "cantor-ties"
    return space, schedule


# -- Samplers --------------------------------------------------------------------


@dataclass
class LabelledDraw:
    points: object
    labels: np.ndarray
    bayes_labels: np.ndarray

    def __len__(self):
        return len(self.labels)


class Sampler:
    space: MetricSpace
    bayes_error: float

    def draw(self, rng, size):
        raise NotImplementedError

    def sample(self, rng):
        """Single ``(point, label, bayes_label)`` draw."""
        d = self.draw(rng, 1)
        return self.space.point(d.points, 0), int(d.labels[0]), int(d.bayes_labels[0])


class OverlapMixture(Sampler):
    """Two uniform class densities on intervals of the real line."""

    def __init__(self, class0=(0.0, 1.0), class1=(0.9, 1.9), prior1=0.5):
        self.class0 = tuple(map(float, class0))
        self.class1 = tuple(map(float, class1))
        if self.class0[1] <= self.class0[0] or self.class1[1] <= self.class1[0]:
            raise ConfigError("empty class interval")
        if not 0 < prior1 < 1:
            raise ConfigError("prior1 must lie in (0, 1)")
        self.prior1 = float(prior1)
        self.space = EuclideanSpace(1)

    def _densities(self, x):
        x = np.asarray(x, dtype=float)
        (a0, b0), (a1, b1) = self.class0, self.class1
        f0 = np.where((x >= a0) & (x <= b0), (1 - self.prior1) / (b0 - a0), 0.0)
        f1 = np.where((x >= a1) & (x <= b1), self.prior1 / (b1 - a1), 0.0)
        return f0, f1

    def eta(self, x):
        f0, f1 = self._densities(x)
        tot = f0 + f1
        return np.divide(f1, tot, out=np.full_like(tot, 0.5), where=tot > 0)

    @property
    def bayes_error(self):
        (a0, b0), (a1, b1) = self.class0, self.class1
        overlap = max(0.0, min(b0, b1) - max(a0, a1))
        return overlap * min((1 - self.prior1) / (b0 - a0), self.prior1 / (b1 - a1))

    def draw(self, rng, size):
        labels = (rng.random(size) < self.prior1).astype(np.int64)
        lo = np.where(labels == 1, self.class1[0], self.class0[0])
        hi = np.where(labels == 1, self.class1[1], self.class0[1])
        x = lo + (hi - lo) * rng.random(size)
        bayes = (self.eta(x) >= 0.5).astype(np.int64)
        return LabelledDraw(x[:, None], labels, bayes)


class UniformBox(Sampler):
    """Uniform on ``[0, 1]^dim``; every label is 0."""

    bayes_error = 0.0

    def __init__(self, dim=1):
        self.space = EuclideanSpace(dim)

    def draw(self, rng, size):
        x = rng.random((size, self.space.dim))
        z = np.zeros(size, dtype=np.int64)
        return LabelledDraw(x, z, z.copy())


class ProductSampler(Sampler):
    """Haar measure on a Cantor space; ``eta`` gives P(label 1) per first symbol."""

    def __init__(self, space, eta=None):
        self.space = space
        if eta is None:
            eta = [0.0] * space.alphabet[0]
        eta = np.asarray(eta, dtype=float)
        if eta.shape != (space.alphabet[0],) or (eta < 0).any() or (eta > 1).any():
            raise ConfigError("eta needs one probability per first-coordinate symbol")
        self.eta = eta

    @property
    def bayes_error(self):
        return float(np.minimum(self.eta, 1 - self.eta).mean())

    def draw(self, rng, size):
        batch = self.space.sample_points(rng, size)
        eta = self.eta[batch.symbols[:, 0] - 1]
        labels = (rng.random(size) < eta).astype(np.int64)
        return LabelledDraw(batch, labels, (eta >= 0.5).astype(np.int64))


class PreissSampler(Sampler):
    """mu = (mu1 + mu0) / Z: Haar points of ``Q`` labelled 1, atoms of ``Q*`` labelled 0."""

    bayes_error = 0.0

    def __init__(self, params):
        if params.normalizer_exact <= 1:
            raise ConfigError("Preiss parameters are unnormalized (Z <= 1)")
        self.params = params
        self.space = PreissSpace(params)
        masses = np.array([float(b) for b in params.level_masses])
        self._level_p = masses / masses.sum()
        self.p_concept = 1.0 / params.normalizer

    def draw(self, rng, size):
        sp = self.space
        K = self.params.levels
        ones = rng.random(size) < self.p_concept
        sizes = sp._sizes(0, sp.width)
        sym = rng.integers(1, sizes + 1, size=(size, sp.width)).astype(np.int64)
        levels = rng.choice(np.arange(1, K + 1), size=size, p=self._level_p)
        seeds = rng.integers(0, SEED_BOUND, size=size)
        levels = np.where(ones, -1, levels).astype(np.int64)
        seeds = np.where(ones, seeds, -1).astype(np.int64)
        cols = np.arange(sp.width)
        sym[(levels[:, None] >= 0) & (cols[None, :] >= levels[:, None])] = 0
        labels = ones.astype(np.int64)
        return LabelledDraw(SeqBatch(sym, levels, seeds), labels, labels.copy())


def sample(sampler, rng):
    return sampler.sample(rng)


# -- Space description (de)serialization ------------------------------------------------------

FAMILIES = ("euclidean", "ultrametric", "preiss", "hub", "simplex", "l1sum", "cantor-ties")


def build_from_spec(spec):
    """Build ``(space, sampler or None)`` from a ``{"family", "params"}`` mapping."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise ConfigError("space spec needs a 'family' key")
    family = spec["family"]
    params = dict(spec.get("params", {}))
    try:
        if family == "euclidean":
            if "mixture" in params:
                m = params["mixture"]
                s = OverlapMixture(m.get("class0", (0, 1)), m.get("class1", (0.9, 1.9)), m.get("prior1", 0.5))
                return s.space, s
            s = UniformBox(params.get("dim", 1))
            return s.space, s
        if family == "ultrametric":
            space = CantorSpace(
                params.get("alphabet", [2]),
                tail=params.get("tail"),
                depth=params.get("depth"),
                width=params.get("width"),
            )
            return space, ProductSampler(space, params.get("eta"))
        if family == "preiss":
            s = PreissSampler(build_preiss_params(params.get("levels", 12), params.get("exponent", 5)))
            return s.space, s
        if family == "hub":
            return HubSpace(), None
        if family == "simplex":
            return DiscreteSpace(), None
        if family == "l1sum":
            alpha = Fraction(str(params.get("alpha", "0.9")))
            beta = Fraction(str(params.get("beta", "0.4")))
            space, _, _ = l1_witness(alpha, beta, 1)
            return space, None
        if family == "cantor-ties":
            space, _ = build_cantor_ties(params.get("delta", 0.5), params.get("base_schedule", [2]))
            return space, ProductSampler(space)
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"bad parameters for family {family!r}: {exc}") from exc
    raise ConfigError(f"unknown space family {family!r}; expected one of {', '.join(FAMILIES)}")


def load_spec(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
