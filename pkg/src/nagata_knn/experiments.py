"""Seeded Monte Carlo runners producing CSV-ready rows.

Seed splitting: the generator for a unit of work keyed by integers
``(a, b, ...)`` is ``numpy.random.default_rng([seed, a, b, ...])``, so each
(n, trial) pair gets an independent, reproducible stream regardless of the
order in which work is done.
"""

import csv
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction

import numpy as np

from .errors import ConfigError, DomainError, ResolutionError
from .knn import LabelledSample, TieBreak, ceil_sqrt, inclusion_probabilities, select_from_distances
from .nagata import Ball, hl_count_check, nagata_violation_witness, stone_count
from .spaces import CantorSpace, DiscreteSpace, EuclideanSpace, HubSpace, PreissSampler, build_from_spec

log = logging.getLogger(__name__)


def trial_rng(seed, *key):
    return np.random.default_rng([int(seed), *map(int, key)])


@dataclass(frozen=True)
class KRule:
    """``sqrt``: ceil(sqrt(n)); ``power``: ceil(n^value); ``fixed``: value."""

    kind: str = "sqrt"
    value: float | None = None

    def __post_init__(self):
        if self.kind not in ("sqrt", "power", "fixed"):
            raise ConfigError(f"unknown k rule {self.kind!r}")
        if self.kind != "sqrt" and self.value is None:
            raise ConfigError(f"k rule {self.kind!r} needs a value")

    def __call__(self, n):
        if self.kind == "sqrt":
            return ceil_sqrt(n)
        if self.kind == "power":
            return max(1, math.ceil(n ** float(self.value)))
        return int(self.value)

    @classmethod
    def parse(cls, text):
        """``"sqrt"``, ``"power:0.5"`` or ``"fixed:64"``."""
        if isinstance(text, KRule):
            return text
        kind, _, value = str(text).partition(":")
        if kind == "sqrt":
            return cls("sqrt")
        try:
            return cls(kind, float(value) if kind == "power" else int(value))
        except ValueError:
            raise ConfigError(f"bad k rule {text!r}") from None

    def __str__(self):
        return self.kind if self.kind == "sqrt" else f"{self.kind}:{self.value}"


@dataclass
class ExperimentConfig:
    space: dict
    n_schedule: list
    k_rule: KRule = field(default_factory=KRule)
    trials: int = 10
    test_size: int = 500
    seed: int = 0
    policy: TieBreak = TieBreak.UNIFORM

    def __post_init__(self):
        self.k_rule = KRule.parse(self.k_rule)
        self.policy = TieBreak.parse(self.policy)
        if self.trials < 1 or self.test_size < 1:
            raise ConfigError("trials and test_size must be >= 1")
        for n in self.n_schedule:
            if not 1 <= self.k_rule(n) <= n:
                raise ConfigError(f"k rule gives k={self.k_rule(n)} for n={n}")


@dataclass
class ErrorCurveRow:
    n: int
    k: int
    trial: int
    empirical_error: float
    bayes_error: float
    aux_name: str
    aux_value: float


@dataclass
class HubRow:
    n: int
    mean_hub_count: float
    stderr: float


@dataclass
class StoneRow:
    k: int
    max_count: int
    mean_count: float


def _predict(space, train, test, k, policy, rng):
    pred = np.empty(len(test), dtype=np.int64)
    radii = np.empty(len(test))
    for t in range(len(test)):
        d = space.distances(train.points, space.point(test.points, t))
        sel = select_from_distances(d, k, policy, rng)
        pred[t] = int(2 * train.labels[sel.indices].sum() >= k)
        radii[t] = sel.radius
    return pred, radii


def _sampler(config):
    _, sampler = build_from_spec(config.space)
    if sampler is None:
        raise ConfigError(f"space family {config.space.get('family')!r} has no sampler")
    return sampler


def run_error_curve(config):
    """Misclassification error on fresh test draws for every (n, trial)."""
    sampler = _sampler(config)
    space = sampler.space
    rows = []
    for n in config.n_schedule:
        k = config.k_rule(n)
        for trial in range(config.trials):
            rng = trial_rng(config.seed, n, trial)
            draw = sampler.draw(rng, n)
            train = LabelledSample(draw.points, draw.labels, config.seed)
            test = sampler.draw(rng, config.test_size)
            pred, radii = _predict(space, train, test, k, config.policy, rng)
            err = float(np.mean(pred != test.labels))
            rows.append(ErrorCurveRow(n, k, trial, err, sampler.bayes_error, "max_radius", float(radii.max())))
        log.info("n=%d: %d trials", n, config.trials)
    return rows


def preiss_resolution(params):
    """Smallest k-NN radius at which the level-K truncation still decides the ball."""
    return math.sqrt((2.0 / 3.0) * 4.0 ** -params.levels)


def run_preiss_inconsistency(config):
    """Error curve on the Preiss measure; ``aux`` is the fraction of class-1
    test points predicted 0."""
    sampler = _sampler(config)
    if not isinstance(sampler, PreissSampler):
        raise ConfigError("run_preiss_inconsistency needs a 'preiss' space")
    space = sampler.space
    floor = preiss_resolution(sampler.params)
    rows = []
    for n in config.n_schedule:
        k = config.k_rule(n)
        for trial in range(config.trials):
            rng = trial_rng(config.seed, n, trial)
            draw = sampler.draw(rng, n)
            train = LabelledSample(draw.points, draw.labels, config.seed)
            test = sampler.draw(rng, config.test_size)
            pred, radii = _predict(space, train, test, k, config.policy, rng)
            ones = test.labels == 1
            # atoms are represented exactly; only balls around Haar points feel the truncation
            if ones.any() and radii[ones].min() < floor:
                raise ResolutionError(
                    f"k-NN radius {radii[ones].min()!r} below level-{sampler.params.levels}"
                    f" resolution {floor!r}; increase K"
                )
            err = float(np.mean(pred != test.labels))
            miss = float(np.mean(pred[ones] == 0)) if ones.any() else math.nan
            rows.append(ErrorCurveRow(n, k, trial, err, 0.0, "class1_predicted_0", miss))
        log.info("n=%d: %d trials", n, config.trials)
    return rows


def _hub_rows(n_max):
    space = HubSpace()
    D = space.pairwise(space.stack(range(1, n_max + 1)))
    np.fill_diagonal(D, np.inf)  # x_i is not its own neighbour
    return D


def hub_indicators(n_max, rng, rows=None):
    """For ``i = 2..n_max``: 1 if ``x_1`` is the uniformly tie-broken nearest
    neighbour of ``x_i`` among the other points of ``x_1..x_n_max``."""
    D = _hub_rows(n_max) if rows is None else rows
    out = np.zeros(n_max + 1, dtype=np.int64)
    for i in range(2, n_max + 1):
        sel = select_from_distances(D[i - 1], 1, TieBreak.UNIFORM, rng)
        out[i] = int(sel.indices[0] == 0)
    return out


def run_hub_growth(n_max, trials, seed):
    """Mean and standard error of ``#{i in 2..n : x_1 in NN(x_i)}`` for ``n = 2..n_max``.

    Nearest neighbours in the hub space never look past later points, so one
    draw over ``x_1..x_n_max`` gives the count for every prefix ``n``.
    """
    if n_max < 2:
        raise DomainError("n_max must be >= 2")
    D = _hub_rows(n_max)
    counts = np.empty((trials, n_max + 1))
    for t in range(trials):
        counts[t] = np.cumsum(hub_indicators(n_max, trial_rng(seed, t), D))
    rows = []
    for n in range(2, n_max + 1):
        c = counts[:, n]
        se = c.std(ddof=1) / math.sqrt(trials) if trials > 1 else 0.0
        rows.append(HubRow(n, float(c.mean()), float(se)))
    return rows


def hub_expected_count(n):
    """Exact expectation by enumerating the tie sets (uniform tie-breaking, k = 1)."""
    space = HubSpace()
    batch = space.stack(range(1, n + 1))
    total = Fraction(0)
    for i in range(2, n + 1):
        others = [j for j in range(1, n + 1) if j != i]
        d = space.distances(space.stack(others), i)
        total += inclusion_probabilities(d, 1)[0]
    return total


def harmonic(m):
    return sum(Fraction(1, i) for i in range(1, m + 1))


STONE_FAMILIES = ("real-line", "simplex")


def _stone_instance(family, n, rng):
    if family == "real-line":
        space = EuclideanSpace(1)
        return space, rng.random((n, 1)), np.array([rng.random()])
    if family == "simplex":
        # n points in total: x plus an (n-1)-point sample, all pairwise at distance 1
        space = DiscreteSpace()
        return space, space.stack(range(1, n)), 0
    raise ConfigError(f"unknown stone family {family!r}; expected one of {STONE_FAMILIES}")


def run_stone_sweep(family, n, k_list, trials, policy, seed):
    """Per ``k``: max and mean of ``stone_count`` over fresh instances.

    Index tie-breaking puts ``x`` first in the substituted sample (the
    adversary's choice); uniform tie-breaking leaves ``x`` at position ``i``.
    """
    policy = TieBreak.parse(policy)
    rows = []
    for k in k_list:
        counts = []
        for t in range(trials):
            rng = trial_rng(seed, k, t)
            space, pts, x = _stone_instance(family, n, rng)
            counts.append(stone_count(pts, space, x, k, policy, rng, x_first=policy is TieBreak.INDEX_ORDER))
        rows.append(StoneRow(k, int(max(counts)), float(np.mean(counts))))
        log.info("k=%d: %d trials", k, trials)
    return rows


@dataclass
class HlRow:
    instance: int
    n: int
    m: int
    alpha: float
    count: int
    bound: float
    ok: int


def _hl_instance(rng, n_max):
    # shallow finite sequences so that balls share points and radii repeat
    space = CantorSpace(list(rng.integers(2, 4, size=4)), depth=4)
    n = int(rng.integers(2, n_max + 1))
    pts = space.sample_points(rng, n)
    D = space.pairwise(pts)
    mask = rng.random(n) < rng.random()
    radii = D[np.arange(n), rng.integers(0, n, size=n)]
    # an open ball of radius 0 is empty and misses its own centre
    closed = (rng.random(n) < 0.5) | (radii == 0)
    balls = [Ball(i, float(radii[i]), bool(closed[i])) for i in range(n)]
    return space, pts, mask, balls


def run_hl_fuzz(instances, alphas, seed, n_max=50):
    """Random ultrametric ball families checked against the counting bound at
    every ``alpha``; each instance is first certified to have no delta=0 witness."""
    if n_max < 2:
        raise ConfigError("n_max must be >= 2")
    rows = []
    for t in range(instances):
        rng = trial_rng(seed, t)
        space, pts, mask, balls = _hl_instance(rng, n_max)
        if nagata_violation_witness(pts, space, 0) is not None:
            raise DomainError(f"instance {t} is not zero-dimensional")
        for a in alphas:
            c = hl_count_check(pts, space, mask, balls, a, 0)
            rows.append(HlRow(t, len(mask), int(mask.sum()), float(a), c.count, c.bound, int(c.ok)))
    return rows


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(rows, path, columns=None):
    """UTF-8, LF-terminated CSV with shortest round-trip float formatting."""
    if columns is None:
        if not rows:
            raise DomainError("empty row list needs explicit columns")
        columns = [f.name for f in fields(rows[0])]
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                rec = asdict(r) if hasattr(r, "__dataclass_fields__") else dict(zip(columns, r))
                w.writerow([_cell(rec[c]) for c in columns])
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc.strerror or exc}") from exc


ERROR_CURVE_COLUMNS = [f.name for f in fields(ErrorCurveRow)]
HUB_COLUMNS = [f.name for f in fields(HubRow)]
STONE_COLUMNS = [f.name for f in fields(StoneRow)]
HL_COLUMNS = [f.name for f in fields(HlRow)]
COVER_HART_COLUMNS = ["n", "k", "max_radius"]
