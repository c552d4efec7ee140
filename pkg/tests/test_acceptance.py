"""End-to-end acceptance checks, one test per criterion, at full stated scale.

``pytest tests/test_acceptance.py`` prints a PASS/FAIL line per criterion in
the terminal summary.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from nagata_knn import experiments as ex
from nagata_knn.cli import ULTRAMETRIC_DEFAULT, main
from nagata_knn.knn import TieBreak, cover_hart_curve
from nagata_knn.nagata import (
    expected_subset_fraction_in_knn,
    merge_fraction_grid,
    nagata_violation_witness,
    stone_count,
    violation_witness_from_distances,
)
from nagata_knn.spaces import (
    CantorSpace,
    DiscreteSpace,
    EuclideanSpace,
    PreissSpace,
    UniformBox,
    build_preiss_params,
    distance,
    l1_witness,
    preiss_domination,
)

from oracles import embedded_distance, harmonic, max_disconnected_multiplicity, random_preiss_pair

LINE = EuclideanSpace(1)
MIXTURE = {"family": "euclidean", "params": {"mixture": {"class0": [0, 1], "class1": [0.9, 1.9], "prior1": 0.5}}}


def mean(rows, attr):
    return float(np.mean([getattr(r, attr) for r in rows]))


def test_01_euclidean_consistency():
    t = time.perf_counter()
    cfg = ex.ExperimentConfig(MIXTURE, [10_000], "sqrt", trials=10, test_size=500, seed=101)
    rows = ex.run_error_curve(cfg)
    elapsed = time.perf_counter() - t
    assert rows[0].bayes_error == pytest.approx(0.05)
    assert rows[0].k == 100
    assert abs(mean(rows, "empirical_error") - 0.05) <= 0.05
    assert elapsed < 60


def test_02_ultrametric_consistency():
    cfg = ex.ExperimentConfig(ULTRAMETRIC_DEFAULT, [10_000], "sqrt", trials=10, test_size=500, seed=102)
    rows = ex.run_error_curve(cfg)
    bayes = rows[0].bayes_error
    assert bayes == pytest.approx(0.25)
    assert abs(mean(rows, "empirical_error") - bayes) <= 0.05


def test_03_preiss_inconsistency():
    t = time.perf_counter()
    cfg = ex.ExperimentConfig({"family": "preiss", "params": {"levels": 12}}, [4096], "fixed:64", trials=10, test_size=500, seed=103)
    rows = ex.run_preiss_inconsistency(cfg)
    elapsed = time.perf_counter() - t
    Z = build_preiss_params(12).normalizer
    assert all(r.bayes_error == 0.0 for r in rows)
    assert mean(rows, "empirical_error") >= 0.5 / Z
    assert mean(rows, "aux_value") >= 0.9
    assert elapsed < 300


def test_04_harmonic_hub_growth():
    assert ex.hub_expected_count(2) == 1
    assert ex.hub_expected_count(3) == Fraction(3, 2)
    rows = {r.n: r for r in ex.run_hub_growth(100, 2000, seed=104)}
    assert rows[2].mean_hub_count == 1.0
    target = float(harmonic(99))
    assert target == pytest.approx(5.177, abs=1e-3)
    assert abs(rows[100].mean_hub_count - target) <= 3 * rows[100].stderr


def test_05_stone_bound_real_line():
    g = np.random.default_rng(105)
    configs = 0
    while configs < 1000:
        pts = g.random((200, 1))
        x = g.random(1)
        allpts = np.vstack([x[None, :], pts])
        D = LINE.pairwise(allpts)
        vals = D[np.triu_indices(201, 1)]
        if len(np.unique(vals)) != len(vals):
            continue
        configs += 1
        for k in (1, 5, 25):
            assert stone_count(pts, LINE, x, k, TieBreak.INDEX_ORDER) <= 2 * k


def test_06_adversarial_ties_on_simplex():
    rows = ex.run_stone_sweep("simplex", 50, [1], 5, "index", seed=106)
    assert rows[0].max_count == 49
    sp = DiscreteSpace()
    pts = sp.stack(range(1, 50))
    g = np.random.default_rng(106)
    c = np.array([stone_count(pts, sp, 0, 1, TieBreak.UNIFORM, g) for _ in range(2000)])
    assert abs(c.mean() - 1) <= 3 * c.std(ddof=1) / math.sqrt(len(c))


def test_07_witness_search_correctness():
    g = np.random.default_rng(107)
    for _ in range(100):
        sp = CantorSpace(list(g.integers(2, 5, size=3)), tail=2, depth=int(g.integers(2, 7)))
        pts = sp.sample_points(g, int(g.integers(2, 31)))
        D = sp.pairwise(pts)
        for s in sorted(set(D.ravel().tolist())) + [math.inf]:
            assert violation_witness_from_distances(D, 0, s) is None
        assert nagata_violation_witness(pts, sp, 0) is None
    w = nagata_violation_witness(np.array([[-1.0], [0.0], [1.0]]), LINE, 0)
    assert w is not None and w.center == 1 and set(w.members) == {0, 2}
    for _ in range(100):
        pts = g.normal(size=(int(g.integers(2, 21)), 1))
        assert nagata_violation_witness(pts, LINE, 1) is None


def test_08_witness_absence_equals_disconnected_multiplicity_bound():
    g = np.random.default_rng(108)
    checked = 0
    for inst in range(50):
        n = int(g.integers(2, 13))
        if inst % 2:
            sp = CantorSpace(list(g.integers(2, 4, size=2)), tail=2, depth=4)
            D = sp.pairwise(sp.sample_points(g, n))
        else:
            D = LINE.pairwise(g.integers(0, 20, size=(n, 1)).astype(float))
        for s in [math.inf, float(g.choice(D.ravel()[D.ravel() > 0])) if (D > 0).any() else math.inf]:
            m = max_disconnected_multiplicity(D, s)
            for delta in range(3):
                assert (violation_witness_from_distances(D, delta, s) is None) == (m <= delta + 1)
                checked += 1
    assert checked == 300


def test_09_counting_bound_fuzz():
    rows = ex.run_hl_fuzz(10_000, [0.1, 0.3, 0.5, 1.0], seed=109, n_max=50)
    assert len(rows) == 40_000
    assert max(r.n for r in rows) <= 50
    bad = [r for r in rows if not r.ok]
    assert not bad, bad[:5]


def test_10_merge_inequality_grid():
    premise, holding = merge_fraction_grid(20)
    assert premise > 0
    assert holding == premise


def _premises_hold(d, mask, k, alpha):
    r = np.partition(d, k - 1)[k - 1]
    closed, opened = d <= r, d < r
    a = Fraction(alpha)
    return (mask & closed).sum() <= a * closed.sum() and (mask & opened).sum() <= a * opened.sum()


def test_11_expected_tie_fraction():
    g = np.random.default_rng(111)
    alpha = 0.3
    done = 0
    while done < 1000:
        n = int(g.integers(5, 40))
        pts = g.integers(0, 6, size=(n, 1)).astype(float)
        x = np.array([float(g.integers(0, 6))])
        mask = g.random(n) < g.random() * 0.6
        k = int(g.integers(1, n + 1))
        d = LINE.distances(pts, x)
        if not _premises_hold(d, mask, k, alpha):
            continue
        done += 1
        est = expected_subset_fraction_in_knn(pts, LINE, mask, x, k, 10_000, g)
        # 1e-12 absorbs float rounding of a mean that equals alpha exactly
        assert est.mean <= alpha + 3 * est.stderr + 1e-12


def test_12_cover_hart_radius():
    test = np.linspace(0, 1, 100)[:, None]
    curve = dict(cover_hart_curve(UniformBox(1), ex.KRule("sqrt"), [100, 10_000], test, np.random.default_rng(112)))
    assert curve[10_000] < 0.05
    assert curve[10_000] < curve[100]


def test_13_preiss_closed_forms_and_domination():
    params = build_preiss_params(12)
    sp = PreissSpace(params)
    g = np.random.default_rng(113)
    worst = 0.0
    for _ in range(1000):
        p, q = random_preiss_pair(sp, g)
        worst = max(worst, abs(distance(sp, p, q) - embedded_distance(sp, p, q)))
    assert worst < 1e-9
    ratios = [r for r, _ in preiss_domination(params)]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))


def test_14_l1_sum_unbounded_multiplicity():
    space, z, zs = l1_witness(Fraction(9, 10), Fraction(2, 5), 50)
    d = space.distance
    for a, b in itertools.combinations(zs, 2):
        assert d(a, b) > max(d(a, z), d(b, z))


CSV_COMMANDS = [
    ["consistency", "--n", "200,800", "--trials", "2", "--test-size", "100"],
    ["consistency", "--space", "ultrametric", "--n", "300", "--trials", "2", "--test-size", "50"],
    ["preiss", "--levels", "8", "--n", "512", "--k-rule", "fixed:16", "--trials", "2", "--test-size", "100"],
    ["hub", "--n", "40", "--trials", "200"],
    ["stone", "--family", "real-line", "--n", "100", "--k", "1,5", "--trials", "30"],
    ["stone", "--family", "simplex", "--n", "30", "--k", "1", "--trials", "30", "--policy", "uniform"],
    ["hl-check", "--instances", "100"],
    ["cover-hart", "--n", "100,1000"],
]


def test_15_csv_reruns_are_byte_identical(tmp_path):
    for i, cmd in enumerate(CSV_COMMANDS):
        outs = []
        for rep in range(2):
            out = tmp_path / f"{i}_{rep}.csv"
            assert main(cmd + ["--seed", "115", "--out", str(out)]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1], cmd[0]
        assert outs[0].endswith(b"\n") and b"\r" not in outs[0]
