import itertools
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nagata_knn.errors import DomainError
from nagata_knn.experiments import KRule
from nagata_knn.knn import (
    LabelledSample,
    TieBreak,
    ceil_sqrt,
    classify,
    cover_hart_curve,
    empirical_regression,
    inclusion_probabilities,
    knn_radius,
    knn_select,
    select_from_distances,
)
from nagata_knn.spaces import EuclideanSpace, HubSpace, UniformBox

LINE = EuclideanSpace(1)


def line_sample(dists, labels=None):
    pts = np.asarray(dists, dtype=float)[:, None]
    return LabelledSample(pts, labels if labels is not None else np.zeros(len(pts), dtype=int))


def test_radius_is_kth_order_statistic():
    s = line_sample([0.1, 0.2, 0.2, 0.5])
    assert knn_radius(s, LINE, np.array([0.0]), 3) == 0.2
    assert knn_radius(s, LINE, np.array([0.5]), 1) == 0.0


def test_radius_in_hub_space():
    sp = HubSpace()
    pts = sp.stack(range(2, 7))
    assert list(sp.distances(pts, 1)) == [1, 4, 8, 16, 32]
    assert knn_radius(pts, sp, 1, 2) == 4


def test_radius_errors():
    s = line_sample([0.1, 0.2])
    with pytest.raises(DomainError):
        knn_radius(s, LINE, np.array([0.0]), 3)
    with pytest.raises(DomainError):
        knn_radius(s, LINE, np.array([0.0]), 0)
    with pytest.raises(DomainError):
        knn_radius(line_sample([]), LINE, np.array([0.0]), 1)


def test_no_ties_policy_free():
    d = np.array([0.5, 0.1, 0.9, 0.3, 0.7])
    for policy in TieBreak:
        sel = select_from_distances(d, 3, policy, np.random.default_rng(0))
        assert sorted(sel.indices) == [0, 1, 3]
        assert sel.sphere_tie_count == 1 and sel.open_ball_count == 2


def test_index_order_takes_smallest_sphere_indices():
    d = np.array([1.0, 2, 2, 0.5, 2, 2, 2])
    sel = select_from_distances(d, 3, TieBreak.INDEX_ORDER)
    assert sel.indices.tolist() == [0, 3, 1]


def test_index_order_exact_selection():
    # 5 sphere points at distance 2 tying for 2 slots
    d = np.array([2.0, 1, 2, 2, 3, 2, 2])
    sel = select_from_distances(d, 3, TieBreak.INDEX_ORDER)
    assert sorted(sel.indices.tolist()) == [0, 1, 2]
    assert sel.sphere_tie_count == 5 and sel.open_ball_count == 1 and sel.radius == 2


def test_uniform_sphere_marginals_chi_square():
    from scipy.stats import chisquare

    d = np.array([2.0, 1, 2, 2, 3, 2, 2])
    sphere = [0, 2, 3, 5, 6]
    g = np.random.default_rng(8)
    counts = Counter()
    for _ in range(10_000):
        counts.update(select_from_distances(d, 3, TieBreak.UNIFORM, g).indices.tolist())
    assert counts[1] == 10_000 and counts[4] == 0
    obs = [counts[i] for i in sphere]
    assert sum(obs) == 20_000
    # each sphere point is chosen with probability 2/5
    assert chisquare(obs, [4000] * 5).pvalue > 1e-3
    assert inclusion_probabilities(d, 3) == [Fraction(2, 5), 1, Fraction(2, 5), Fraction(2, 5), 0, Fraction(2, 5), Fraction(2, 5)]


def test_uniform_subsets_are_uniform():
    from scipy.stats import chisquare

    d = np.array([1.0, 1, 1, 1])
    g = np.random.default_rng(9)
    c = Counter(tuple(select_from_distances(d, 2, TieBreak.UNIFORM, g).indices) for _ in range(6000))
    assert set(c) == set(itertools.combinations(range(4), 2))
    assert chisquare(list(c.values())).pvalue > 1e-3


def test_uniform_needs_rng():
    with pytest.raises(DomainError):
        select_from_distances(np.array([1.0, 1.0]), 1, TieBreak.UNIFORM, None)
    with pytest.raises(DomainError):
        TieBreak.parse("coin-flip")
    assert TieBreak.parse("INDEX") is TieBreak.INDEX_ORDER


def test_regression_examples():
    s = line_sample([0.1, 0.2, 0.3, 0.4, 0.9], [1, 1, 1, 1, 0])
    assert empirical_regression(s, LINE, np.array([0.0]), 4, TieBreak.INDEX_ORDER) == 1.0
    s = line_sample([0.1, 0.2, 0.3, 0.4], [1, 0, 1, 0])
    assert empirical_regression(s, LINE, np.array([0.0]), 4, TieBreak.INDEX_ORDER) == 0.5


def test_regression_expectation_seven_ninths():
    # open ball: two points labelled 1; sphere: three points labelled 1, 0, 0 for one slot
    dists = [0.1, 0.2, 1.0, 1.0, 1.0]
    labels = np.array([1, 1, 1, 0, 0])
    probs = inclusion_probabilities(np.array(dists), 3)
    exact = sum(p * int(l) for p, l in zip(probs, labels)) / 3
    assert exact == Fraction(7, 9)
    # enumeration of the three equally likely fills
    enum = sum(Fraction(2 + int(labels[j]), 3) for j in (2, 3, 4)) / 3
    assert enum == Fraction(7, 9)
    s = line_sample(dists, labels)
    g = np.random.default_rng(5)
    vals = [empirical_regression(s, LINE, np.array([0.0]), 3, TieBreak.UNIFORM, g) for _ in range(9000)]
    assert abs(np.mean(vals) - 7 / 9) < 3 * np.std(vals) / np.sqrt(len(vals)) + 1e-12


def test_classify_voting_tie_goes_to_one():
    s = line_sample([0.1, 0.2, 0.3, 0.4], [1, 0, 1, 0])
    assert classify(s, LINE, np.array([0.0]), 4, TieBreak.INDEX_ORDER) == 1
    s = line_sample(np.arange(1, 101) / 100, [1] * 49 + [0] * 51)
    assert classify(s, LINE, np.array([0.0]), 100, TieBreak.INDEX_ORDER) == 0
    s = line_sample([0.1, 0.2, 0.3, 0.4], [1, 1, 1, 0])
    assert classify(s, LINE, np.array([0.0]), 4, TieBreak.INDEX_ORDER) == 1


def test_classify_recovers_bayes_label_when_regression_is_pinned(rng):
    # every neighbour has eta = 0.8 or 0.2 on its side; with many neighbours the vote follows eta
    x = rng.random(2000)
    eta = np.where(x < 0.5, 0.2, 0.8)
    labels = (rng.random(2000) < eta).astype(int)
    s = LabelledSample(x[:, None], labels)
    for q, bayes in [(0.1, 0), (0.3, 0), (0.7, 1), (0.9, 1)]:
        assert classify(s, LINE, np.array([q]), 101, TieBreak.UNIFORM, rng) == bayes


# --- properties --------------------------------------------------------------------


tie_heavy = st.lists(st.integers(0, 5), min_size=1, max_size=25)


@settings(max_examples=300, deadline=None)
@given(d=tie_heavy, data=st.data())
def test_selection_invariants(d, data):
    d = np.array(d, dtype=float)
    n = len(d)
    k = data.draw(st.integers(1, n))
    seed = data.draw(st.integers(0, 2**32))
    r = knn_radius(d[:, None], LINE, np.array([0.0]), k)
    for policy in TieBreak:
        sel = select_from_distances(d, k, policy, np.random.default_rng(seed))
        idx = sel.indices
        assert len(idx) == k and len(set(idx.tolist())) == k
        assert sel.radius == r
        assert set(np.flatnonzero(d < r)) <= set(idx.tolist())
        assert sel.open_ball_count <= k <= sel.open_ball_count + sel.sphere_tie_count
        assert d[idx].max() == r
        assert np.all(d[idx] <= r)


@settings(max_examples=200, deadline=None)
@given(d=st.lists(st.floats(0, 1e6, allow_nan=False), min_size=1, max_size=30, unique=True), data=st.data())
def test_policies_agree_without_ties(d, data):
    d = np.array(d)
    k = data.draw(st.integers(1, len(d)))
    a = select_from_distances(d, k, TieBreak.INDEX_ORDER)
    b = select_from_distances(d, k, TieBreak.UNIFORM, np.random.default_rng(0))
    assert sorted(a.indices.tolist()) == sorted(b.indices.tolist())


@settings(max_examples=100, deadline=None)
@given(d=tie_heavy, data=st.data())
def test_inclusion_probabilities_permutation_equivariant(d, data):
    d = np.array(d, dtype=float)
    k = data.draw(st.integers(1, len(d)))
    perm = np.array(data.draw(st.permutations(range(len(d)))))
    p = inclusion_probabilities(d, k)
    q = inclusion_probabilities(d[perm], k)
    assert [p[i] for i in perm] == q
    assert sum(p) == k


def test_uniform_selection_permutation_equivariant():
    from scipy.stats import chi2_contingency

    # point identities (values) with ties; compare selected multisets before/after reordering
    vals = np.array([0.0, 1.0, 1.0, 1.0, 2.0, 2.0])
    ids = np.arange(6)
    perm = np.array([5, 3, 0, 4, 1, 2])
    g = np.random.default_rng(17)

    def counts(order):
        c = Counter()
        for _ in range(6000):
            sel = select_from_distances(vals[order], 2, TieBreak.UNIFORM, g)
            c[tuple(sorted(ids[order][sel.indices]))] += 1
        return c

    a, b = counts(ids), counts(perm)
    keys = sorted(set(a) | set(b))
    assert chi2_contingency([[a[k] for k in keys], [b[k] for k in keys]]).pvalue > 1e-3


# --- Cover-Hart ------------------------------------------------------------------------


def test_cover_hart_small_n_equals_k():
    s = UniformBox(1)
    test = np.array([[0.0], [1.0]])
    curve = cover_hart_curve(s, KRule("fixed", 50), [50], test, np.random.default_rng(0))
    assert curve[0][1] > 0.9


def test_cover_hart_reproducible_and_checks_k():
    s = UniformBox(1)
    test = np.linspace(0, 1, 20)[:, None]
    a = cover_hart_curve(s, KRule(), [100, 400], test, np.random.default_rng(1))
    b = cover_hart_curve(s, KRule(), [100, 400], test, np.random.default_rng(1))
    assert a == b
    with pytest.raises(DomainError):
        cover_hart_curve(s, KRule("fixed", 10), [5], test, np.random.default_rng(1))


def test_ceil_sqrt():
    assert [ceil_sqrt(n) for n in (1, 2, 4, 5, 100, 101, 10_000)] == [1, 2, 2, 3, 10, 11, 100]
