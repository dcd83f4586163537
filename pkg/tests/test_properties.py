import numpy as np
from hypothesis import given, settings, strategies as st

from urllc_puncture import analytic as an
from urllc_puncture.constellation import SUPPORTED_ORDERS, build_constellation, channel_ser, ml_detect
from urllc_puncture.scheduler import SearchSpace, segmented_search, similarity_search
from urllc_puncture.similarity import EpsilonPolicy, Similarity, build_similarity_map, classify_pair

orders = st.sampled_from(SUPPORTED_ORDERS)
gammas = st.floats(0.0, 1e6, allow_nan=False)
etas = st.floats(0.0, 1.0)


@given(orders, st.floats(-3, 3), st.floats(-3, 3))
def test_ml_detect_is_nearest_point(order, re, im):
    c = build_constellation(order)
    y = complex(re, im)
    k = ml_detect(c, y)
    d = np.abs(c.points - y)
    assert d[k] <= d.min() + 1e-12


@given(orders, gammas, gammas)
def test_channel_ser_monotone_in_snr(order, g1, g2):
    lo, hi = sorted((g1, g2))
    for ch in ("awgn", "rayleigh"):
        assert 0.0 <= channel_ser(order, hi, ch) <= channel_ser(order, lo, ch) + 1e-15 <= 1.0 + 1e-15


@given(gammas)
def test_channel_ser_monotone_in_order(g):
    for ch in ("awgn", "rayleigh"):
        sers = [channel_ser(m, g, ch) for m in (4, 16, 64)]
        assert sers == sorted(sers)


@given(orders, orders, st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_enhanced_sets_grow_with_epsilon(n, m, e1, e2):
    lo, hi = sorted((e1, e2))
    a = build_similarity_map(n, m, EpsilonPolicy(lo)).enhanced
    b = build_similarity_map(n, m, EpsilonPolicy(hi)).enhanced
    assert all(set(x) <= set(y) for x, y in zip(a, b))


@given(orders, orders)
def test_anchor_is_absolutely_similar_to_itself(n, m):
    if n != m:
        return
    s = build_similarity_map(n, m)
    for i in range(n):
        assert classify_pair(s, i, i) is Similarity.ABSOLUTE


@given(st.integers(1, 48), etas, st.integers(1, 3000))
def test_expected_similarity_bounds(zeta, eta, K):
    u = an.expected_similarity(zeta, zeta, 0, eta, candidates=K)
    assert zeta * eta - 1e-9 <= u <= zeta + 1e-9


@given(st.integers(1, 48), etas, st.integers(1, 2000), st.integers(1, 2000))
def test_expected_similarity_monotone_in_candidates(zeta, eta, k1, k2):
    lo, hi = sorted((k1, k2))
    assert an.expected_similarity(zeta, zeta, 0, eta, candidates=lo) <= \
        an.expected_similarity(zeta, zeta, 0, eta, candidates=hi) + 1e-9


@given(st.integers(1, 47), etas, st.integers(1, 2000))
def test_normalised_similarity_shrinks_with_block_size(zeta, eta, K):
    a = an.expected_similarity(zeta, zeta, 0, eta, candidates=K) / zeta
    b = an.expected_similarity(zeta + 1, zeta + 1, 0, eta, candidates=K) / (zeta + 1)
    assert b <= a + 1e-9


profiles = st.builds(
    lambda m, frac, K, zeta: an.LoadProfile(2400, {m: 1.0}, {(2, m): frac * 2400}, zeta, K),
    st.sampled_from((2, 4, 16, 64)), st.floats(0.0, 0.5), st.integers(1, 1500), st.sampled_from((12, 24, 48)),
)


@settings(max_examples=60, deadline=None)
@given(profiles, st.floats(0.0, 1e5), st.sampled_from(("urllc", "srm", "esrm")))
def test_embb_ser_sandwich(prof, g, mapper):
    m = next(iter(prof.p))
    ser = an.embb_ser(prof, g, mapper)
    assert channel_ser(m, g) - 1e-12 <= ser <= an.embb_ser(prof, g, mapper, eta=0.0) + 1e-12
    assert 0.0 <= ser <= 1.0


@settings(max_examples=60, deadline=None)
@given(profiles, st.floats(0.0, 1e5), st.sampled_from(("urllc", "srm", "esrm")))
def test_generalized_loss_below_linear(prof, g, mapper):
    assert an.embb_loss(prof, g, mapper) <= an.embb_loss(prof, g, model="linear") + 1e-12


@settings(max_examples=60, deadline=None)
@given(profiles, st.floats(0.0, 1e5))
def test_eta_zero_degenerates_to_single_rate(prof, g):
    split = an.embb_ser(prof, g, "urllc", eta=0.0)
    total = an.embb_ser_total_probability(prof, g, lambda n, m: an.ser_effective(n, m, g, mapper="urllc"))
    assert split == total or abs(split - total) <= 1e-15


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([(2, 2), (2, 4), (2, 16), (4, 16), (2, 64)]), st.sampled_from(("urllc", "srm", "esrm")),
       st.integers(1, 30), st.integers(1, 40), st.integers(0, 2 ** 32 - 1))
def test_search_equals_exhaustive_recount(pair, mapper, zeta, K, seed):
    n, m = pair
    s = build_similarity_map(n, m)
    rng = np.random.default_rng(seed)
    u = rng.integers(n, size=zeta)
    c = rng.integers(m, size=(K, zeta))
    table = s.match_table(mapper)
    counts = [sum(bool(table[u[t], c[k, t]]) for t in range(zeta)) for k in range(K)]
    plan = similarity_search(u, c, s, mapper)
    assert plan.similarity_count == max(counts)
    assert plan.selected_index == counts.index(max(counts))
    assert plan.comparisons == K * zeta


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2 ** 32 - 1))
def test_segmented_indices_strictly_increase(Z, seed):
    rng = np.random.default_rng(seed)
    K = int(rng.integers(Z, 60))
    s = build_similarity_map(2, 4)
    plans = segmented_search(rng.integers(2, size=(Z, 8)), rng.integers(4, size=(K, 8)), SearchSpace.even(K, Z), s)
    idx = [p.selected_index for p in plans]
    assert all(a < b for a, b in zip(idx, idx[1:]))
    assert all(0 <= i < K for i in idx)
