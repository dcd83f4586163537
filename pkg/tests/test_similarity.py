import itertools
import json

import numpy as np
import pytest
from scipy.stats import norm

from urllc_puncture.constellation import SUPPORTED_ORDERS, build_constellation, db_to_linear
from urllc_puncture.similarity import (
    EpsilonPolicy,
    Similarity,
    boundary_distance,
    build_similarity_map,
    check_mapper,
    classify_pair,
    eta,
    match_probability,
)

PAIRS = [(n, m) for n in SUPPORTED_ORDERS for m in SUPPORTED_ORDERS]


def _idx(label):
    return int(label, 2)


@pytest.mark.parametrize("n,m", PAIRS)
def test_regions_partition_and_nearest(n, m):
    s = build_similarity_map(n, m)
    lo, hi = min(n, m), max(n, m)
    members = sorted(j for r in s.regions for j in r)
    assert members == list(range(hi))
    assert len(s.regions) == lo
    assert all(len(r) == hi // lo for r in s.regions)
    low, high = build_constellation(lo), build_constellation(hi)
    for i, r in enumerate(s.regions):
        for j in r:
            d = np.abs(high.points[j] - low.points)
            assert d[i] == pytest.approx(d.min(), abs=1e-12)
        assert set(s.enhanced[i]) <= set(r)
    assert np.all(s.distances >= 0)


def test_2_2_regions_absolute():
    s = build_similarity_map(2, 2)
    assert s.regions == ((0,), (1,))
    assert classify_pair(s, 0, 0) is Similarity.ABSOLUTE


def test_2_16_region_and_enhanced_set():
    s = build_similarity_map(2, 16)
    assert s.regions[0] == tuple(_idx(f"0{k:03b}") for k in range(8))
    assert set(s.enhanced[0]) == {_idx(x) for x in ("0000", "0010", "0011", "0001")}
    for lab in ("0000", "0010", "0011", "0001"):
        assert classify_pair(s, 0, _idx(lab)) in (Similarity.ABSOLUTE, Similarity.STRONG)


def test_0111_weakly_similar_against_gaussian_tail_oracle():
    s = build_similarity_map(2, 16, EpsilonPolicy(1e-3, float(db_to_linear(10.0))))
    g = float(db_to_linear(10.0))
    p = build_constellation(16).points[_idx("0111")]
    # BPSK symbol 0 errs when the real part crosses zero
    p_member = norm.sf(p.real * np.sqrt(2 * g))
    p_anchor = norm.sf(np.sqrt(2 * g))
    assert p_anchor - p_member < -1e-3
    assert classify_pair(s, 0, _idx("0111")) is Similarity.WEAK


def test_2_4_regions_match_brute_force():
    s = build_similarity_map(2, 4)
    q, b = build_constellation(4), build_constellation(2)
    brute = [int(np.argmin(np.abs(p - b.points))) for p in q.points]
    assert list(s.region_of_embb) == brute
    assert s.regions == ((0, 1), (2, 3))


def test_classify_rejects_foreign_symbol():
    s = build_similarity_map(2, 16)
    with pytest.raises(ValueError):
        classify_pair(s, 0, _idx("1000"))


def test_eta_examples():
    assert eta(build_similarity_map(2, 2)) == 0.5
    assert eta(build_similarity_map(2, 4)) == 0.5
    s = build_similarity_map(4, 4)
    brute = np.mean([s.region_of_urllc[u] == s.region_of_embb[e] for u, e in itertools.product(range(4), range(4))])
    assert eta(s) == brute == 0.25


def test_eta_rejects_bad_priors():
    s = build_similarity_map(2, 4)
    with pytest.raises(ValueError):
        eta(s, [0.6, 0.6])
    assert eta(s, [1.0, 0.0], [0.5, 0.5, 0.0, 0.0]) == 1.0


def test_boundary_distances():
    assert boundary_distance(build_similarity_map(2, 2), 0, 0) == 1.0
    s = build_similarity_map(2, 4)
    assert boundary_distance(s, 0, 0) == pytest.approx(1 / np.sqrt(2))
    s16 = build_similarity_map(2, 16)
    pts = build_constellation(16).points
    # BPSK boundary is the imaginary axis
    assert np.allclose(s16.distances[0], np.abs(pts.real))
    assert np.allclose(s16.distances[1], np.abs(pts.real))


def test_match_probability_per_mapper():
    assert match_probability(build_similarity_map(2, 4), "srm") == 0.5
    assert match_probability(build_similarity_map(2, 4), "esrm") == 0.5
    assert match_probability(build_similarity_map(2, 16), "esrm") == 0.25
    assert match_probability(build_similarity_map(2, 64), "esrm") == 0.25


def test_check_mapper():
    check_mapper(2, 2, "srm")
    with pytest.raises(ValueError):
        check_mapper(4, 2, "esrm")
    with pytest.raises(ValueError):
        check_mapper(2, 4, "magic")


def test_enhanced_monotone_in_epsilon():
    prev = None
    for e in (0.0, 1e-4, 1e-3, 1e-2, 0.1, 1.0):
        s = build_similarity_map(2, 64, EpsilonPolicy(e))
        cur = [set(r) for r in s.enhanced]
        if prev is not None:
            assert all(a <= b for a, b in zip(prev, cur))
        prev = cur
    assert [set(r) for r in build_similarity_map(2, 64, EpsilonPolicy(1.0)).enhanced] == \
        [set(r) for r in build_similarity_map(2, 64).regions]


def test_dump_round_trip():
    d = json.loads(build_similarity_map(2, 16).dumps())
    assert d["regions"][0]["mapping_symbols"][:2] == ["0000", "0001"]
    assert len(d["distances"]) == 2 and len(d["distances"][0]) == 16
