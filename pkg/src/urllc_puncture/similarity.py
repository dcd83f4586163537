"""Similarity regions between a URLLC constellation and an eMBB constellation.

The lower-order constellation anchors the regions: every point of the
higher-order constellation joins the region of its nearest lower-order point.
Within a region, mapping symbols whose error probability at the anchor's
receiver is within ``epsilon`` of the anchor's own form the enhanced region.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from .constellation import (
    Constellation,
    SnrPoint,
    as_gamma,
    build_constellation,
    db_to_linear,
    decision_matrix,
)

MAPPERS = ("urllc", "srm", "esrm")


class Similarity(str, Enum):
    ABSOLUTE = "absolute"
    STRONG = "strong"
    WEAK = "weak"


@dataclass(frozen=True)
class EpsilonPolicy:
    epsilon: float = 1e-3
    reference_snr: float = float(db_to_linear(10.0))

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        object.__setattr__(self, "reference_snr", as_gamma(self.reference_snr))


DEFAULT_POLICY = EpsilonPolicy()


@dataclass(frozen=True, eq=False)
class SimilarityMap:
    n: int
    m: int
    policy: EpsilonPolicy
    # region_of_urllc[u] / region_of_embb[e]: index of the anchoring low-order point
    region_of_urllc: np.ndarray
    region_of_embb: np.ndarray
    # per region: high-order member indices, and the enhanced subset
    regions: tuple[tuple[int, ...], ...]
    enhanced: tuple[tuple[int, ...], ...]
    # distances[i, j]: high-order point j to the decision boundary of low-order point i
    distances: np.ndarray
    self_distances: np.ndarray
    # probability gap P(err | anchor sent) - P(err | member sent), per high-order point
    gap: np.ndarray = field(repr=False)

    @property
    def low(self) -> Constellation:
        return build_constellation(min(self.n, self.m))

    @property
    def high(self) -> Constellation:
        return build_constellation(max(self.n, self.m))

    @property
    def urllc_is_low(self) -> bool:
        return self.n <= self.m

    def region_members(self, i: int) -> tuple[int, ...]:
        return self.regions[i]

    def same_region(self, u, e):
        return self.region_of_urllc[u] == self.region_of_embb[e]

    def in_enhanced(self, u, e):
        """eMBB symbol ``e`` lies in the enhanced region anchored by URLLC symbol ``u``."""
        if self.n > self.m:
            raise ValueError("enhanced regions apply only when the URLLC order is the lower one")
        return (self.region_of_embb[e] == u) & self._enh_flag[e]

    @property
    def _enh_flag(self) -> np.ndarray:
        flag = np.zeros(self.high.order, dtype=bool)
        for members in self.enhanced:
            flag[list(members)] = True
        return flag

    def match_table(self, mapper: str) -> np.ndarray:
        """Boolean ``(n, m)`` table of the pairs the search counts as similar.

        The ESRM counts only pairs it would actually keep; every other mapper
        counts shared similarity regions.
        """
        check_mapper(self.n, self.m, mapper)
        u = np.arange(self.n)[:, None]
        e = np.arange(self.m)[None, :]
        if mapper == "esrm" and self.n < self.m:
            return np.asarray(self.in_enhanced(u, e))
        return np.asarray(self.same_region(u, e))

    def to_dict(self) -> dict:
        low, high = self.low, self.high
        return {
            "n": self.n,
            "m": self.m,
            "epsilon": self.policy.epsilon,
            "reference_snr_db": float(SnrPoint(self.policy.reference_snr).db),
            "regions": [
                {
                    "index_symbol": low.labels[i],
                    "mapping_symbols": [high.labels[j] for j in self.regions[i]],
                    "enhanced": [high.labels[j] for j in self.enhanced[i]],
                    "self_distance": float(self.self_distances[i]),
                }
                for i in range(low.order)
            ],
            "distances": np.round(self.distances, 12).tolist(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def check_mapper(n: int, m: int, mapper: str) -> None:
    if mapper not in MAPPERS:
        raise ValueError(f"unknown mapper {mapper!r}; expected one of {MAPPERS}")
    if mapper != "urllc" and n > m:
        raise ValueError(f"{mapper} needs a URLLC order no higher than the eMBB order (n={n}, m={m})")


def boundary_distance_to_cell(p: complex, cell) -> float:
    """Distance from ``p`` to the boundary of an axis-aligned rectangle."""
    i_lo, i_hi, q_lo, q_hi = cell
    x, y = p.real, p.imag
    if i_lo <= x <= i_hi and q_lo <= y <= q_hi:
        return float(min(x - i_lo, i_hi - x, y - q_lo, q_hi - y))
    dx = max(i_lo - x, 0.0, x - i_hi)
    dy = max(q_lo - y, 0.0, y - q_hi)
    return float(np.hypot(dx, dy))


@lru_cache(maxsize=None)
def _build(n: int, m: int, policy: EpsilonPolicy) -> SimilarityMap:
    c_u = build_constellation(n)
    c_e = build_constellation(m)
    low, high = (c_u, c_e) if n <= m else (c_e, c_u)

    d2 = np.abs(high.points[:, None] - low.points[None, :]) ** 2
    # argmin keeps the lowest low-order index on exact ties
    region_high = np.argmin(np.round(d2, 12), axis=1)
    region_low = np.arange(low.order)
    regions = tuple(tuple(int(j) for j in np.flatnonzero(region_high == i)) for i in range(low.order))

    cells = low.cells()
    distances = np.array([[boundary_distance_to_cell(p, cells[i]) for p in high.points]
                          for i in range(low.order)])
    self_distances = np.array([boundary_distance_to_cell(low.points[i], cells[i]) for i in range(low.order)])

    # boundary gap under AWGN at the reference SNR, seen by the low-order receiver
    p_anchor = decision_matrix(low, low.points, policy.reference_snr, "awgn")
    p_member = decision_matrix(low, high.points, policy.reference_snr, "awgn")
    err_anchor = 1.0 - p_anchor[region_high, region_high]
    err_member = 1.0 - p_member[np.arange(high.order), region_high]
    gap = err_anchor - err_member
    enhanced = tuple(tuple(j for j in members if gap[j] >= -policy.epsilon) for members in regions)

    if n <= m:
        r_u, r_e = region_low, region_high
    else:
        r_u, r_e = region_high, region_low
    for a in (r_u, r_e, distances, self_distances, gap):
        a.setflags(write=False)
    return SimilarityMap(n, m, policy, r_u, r_e, regions, enhanced, distances, self_distances, gap)


def build_similarity_map(n: int, m: int, policy: EpsilonPolicy | None = None) -> SimilarityMap:
    build_constellation(n), build_constellation(m)  # validates orders
    return _build(n, m, policy or DEFAULT_POLICY)


def classify_pair(smap: SimilarityMap, region_symbol: int, mapping_symbol: int,
                  policy: EpsilonPolicy | None = None) -> Similarity:
    """Absolute / strong / weak similarity of a mapping symbol to its anchor.

    ``region_symbol`` indexes the low-order constellation and
    ``mapping_symbol`` the high-order one.  For ``n == m`` the two coincide.
    """
    pol = policy or smap.policy
    high_region = smap.region_of_embb if smap.urllc_is_low else smap.region_of_urllc
    if high_region[mapping_symbol] != region_symbol:
        raise ValueError(f"symbol {mapping_symbol} is not in the region of {region_symbol}")
    if pol == smap.policy:
        gap = float(smap.gap[mapping_symbol])
    else:
        low, high = smap.low, smap.high
        p_a = decision_matrix(low, low.points[[region_symbol]], pol.reference_snr, "awgn")[0, region_symbol]
        p_m = decision_matrix(low, high.points[[mapping_symbol]], pol.reference_snr, "awgn")[0, region_symbol]
        gap = float(p_m - p_a)
    if gap >= 0:
        return Similarity.ABSOLUTE
    if gap >= -pol.epsilon:
        return Similarity.STRONG
    return Similarity.WEAK


def _check_prior(p, size: int, name: str) -> np.ndarray:
    if p is None:
        return np.full(size, 1.0 / size)
    p = np.asarray(p, dtype=float)
    if p.shape != (size,) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"{name} must be a distribution over {size} symbols")
    return p


def eta(smap: SimilarityMap, urllc_priors=None, embb_priors=None) -> float:
    """Probability that independent URLLC and eMBB symbols share a region."""
    pu = _check_prior(urllc_priors, smap.n, "urllc_priors")
    pe = _check_prior(embb_priors, smap.m, "embb_priors")
    k = min(smap.n, smap.m)
    mass_u = np.bincount(smap.region_of_urllc, weights=pu, minlength=k)
    mass_e = np.bincount(smap.region_of_embb, weights=pe, minlength=k)
    return float(np.dot(mass_u, mass_e))


def match_probability(smap: SimilarityMap, mapper: str) -> float:
    """Per-position probability of a counted match under uniform priors."""
    return float(smap.match_table(mapper).mean())


def boundary_distance(smap: SimilarityMap, i: int, j: int) -> float:
    return float(smap.distances[i, j])
