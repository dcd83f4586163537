"""Mapper selection, similarity search over candidate eMBB blocks and plan application."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytic import urllc_ser
from .constellation import as_gamma, build_constellation
from .similarity import EpsilonPolicy, SimilarityMap, build_similarity_map, check_mapper

SEND_URLLC = "send_urllc"
KEEP_EMBB = "keep_embb"


@dataclass(frozen=True)
class SearchSpace:
    """``K`` candidate blocks, optionally cut into ordered subsets.

    ``segments`` holds the exclusive end index of each subset.
    """

    K: int
    window_step: int = 24
    segments: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.window_step < 1:
            raise ValueError("window_step must be >= 1")
        if self.segments is not None:
            seg = tuple(int(s) for s in self.segments)
            if not seg or any(b <= a for a, b in zip((0,) + seg, seg)) or seg[-1] > self.K:
                raise ValueError("segments must be strictly increasing ends within K")
            object.__setattr__(self, "segments", seg)

    @classmethod
    def even(cls, K: int, Z: int, window_step: int = 24) -> "SearchSpace":
        if not 1 <= Z <= K:
            raise ValueError("need 1 <= Z <= K")
        ends = tuple(int(round(K * (z + 1) / Z)) for z in range(Z))
        return cls(K, window_step, ends)


@dataclass(frozen=True)
class PuncturingPlan:
    selected_index: int
    keep: np.ndarray
    mapper_used: str
    similarity_count: int
    comparisons: int

    def __post_init__(self):
        if not 0 <= self.similarity_count <= len(self.keep):
            raise ValueError("similarity count out of range")
        if self.mapper_used == "urllc" and np.any(self.keep):
            raise ValueError("the URLLC mapper never keeps eMBB symbols")

    @property
    def per_symbol_action(self) -> list[str]:
        return [KEEP_EMBB if k else SEND_URLLC for k in self.keep]


def count_table(smap: SimilarityMap, mapper: str) -> np.ndarray:
    """Pairs counted by the search: enhanced matches for ESRM, shared regions otherwise."""
    return smap.match_table(mapper)


def keep_table(smap: SimilarityMap, mapper: str) -> np.ndarray:
    """Pairs where the eMBB symbol goes out in place of the URLLC symbol."""
    if mapper == "urllc":
        return np.zeros((smap.n, smap.m), dtype=bool)
    return smap.match_table(mapper)


def match_counts(urllc_block, embb_candidates, table: np.ndarray) -> np.ndarray:
    """Per-candidate match counts; broadcasts over leading batch dimensions.

    ``urllc_block`` is ``(..., zeta)`` and ``embb_candidates`` ``(..., K, zeta)``.
    """
    u = np.asarray(urllc_block)
    c = np.asarray(embb_candidates)
    return table[u[..., None, :], c].sum(axis=-1)


def _validate(urllc_block, embb_candidates):
    u = np.asarray(urllc_block, dtype=np.intp)
    c = np.asarray(embb_candidates, dtype=np.intp)
    if u.ndim != 1 or u.size == 0:
        raise ValueError("URLLC block must be a non-empty 1-D symbol array")
    if c.ndim != 2 or c.shape[0] == 0:
        raise ValueError("need at least one candidate block")
    if c.shape[1] != u.size:
        raise ValueError(f"candidate length {c.shape[1]} != URLLC block length {u.size}")
    return u, c


def similarity_search(urllc_block, embb_candidates, smap: SimilarityMap,
                      mapper: str = "srm") -> PuncturingPlan:
    """Pick the candidate with the most matching positions (lowest index on ties)."""
    check_mapper(smap.n, smap.m, mapper)
    u, c = _validate(urllc_block, embb_candidates)
    counts = match_counts(u, c, count_table(smap, mapper))
    k = int(np.argmax(counts))
    keep = keep_table(smap, mapper)[u, c[k]]
    return PuncturingPlan(k, keep, mapper, int(counts[k]), c.size)


def segmented_search(urllc_segments, embb_candidates, space: SearchSpace, smap: SimilarityMap,
                     mapper: str = "srm") -> list[PuncturingPlan]:
    """Ordered search: segment ``z`` may only use candidates after segment ``z-1``'s pick.

    Segment ``z`` scans its own subset plus the unused tail of the previous
    one, so the selected indices strictly increase.
    """
    check_mapper(smap.n, smap.m, mapper)
    segs = [np.asarray(s, dtype=np.intp) for s in urllc_segments]
    if not segs:
        raise ValueError("need at least one URLLC segment")
    c = np.asarray(embb_candidates, dtype=np.intp)
    if c.ndim != 2 or c.shape[0] < space.K:
        raise ValueError("fewer candidate blocks than the search space")
    ends = space.segments or (space.K,)
    if len(ends) == 1 and len(segs) > 1:
        ends = SearchSpace.even(space.K, len(segs), space.window_step).segments
    if len(ends) != len(segs):
        raise ValueError(f"{len(segs)} segments but {len(ends)} subsets")
    plans = []
    start = 0
    for z, (seg, end) in enumerate(zip(segs, ends)):
        if start >= end:
            raise ValueError(f"segment {z} has no candidate left after index {start - 1}")
        plan = similarity_search(seg, c[start:end], smap, mapper)
        k = start + plan.selected_index
        plans.append(PuncturingPlan(k, plan.keep, mapper, plan.similarity_count, plan.comparisons))
        start = k + 1
    return plans


def select_mapper(n: int, m: int, snr_u, epsilon_u: float, smap: SimilarityMap | None = None, *,
                  substitution: float = 1.0, channel: str = "rayleigh",
                  policy: EpsilonPolicy | None = None) -> str:
    """Choose the mapper for an (n, m) pair from the URLLC SER target.

    The URLLC SER under substitution is checked against ``epsilon_u``; the
    ESRM is preferred when its enhanced set is strictly smaller than the
    region, else the SRM.
    """
    if not 0.0 < epsilon_u <= 1.0:
        raise ValueError("epsilon_u must lie in (0, 1]")
    as_gamma(snr_u)
    if n >= m:
        return "urllc"
    smap = smap or build_similarity_map(n, m, policy)
    p1 = urllc_ser(n, m, snr_u, "esrm", substitution=substitution, channel=channel, policy=smap.policy)
    if p1 > epsilon_u:
        return "urllc"
    return "srm" if smap.enhanced == smap.regions else "esrm"


def apply_plan(plan: PuncturingPlan, urllc_block, embb_block, smap: SimilarityMap) -> np.ndarray:
    """Points actually sent on the punctured block."""
    u = np.asarray(urllc_block, dtype=np.intp)
    e = np.asarray(embb_block, dtype=np.intp)
    if not u.shape == e.shape == plan.keep.shape:
        raise ValueError("plan, URLLC block and eMBB block lengths differ")
    pu = build_constellation(smap.n).points[u]
    pe = build_constellation(smap.m).points[e]
    return np.where(plan.keep, pe, pu)
