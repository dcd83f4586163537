"""Closed-form eMBB/URLLC error rates, expected similarity and eMBB loss."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.stats import binom

from .constellation import as_gamma, build_constellation, channel_ser, decision_matrix
from .similarity import (
    EpsilonPolicy,
    SimilarityMap,
    build_similarity_map,
    check_mapper,
    match_probability,
)

# minimum slot/sTTI bookkeeping used to turn a URLLC arrival rate into a load
STTI_MS = 0.143
SYMBOLS_PER_RE = 2


@dataclass(frozen=True)
class PuncturedSplit:
    effective: float
    non_effective: float

    @property
    def total(self) -> float:
        return self.effective + self.non_effective


@dataclass(frozen=True)
class LoadProfile:
    """eMBB load composition and the URLLC puncturing it suffers.

    ``p`` maps eMBB order to its share of the ``L`` symbols; ``punctured``
    maps ``(n, m)`` to the average number of order-``m`` symbols punctured by
    order-``n`` URLLC traffic.  ``K`` is the number of candidate blocks the
    search scans for each URLLC block of ``zeta`` symbols.
    """

    L: int
    p: Mapping[int, float]
    punctured: Mapping[tuple[int, int], float]
    zeta: int = 24
    K: int = 1

    def __post_init__(self):
        if self.L < 1 or self.zeta < 1 or self.K < 1:
            raise ValueError("L, zeta and K must be positive")
        if any(v < 0 for v in self.p.values()) or abs(sum(self.p.values()) - 1.0) > 1e-9:
            raise ValueError("modulation shares must form a distribution")
        for (n, m), l in self.punctured.items():
            if m not in self.p:
                raise ValueError(f"punctured order {m} has no eMBB share")
            if l < 0:
                raise ValueError("punctured counts must be non-negative")
        for m in self.p:
            lm = self.l_m(m)
            if lm > self.L_m(m) * (1 + 1e-12):
                raise ValueError(f"more symbols punctured than carried for m={m}")
            if lm > 0 and self.zeta > self.L_m(m):
                raise ValueError(f"URLLC block longer than the order-{m} load")

    def L_m(self, m: int) -> float:
        return self.p[m] * self.L

    def l_m(self, m: int) -> float:
        return sum(l for (n, mm), l in self.punctured.items() if mm == m)

    def pairs(self, m: int):
        return [(n, l) for (n, mm), l in self.punctured.items() if mm == m]

    @classmethod
    def from_arrivals(cls, lam: float, *, p: Mapping[int, float] | None = None, n: int = 2,
                      zeta: int = 24, K: int = 1, L: int = 1200, packet_bits: int = 96) -> "LoadProfile":
        """Average load of a Poisson URLLC stream spread in proportion to ``p``.

        ``L`` counts resource elements; each carries two symbols per sTTI.
        """
        p = dict(p or {2: 1.0})
        per_stti = SYMBOLS_PER_RE * L
        urllc = lam * STTI_MS * math.ceil(packet_bits / math.log2(n))
        frac = urllc / per_stti
        return cls(per_stti, p, {(n, m): frac * share * per_stti for m, share in p.items()}, zeta, K)


def binomial_cdf(zeta: int, eta: float) -> np.ndarray:
    """CDF of Binomial(zeta, eta) at k = 0..zeta-1, summed exactly in log space."""
    k = np.arange(zeta + 1)
    logpmf = binom.logpmf(k, zeta, eta)
    # cumulative logsumexp keeps tiny CDF values from underflowing
    logcdf = np.logaddexp.accumulate(logpmf)
    return logcdf[:zeta]


def expected_similarity(zeta: int, l_nm: float, L_m: float, eta: float,
                        candidates: int | None = None) -> float:
    """Expected best match count over the searched candidate blocks.

    With ``candidates`` unset the search covers ``L_m - zeta`` blocks.
    """
    if not 1 <= zeta:
        raise ValueError("zeta must be >= 1")
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    if candidates is None:
        if L_m < zeta:
            raise ValueError("zeta exceeds L_m")
        if L_m <= zeta:
            return zeta * eta
        candidates = L_m - zeta
    if candidates < 1:
        raise ValueError("need at least one candidate block")
    if eta == 1.0:
        return float(zeta)
    if eta == 0.0:
        return 0.0
    logF = binomial_cdf(zeta, eta)
    # every one of the ceil(l/zeta) URLLC blocks faces the same candidate pool
    return float(np.sum(-np.expm1(candidates * logF)))


def effective_punctured(zeta: int, l_nm: float, L_m: float, eta: float,
                        candidates: int | None = None) -> PuncturedSplit:
    u = expected_similarity(zeta, l_nm, L_m, eta, candidates)
    eff = (1.0 - u / zeta) * l_nm
    return PuncturedSplit(eff, l_nm - eff)


def _uniform_pair_mean(values: np.ndarray, mask: np.ndarray) -> float:
    """Mean of ``values[u, e]`` over masked e for each u, then over uniform u."""
    rows = []
    for u in range(values.shape[0]):
        sel = values[u][mask[u]]
        if sel.size:
            rows.append(sel.mean())
    return float(np.mean(rows)) if rows else 0.0


def _embb_decision(n: int, m: int, snr, channel: str) -> np.ndarray:
    """(n, m) probability the eMBB receiver outputs e when URLLC point u is sent."""
    return decision_matrix(build_constellation(m), build_constellation(n).points, snr, channel)


def ser_effective(n: int, m: int, snr, *, mapper: str = "srm", channel: str = "rayleigh",
                  policy: EpsilonPolicy | None = None, bound: bool = False) -> float:
    """eMBB SER on punctured positions that carry a non-matching URLLC symbol.

    The exact value averages the pairwise decision error over uniform
    URLLC symbols and uniform non-matching eMBB symbols.  ``bound=True``
    returns ``1 - P_n(snr)/(m-1)`` instead.
    """
    check_mapper(n, m, mapper)
    if bound:
        return 1.0 - channel_ser(n, snr, channel) / (m - 1)
    smap = build_similarity_map(n, m, policy)
    match = smap.match_table(mapper)
    err = 1.0 - _embb_decision(n, m, as_gamma(snr), channel)
    return _uniform_pair_mean(err, ~match)


def ser_non_effective(n: int, m: int, snr, mapper: str = "srm", *, channel: str = "rayleigh",
                      policy: EpsilonPolicy | None = None) -> float:
    """eMBB SER on punctured positions whose symbols match."""
    check_mapper(n, m, mapper)
    g = as_gamma(snr)
    if n == m or mapper in ("srm", "esrm"):
        # the eMBB symbol itself goes out
        return channel_ser(m, g, channel)
    smap = build_similarity_map(n, m, policy)
    match = smap.match_table(mapper)
    err = 1.0 - _embb_decision(n, m, g, channel)
    return _uniform_pair_mean(err, match)


def _mapper_for(mapper, m: int) -> str:
    if isinstance(mapper, str):
        return mapper
    return mapper[m]


def _pair_terms(profile: LoadProfile, n: int, m: int, l: float, mapper: str,
                policy: EpsilonPolicy | None, eta_override: float | None) -> PuncturedSplit:
    smap = build_similarity_map(n, m, policy)
    eta = match_probability(smap, mapper) if eta_override is None else eta_override
    return effective_punctured(profile.zeta, l, profile.L_m(m), eta, candidates=profile.K)


def embb_ser(profile: LoadProfile, snr, mapper="urllc", *, channel: str = "rayleigh",
             policy: EpsilonPolicy | None = None, eta: float | None = None) -> float:
    """eMBB SER with punctured symbols split into matching and non-matching parts."""
    g = as_gamma(snr)
    total = 0.0
    for m, pm in profile.p.items():
        if pm == 0:
            continue
        Lm = profile.L_m(m)
        acc = channel_ser(m, g, channel) * (1.0 - profile.l_m(m) / Lm)
        for n, l in profile.pairs(m):
            mp = _mapper_for(mapper, m)
            split = _pair_terms(profile, n, m, l, mp, policy, eta)
            p_ne = ser_non_effective(n, m, g, mp, channel=channel, policy=policy)
            p_e = ser_effective(n, m, g, mapper=mp, channel=channel, policy=policy)
            acc += p_ne * split.non_effective / Lm + p_e * split.effective / Lm
        total += pm * acc
    return total


def embb_ser_total_probability(profile: LoadProfile, snr,
                               punctured_ser: Callable[[int, int], float], *,
                               channel: str = "rayleigh") -> float:
    """eMBB SER with one error probability for all punctured symbols of a pair."""
    g = as_gamma(snr)
    total = 0.0
    for m, pm in profile.p.items():
        if pm == 0:
            continue
        Lm = profile.L_m(m)
        acc = channel_ser(m, g, channel) * (1.0 - profile.l_m(m) / Lm)
        for n, l in profile.pairs(m):
            acc += punctured_ser(n, m) * l / Lm
        total += pm * acc
    return total


def embb_ser_high_snr(profile: LoadProfile, mapper="urllc", *,
                      policy: EpsilonPolicy | None = None) -> float:
    """Noise-free limit of :func:`embb_ser`: the puncturing error floor.

    Equals ``sum_m p_m sum_n L_eff/L_m`` whenever non-matching punctures are
    always lost and matching ones never are (SRM/ESRM, or equal orders).
    """
    return embb_ser(profile, math.inf, mapper, policy=policy)


def embb_ser_high_similarity(profile: LoadProfile, snr, mapper="urllc", *,
                             channel: str = "rayleigh",
                             policy: EpsilonPolicy | None = None) -> float:
    """Full-similarity limit: every punctured symbol matches."""
    g = as_gamma(snr)
    total = 0.0
    for m, pm in profile.p.items():
        if pm == 0:
            continue
        Lm = profile.L_m(m)
        acc = channel_ser(m, g, channel) * (1.0 - profile.l_m(m) / Lm)
        for n, l in profile.pairs(m):
            acc += ser_non_effective(n, m, g, _mapper_for(mapper, m), channel=channel, policy=policy) * l / Lm
        total += pm * acc
    return total


def substitution_probability(n: int, m: int, mapper: str, zeta: int, K: int,
                             policy: EpsilonPolicy | None = None) -> float:
    """Share of URLLC symbols replaced by a kept eMBB symbol after the search."""
    check_mapper(n, m, mapper)
    if mapper == "urllc" or n > m:
        return 0.0
    eta = match_probability(build_similarity_map(n, m, policy), mapper)
    return expected_similarity(zeta, zeta, zeta + K, eta, candidates=K) / zeta


def _kept_sets(smap: SimilarityMap, mapper: str) -> list[tuple[int, ...]]:
    return list(smap.enhanced if mapper == "esrm" else smap.regions)


def urllc_ser(n: int, m: int, snr_u, mapper: str = "urllc", *, substitution: float | None = None,
              channel: str = "rayleigh", policy: EpsilonPolicy | None = None,
              exact: bool = False) -> float:
    """URLLC SER when a share ``substitution`` of its symbols is swapped for
    kept eMBB symbols.

    The swapped symbols are scored at the SNR scaled by their squared
    distance to the URLLC decision boundary relative to the URLLC point's
    own.  ``exact=True`` uses the full decision probabilities instead.
    Without an explicit ``substitution`` the unsearched match probability is
    used.
    """
    check_mapper(n, m, mapper)
    g = as_gamma(snr_u)
    p_n = channel_ser(n, g, channel)
    if mapper == "urllc" or n >= m:
        return p_n
    smap = build_similarity_map(n, m, policy)
    q = match_probability(smap, mapper) if substitution is None else float(substitution)
    if not 0.0 <= q <= 1.0:
        raise ValueError("substitution must lie in [0, 1]")
    c_u, c_e = build_constellation(n), build_constellation(m)
    kept = _kept_sets(smap, mapper)
    if exact:
        dec = decision_matrix(c_u, c_e.points, g, channel)
    swapped = 0.0
    for u in range(n):
        members = kept[u]
        if exact:
            errs = [1.0 - dec[e, u] for e in members]
        else:
            ratio = (smap.distances[u, list(members)] / smap.self_distances[u]) ** 2
            errs = [channel_ser(n, g * r, channel) for r in ratio]
        swapped += np.mean(errs) / n
    return (1.0 - q) * p_n + q * swapped


def urllc_power_loss_db(n: int, m: int, mapper: str, substitution: float = 1.0,
                        policy: EpsilonPolicy | None = None) -> float:
    """Average URLLC power change in dB (negative = loss) caused by substitution."""
    check_mapper(n, m, mapper)
    if mapper == "urllc" or n >= m:
        return 0.0
    smap = build_similarity_map(n, m, policy)
    kept = _kept_sets(smap, mapper)
    total = 0.0
    for u in range(n):
        d = smap.distances[u, list(kept[u])]
        total += np.mean(np.log10(d ** 2 / smap.self_distances[u] ** 2)) / n
    return float(10.0 * substitution * total)


def embb_loss(profile: LoadProfile, snr, mapper="urllc", model: str = "generalized", *,
              relative: bool = False, channel: str = "rayleigh",
              policy: EpsilonPolicy | None = None) -> float:
    """Expected eMBB loss fraction, weighted over eMBB orders.

    ``linear`` counts every punctured symbol as lost; ``generalized`` counts
    the expected erroneous ones.  ``relative=True`` divides by the punctured
    share, giving the fraction of punctured symbols that are lost.
    """
    if model not in ("linear", "generalized"):
        raise ValueError(f"unknown loss model {model!r}")
    g = as_gamma(snr)
    lost = linear = 0.0
    for m, pm in profile.p.items():
        if pm == 0:
            continue
        Lm = profile.L_m(m)
        linear += pm * profile.l_m(m) / Lm
        if model == "linear":
            continue
        acc = 0.0
        for n, l in profile.pairs(m):
            mp = _mapper_for(mapper, m)
            split = _pair_terms(profile, n, m, l, mp, policy, None)
            acc += ser_non_effective(n, m, g, mp, channel=channel, policy=policy) * split.non_effective
            acc += ser_effective(n, m, g, mapper=mp, channel=channel, policy=policy) * split.effective
        lost += pm * acc / Lm
    value = linear if model == "linear" else lost
    if relative:
        return value / linear if linear > 0 else 0.0
    return value


def reliability(block_ser_samples, target: float) -> float:
    """Fraction of blocks whose SER meets ``target``."""
    s = np.asarray(block_ser_samples, dtype=float)
    if s.size == 0:
        raise ValueError("no blocks to evaluate")
    if not 0.0 <= target <= 1.0:
        raise ValueError("target must lie in [0, 1]")
    return float(np.mean(s <= target))
