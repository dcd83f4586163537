"""Oracle checks comparing closed forms against brute force and simulation."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq

from . import analytic
from .constellation import SUPPORTED_ORDERS, build_constellation, channel_ser, decision_matrix
from .scheduler import count_table, match_counts
from .similarity import build_similarity_map, eta


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    expected: float
    tolerance: float
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _rel(name, value, expected, tol, detail=""):
    ok = abs(value - expected) <= tol * abs(expected)
    return Check(name, bool(ok), float(value), float(expected), tol, detail)


def _abs(name, value, expected, tol, detail=""):
    return Check(name, bool(abs(value - expected) <= tol), float(value), float(expected), tol, detail)


def brute_force_similarity(zeta: int, L_m: int, trials: int, seed: int = 0, n: int = 2, m: int = 2,
                           mapper: str = "srm", K: int | None = None) -> float:
    """Mean best match count of the search over random uniform blocks."""
    rng = np.random.default_rng(seed)
    K = L_m - zeta if K is None else K
    table = count_table(build_similarity_map(n, m), mapper)
    chunk = max(1, 2_000_000 // (K * zeta))
    total = 0
    done = 0
    while done < trials:
        t = min(chunk, trials - done)
        u = rng.integers(n, size=(t, zeta))
        c = rng.integers(m, size=(t, K, zeta))
        total += int(match_counts(u, c, table).max(axis=1).sum())
        done += t
    return total / trials


def eta_identity_checks() -> list[Check]:
    out = []
    for m in SUPPORTED_ORDERS:
        smap = build_similarity_map(2, m)
        # exhaustive pair enumeration as the oracle
        share = np.mean([[smap.region_of_urllc[u] == smap.region_of_embb[e] for e in range(m)]
                         for u in range(2)])
        out.append(_abs(f"eta(2,{m})", eta(smap), 0.5, 0.0, f"enumerated {share}"))
    out.append(_abs("eta(4,4)", eta(build_similarity_map(4, 4)), 0.25, 0.0))
    return out


def lemma_checks(trials: int = 10_000, seed: int = 7,
                 cases=((4, 0.5, 48), (8, 0.5, 200), (24, 0.5, 1200))) -> list[Check]:
    out = []
    for i, (zeta, eta_v, L_m) in enumerate(cases):
        closed = analytic.expected_similarity(zeta, zeta, L_m, eta_v)
        emp = brute_force_similarity(zeta, L_m, trials, seed + i)
        out.append(_rel(f"expected similarity zeta={zeta} L_m={L_m}", emp, closed, 0.03))
    return out


def zero_snr_checks() -> list[Check]:
    return [_abs(f"rayleigh SER at zero SNR m={m}", channel_ser(m, 0.0), 1 - 1 / m, 1e-15)
            for m in SUPPORTED_ORDERS]


def degeneracy_check() -> Check:
    """With no matches, the split form collapses to one punctured error rate."""
    prof = analytic.LoadProfile(2400, {4: 0.5, 16: 0.5}, {(2, 4): 48.0, (2, 16): 96.0}, 24, 1)
    g = 100.0
    split = analytic.embb_ser(prof, g, "urllc", eta=0.0)
    total = analytic.embb_ser_total_probability(
        prof, g, lambda n, m: analytic.ser_effective(n, m, g, mapper="urllc"))
    return _abs("split form at eta=0", split, total, 1e-15)


def modulation_threshold_checks() -> list[Check]:
    from .simulator import adapt_modulation
    out = []
    for m in (4, 16, 64):
        g = brentq(lambda x: channel_ser(m, x) - 0.01, 1e-3, 1e8, xtol=1e-12)
        db = 10 * math.log10(g)
        lo, hi = 10 ** ((db - 0.01) / 10), 10 ** ((db + 0.01) / 10)
        ok = adapt_modulation(lo) < m <= adapt_modulation(hi)
        out.append(Check(f"modulation switch to {m}", bool(ok), db, db, 0.01))
    return out


def decision_matrix_checks() -> list[Check]:
    out = []
    for m in SUPPORTED_ORDERS:
        c = build_constellation(m)
        for ch, ser_ch in (("rayleigh", "rayleigh"), ("awgn", "awgn-exact")):
            p = decision_matrix(c, c.points, 10.0, ch)
            ser = 1 - float(np.mean(np.diag(p)))
            out.append(_abs(f"decision matrix {ch} m={m}", ser, channel_ser(m, 10.0, ser_ch), 1e-9))
    return out


def loss_checks(snr_db: float = 40.0, K: int = 1200, zeta: int = 24) -> list[Check]:
    g = 10 ** (snr_db / 10)
    targets = [((2, 4), "esrm", 0.18), ((2, 16), "esrm", 0.44), ((2, 4), "urllc", 0.59), ((2, 16), "urllc", 0.93)]
    out = []
    for (n, m), mapper, target in targets:
        prof = analytic.LoadProfile(2400, {m: 1.0}, {(n, m): 96.0}, zeta, K)
        loss = analytic.embb_loss(prof, g, mapper, relative=True)
        out.append(_abs(f"relative loss {mapper} {n}-{m}", loss, target, 0.05))
    ref = analytic.embb_loss(analytic.LoadProfile(2400, {2: 1.0}, {(2, 2): 96.0}, zeta, K), g, "esrm", relative=True)
    esrm24 = out[0].value
    out.append(_abs("relative loss esrm 2-4 vs 2-2", esrm24, ref, 0.02))
    return out


def power_loss_check(K: int = 1200, zeta: int = 24) -> Check:
    q = analytic.substitution_probability(2, 4, "srm", zeta, K)
    w = analytic.urllc_power_loss_db(2, 4, "srm", q)
    return _abs("URLLC power loss srm 2-4 (dB)", abs(w), 2.5, 0.3, f"substitution {q:.4f}")


def run_all(trials: int = 10_000, seed: int = 7) -> list[Check]:
    checks = []
    checks += eta_identity_checks()
    checks += lemma_checks(trials, seed)
    checks += zero_snr_checks()
    checks.append(degeneracy_check())
    checks += modulation_threshold_checks()
    checks += decision_matrix_checks()
    checks += loss_checks()
    checks.append(power_loss_check())
    return checks
