"""Gray-mapped square QAM constellations, ML detection and channel SER.

Every constellation has unit average energy.  Labels put the in-phase bits
first and the quadrature bits second; on each axis the levels run from most
positive to most negative and carry a reflected Gray code, so the leading bit
of an axis is its sign bit (0 = positive).  Symbol index ``k`` always carries
the label ``format(k, "0{b}b")``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import erfc, ndtr

SUPPORTED_ORDERS = (2, 4, 16, 64)

# log-spaced quadrature grid for averaging over an Exp(1) fading power
_LOG_G = np.linspace(-40.0, 4.5, 6001)
_G = np.exp(_LOG_G)
_FADE_W = _G * np.exp(-_G) * np.gradient(_LOG_G)
_FADE_W[[0, -1]] *= 0.5


@dataclass(frozen=True)
class SnrPoint:
    """Linear per-symbol SNR with a dB view."""

    gamma: float

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError(f"SNR must be >= 0, got {self.gamma}")

    @classmethod
    def from_db(cls, db: float) -> "SnrPoint":
        return cls(db_to_linear(db))

    @property
    def db(self) -> float:
        return linear_to_db(self.gamma)


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0) if np.ndim(db) else 10.0 ** (db / 10.0)


def linear_to_db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(x)


def as_gamma(snr) -> float:
    """Accept an :class:`SnrPoint` or a plain linear SNR."""
    if isinstance(snr, SnrPoint):
        return snr.gamma
    g = float(snr)
    if not g >= 0:
        raise ValueError(f"SNR must be >= 0, got {snr}")
    return g


def qfunc(x):
    """Gaussian tail probability Q(x) = P(N(0,1) > x)."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


def gray_code(bits: int) -> list[int]:
    return [p ^ (p >> 1) for p in range(1 << bits)]


@dataclass(frozen=True, eq=False)
class Constellation:
    order: int
    points: np.ndarray
    labels: tuple[str, ...]
    min_distance: float
    # sorted (ascending) decision levels per axis, and each point's level index
    i_levels: np.ndarray = field(repr=False)
    q_levels: np.ndarray = field(repr=False)
    i_pos: np.ndarray = field(repr=False)
    q_pos: np.ndarray = field(repr=False)

    @property
    def bits(self) -> int:
        return int(np.log2(self.order))

    def decision_cell(self, k: int) -> tuple[float, float, float, float]:
        """ML decision rectangle ``(i_lo, i_hi, q_lo, q_hi)`` of symbol ``k``."""
        return (*_interval(self.i_levels, self.i_pos[k]), *_interval(self.q_levels, self.q_pos[k]))

    def cells(self) -> np.ndarray:
        """All decision rectangles, shape ``(order, 4)``."""
        return np.array([self.decision_cell(k) for k in range(self.order)])


def _interval(levels: np.ndarray, pos: int) -> tuple[float, float]:
    lo = -np.inf if pos == 0 else 0.5 * (levels[pos - 1] + levels[pos])
    hi = np.inf if pos == len(levels) - 1 else 0.5 * (levels[pos] + levels[pos + 1])
    return float(lo), float(hi)


def _axis(bits: int) -> tuple[np.ndarray, np.ndarray]:
    """Amplitudes and Gray labels for one axis, most positive level first."""
    n = 1 << bits
    amp = np.array([n - 1 - 2 * p for p in range(n)], dtype=float)
    return amp, np.array(gray_code(bits))


@lru_cache(maxsize=None)
def build_constellation(order: int) -> Constellation:
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported modulation order {order}; expected one of {SUPPORTED_ORDERS}")
    bits = int(np.log2(order))
    if order == 2:
        i_bits, q_bits = 1, 0
    else:
        i_bits = q_bits = bits // 2

    i_amp, i_gray = _axis(i_bits)
    if q_bits:
        q_amp, q_gray = _axis(q_bits)
    else:
        q_amp, q_gray = np.zeros(1), np.zeros(1, dtype=int)

    pts = np.empty(order, dtype=complex)
    for ip, (ia, ig) in enumerate(zip(i_amp, i_gray)):
        for qp, (qa, qg) in enumerate(zip(q_amp, q_gray)):
            pts[(int(ig) << q_bits) | int(qg)] = ia + 1j * qa
    pts /= np.sqrt(np.mean(np.abs(pts) ** 2))
    pts.setflags(write=False)

    i_levels = np.unique(pts.real)
    q_levels = np.unique(pts.imag)
    i_pos = np.array([int(np.argmin(np.abs(i_levels - x))) for x in pts.real])
    q_pos = np.array([int(np.argmin(np.abs(q_levels - x))) for x in pts.imag])

    diff = np.abs(pts[:, None] - pts[None, :])
    dmin = float(diff[~np.eye(order, dtype=bool)].min())
    labels = tuple(format(k, f"0{bits}b") for k in range(order))
    for a in (i_levels, q_levels, i_pos, q_pos):
        a.setflags(write=False)
    return Constellation(order, pts, labels, dmin, i_levels, q_levels, i_pos, q_pos)


def ml_detect(c: Constellation, sample):
    """Nearest constellation point; ties go to the lowest symbol index.

    Accepts a scalar or an array of complex samples and returns indices of
    the same shape.
    """
    y = np.asarray(sample, dtype=complex)
    if not np.all(np.isfinite(y)):
        raise ValueError("received sample must be finite")
    flat = y.reshape(-1)
    out = np.empty(flat.shape, dtype=np.intp)
    step = max(1, 1 << 20 >> c.bits)
    for s in range(0, flat.size, step):
        blk = flat[s:s + step]
        d2 = (blk.real[:, None] - c.points.real) ** 2 + (blk.imag[:, None] - c.points.imag) ** 2
        out[s:s + step] = np.argmin(d2, axis=1)
    if y.ndim == 0:
        return int(out[0])
    return out.reshape(y.shape)


def channel_ser_awgn(order: int, snr, exact: bool = False) -> float:
    """Symbol error rate over AWGN at per-symbol SNR ``snr``.

    Square QAM uses ``4a Q(sqrt(3g/(m-1)))``; ``exact=True`` adds the
    ``-4a^2 Q^2`` term.  BPSK always uses ``Q(sqrt(2g))``.
    """
    g = as_gamma(snr)
    if order == 2:
        return float(qfunc(np.sqrt(2.0 * g)))
    if order < 4:
        raise ValueError(f"unsupported order {order}")
    a = 1.0 - 1.0 / np.sqrt(order)
    q = float(qfunc(np.sqrt(3.0 * g / (order - 1))))
    p = 4.0 * a * q - (4.0 * a * a * q * q if exact else 0.0)
    return min(1.0, max(0.0, p))


def channel_ser_rayleigh(order: int, snr) -> float:
    """Average SER over flat Rayleigh fading with mean SNR ``snr``."""
    g = as_gamma(snr)
    if order == 2:
        return float(0.5 * (1.0 - np.sqrt(g / (1.0 + g))))
    if order < 4:
        raise ValueError(f"unsupported order {order}")
    a = 1.0 - 1.0 / np.sqrt(order)
    b = np.sqrt(3.0 * g / (2.0 * (order - 1) + 3.0 * g))
    p = 2.0 * a * (1.0 - b) - a * a * (1.0 - (4.0 * b / np.pi) * np.arctan2(1.0, b))
    return float(p)


CHANNELS = ("awgn", "awgn-exact", "rayleigh")


def channel_ser(order: int, snr, channel: str = "rayleigh") -> float:
    if channel not in CHANNELS:
        raise ValueError(f"unknown channel {channel!r}; expected one of {CHANNELS}")
    if np.isinf(as_gamma(snr)):
        return 0.0
    if channel == "rayleigh":
        return channel_ser_rayleigh(order, snr)
    if channel == "awgn":
        return channel_ser_awgn(order, snr)
    if channel == "awgn-exact":
        return channel_ser_awgn(order, snr, exact=True)
    raise ValueError(f"unknown channel {channel!r}; expected one of {CHANNELS}")


def _cell_prob(x: np.ndarray, cells: np.ndarray, scale: np.ndarray) -> np.ndarray:
    """P(x + noise lands in each cell); noise std per axis is 1/scale.

    ``x``: (P,) complex; ``cells``: (S, 4); ``scale``: (G,).
    Returns (P, S, G).
    """
    s = scale[None, None, :]
    xr = x.real[:, None, None]
    xi = x.imag[:, None, None]
    lo_i, hi_i, lo_q, hi_q = (cells[None, :, k, None] for k in range(4))
    with np.errstate(invalid="ignore"):
        pi = ndtr((hi_i - xr) * s) - ndtr((lo_i - xr) * s)
        pq = ndtr((hi_q - xi) * s) - ndtr((lo_q - xi) * s)
    return pi * pq


def _limit_prob(x: np.ndarray, cells: np.ndarray) -> np.ndarray:
    """Noise-free limit of the cell probability (1/2 per boundary the point sits on)."""
    def axis(v, lo, hi):
        inside = (v > lo) & (v < hi)
        edge = np.isclose(v, lo, atol=1e-12) | np.isclose(v, hi, atol=1e-12)
        return inside + 0.5 * edge

    pi = axis(x.real[:, None], cells[None, :, 0], cells[None, :, 1])
    pq = axis(x.imag[:, None], cells[None, :, 2], cells[None, :, 3])
    return pi * pq


def decision_matrix(c: Constellation, x, snr, channel: str = "rayleigh") -> np.ndarray:
    """Probability that the ML receiver for ``c`` outputs each symbol.

    ``x`` holds unit-scale transmitted points (any points, not necessarily
    members of ``c``).  The receiver is coherent; under Rayleigh fading the
    result is averaged over an Exp(1) fading power.  Returns shape
    ``(len(x), c.order)``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    cells = c.cells()
    g = as_gamma(snr)
    if np.isinf(g):
        return _limit_prob(x, cells)
    if g == 0:
        # noise only: unbounded cells share the mass, bounded cells get none
        return _cell_prob(x, cells, np.array([1e-300]))[..., 0]
    if channel in ("awgn", "awgn-exact"):
        return _cell_prob(x, cells, np.array([max(np.sqrt(2.0 * g), 1e-300)]))[..., 0]
    if channel == "rayleigh":
        # floor keeps subnormal SNRs from collapsing the scale to zero
        p = _cell_prob(x, cells, np.maximum(np.sqrt(2.0 * g * _G), 1e-300))
        return np.sum(p * _FADE_W, axis=-1)
    raise ValueError(f"unknown channel {channel!r}")
