"""Bit-domain randomness battery (the SP 800-22 test subset).

Every test takes a BitStream and returns a TestResult with the statistic,
the p-value, and pass = (p >= alpha).  Streams shorter than a test's
recommended minimum yield a not-run result instead of a misleading
p-value.  The two excursion tests additionally mark individual walk
states as not run when too few cycles visit them (the J = 500 rule), and
the battery reports both conventions: pass rates over what ran, and pass
rates counting every skipped instance as a miss.

Implementations follow the standard's formulas directly; the distribution
constants (longest-run and template probabilities, the universal-test
mean/variance table, linear-complexity class weights) are embedded so the
module needs nothing at runtime beyond numpy/scipy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy import special, stats

from .bitstream import BitStream, as_bit_array
from .errors import InsufficientData, ShapeError, UnknownTest
from .results import BatteryReport, TestResult
from .seedsrc import extract_mantissa_bits
from .whitener import generate_bits, instantiate

__all__ = [
    "NistParams",
    "NIST_TESTS",
    "nist_test",
    "nist_battery",
    "float_stream_to_bits",
    "gf2_rank",
    "rank_distribution",
    "berlekamp_massey_lengths",
    "monobit",
    "block_frequency",
    "cumulative_sums",
    "runs",
    "longest_run",
    "matrix_rank",
    "dft_spectral",
    "non_overlapping_template",
    "overlapping_template",
    "maurer_universal",
    "approximate_entropy",
    "serial",
    "linear_complexity",
    "random_excursions",
    "random_excursions_variant",
]

ALPHA = 0.01


@dataclass
class NistParams:
    """Test parameterisation; defaults target multi-megabit streams.

    block_len None picks the smallest power of two giving at most 100
    frequency blocks.  The remaining defaults are the standard's example
    choices and stay inside its recommended ranges for 2**23-bit streams.
    """

    block_len: int | None = None  # block_frequency M
    template_len: int = 9  # template m for both template tests
    serial_m: int = 16
    apen_m: int = 10
    lc_block_len: int = 500
    matrix_rows: int = 32
    matrix_cols: int = 32
    excursions_min_cycles: int = 500  # J threshold
    alpha: float = ALPHA

    def frequency_block_len(self, n: int) -> int:
        if self.block_len is not None:
            return self.block_len
        m = 128
        while n // m > 100:
            m *= 2
        return m


_bits = as_bit_array  # local alias; every test body reads it


def _result(name, stat, p, alpha, **details) -> TestResult:
    return TestResult(
        name=name,
        statistic=float(stat),
        p_value=float(p),
        passed=bool(p >= alpha),
        alpha=alpha,
        details=details,
    )


def _not_run(name, reason) -> TestResult:
    return TestResult(name=name, not_run=True, reason=reason)


def _windowed_codes(bits: np.ndarray, m: int, cyclic: bool) -> np.ndarray:
    """Value of each (overlapping) m-bit window, MSB first."""
    b = np.concatenate([bits, bits[: m - 1]]) if cyclic else bits
    n_codes = b.size - m + 1
    codes = np.zeros(n_codes, dtype=np.int64)
    for i in range(m):
        codes = (codes << 1) | b[i : i + n_codes]
    return codes


# ---------------------------------------------------------------------------
# frequency family


def monobit(stream, alpha: float = ALPHA) -> TestResult:
    """Frequency test: S_n / sqrt(n) against N(0, 1)."""
    b = _bits(stream)
    n = b.size
    if n < 100:
        return _not_run("monobit", f"needs 100 bits, got {n}")
    s = 2.0 * int(b.sum()) - n
    s_obs = abs(s) / math.sqrt(n)
    p = math.erfc(s_obs / math.sqrt(2.0))
    return _result("monobit", s_obs, p, alpha, ones=int(b.sum()), n=n)


def block_frequency(stream, block_len: int | None = None, alpha: float = ALPHA) -> TestResult:
    b = _bits(stream)
    n = b.size
    if n < 100:
        return _not_run("block_frequency", f"needs 100 bits, got {n}")
    m = block_len or NistParams().frequency_block_len(n)
    n_blocks = n // m
    if n_blocks < 1:
        return _not_run("block_frequency", f"needs one {m}-bit block")
    pi = b[: n_blocks * m].reshape(n_blocks, m).mean(axis=1)
    chi2 = 4.0 * m * float(np.sum((pi - 0.5) ** 2))
    p = float(special.gammaincc(n_blocks / 2.0, chi2 / 2.0))
    return _result("block_frequency", chi2, p, alpha, block_len=m, n_blocks=n_blocks)


def cumulative_sums(stream, backward: bool = False, alpha: float = ALPHA) -> TestResult:
    name = "cumulative_sums_backward" if backward else "cumulative_sums_forward"
    b = _bits(stream)
    n = b.size
    if n < 100:
        return _not_run(name, f"needs 100 bits, got {n}")
    x = b[::-1] if backward else b
    walk = np.cumsum(x.astype(np.int64) * 2 - 1)
    z = int(np.max(np.abs(walk)))
    if z == 0:
        return _result(name, 0.0, 0.0, alpha, n=n)
    sq = math.sqrt(n)
    ks = np.arange((-n // z + 1) // 4, (n // z - 1) // 4 + 1)
    term1 = np.sum(
        stats.norm.cdf((4 * ks + 1) * z / sq) - stats.norm.cdf((4 * ks - 1) * z / sq)
    )
    ks2 = np.arange((-n // z - 3) // 4, (n // z - 1) // 4 + 1)
    term2 = np.sum(
        stats.norm.cdf((4 * ks2 + 3) * z / sq) - stats.norm.cdf((4 * ks2 + 1) * z / sq)
    )
    p = float(min(max(1.0 - term1 + term2, 0.0), 1.0))
    return _result(name, z, p, alpha, n=n)


def runs(stream, alpha: float = ALPHA) -> TestResult:
    b = _bits(stream)
    n = b.size
    if n < 100:
        return _not_run("runs", f"needs 100 bits, got {n}")
    pi = float(b.mean())
    if abs(pi - 0.5) >= 2.0 / math.sqrt(n):
        # frequency prerequisite failed; the standard assigns p = 0
        return _result("runs", 0.0, 0.0, alpha, pi=pi, prerequisite="failed")
    v_obs = 1 + int(np.count_nonzero(b[1:] != b[:-1]))
    num = abs(v_obs - 2.0 * n * pi * (1.0 - pi))
    den = 2.0 * math.sqrt(2.0 * n) * pi * (1.0 - pi)
    p = math.erfc(num / den)
    return _result("runs", v_obs, p, alpha, pi=pi)


_LONGEST_RUN_TABLES = (
    # (min_n, M, lowest category, pi per category)
    (128, 8, 1, (0.2148, 0.3672, 0.2305, 0.1875)),
    (6272, 128, 4, (0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124)),
    (750000, 10**4, 10, (0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727)),
)


def _longest_one_run(row: np.ndarray) -> int:
    edges = np.flatnonzero(np.diff(np.r_[np.uint8(0), row, np.uint8(0)]))
    if edges.size == 0:
        return 0
    return int(np.max(edges[1::2] - edges[::2]))


def longest_run(stream, alpha: float = ALPHA) -> TestResult:
    b = _bits(stream)
    n = b.size
    if n < 128:
        return _not_run("longest_run", f"needs 128 bits, got {n}")
    min_n, m, low, pi = next(t for t in reversed(_LONGEST_RUN_TABLES) if n >= t[0])
    k = len(pi) - 1
    n_blocks = n // m
    blocks = b[: n_blocks * m].reshape(n_blocks, m)
    longest = np.fromiter((_longest_one_run(row) for row in blocks), dtype=np.int64)
    cats = np.clip(longest, low, low + k) - low
    nu = np.bincount(cats, minlength=k + 1)
    expected = n_blocks * np.asarray(pi)
    chi2 = float(np.sum((nu - expected) ** 2 / expected))
    p = float(special.gammaincc(k / 2.0, chi2 / 2.0))
    return _result("longest_run", chi2, p, alpha, block_len=m, nu=nu, n_blocks=n_blocks)


# ---------------------------------------------------------------------------
# rank test


def gf2_rank(mats: np.ndarray, n_cols: int) -> np.ndarray:
    """Rank over GF(2) of many matrices, rows packed as uint64 (LSB = col 0)."""
    m = np.ascontiguousarray(mats, dtype=np.uint64).copy()
    if m.ndim != 2:
        raise ShapeError("expected (n_matrices, n_rows) packed rows")
    n_mat, n_rows = m.shape
    if n_cols > 64:
        raise ShapeError("packed GF(2) elimination handles up to 64 columns")
    rank = np.zeros(n_mat, dtype=np.int64)
    row_idx = np.arange(n_rows)
    mat_idx = np.arange(n_mat)
    for col in range(n_cols):
        colbit = ((m >> np.uint64(col)) & np.uint64(1)).astype(bool)
        eligible = colbit & (row_idx[None, :] >= rank[:, None])
        has = eligible.any(axis=1)
        piv = np.where(has, eligible.argmax(axis=1), 0)
        dest = np.where(has, rank, piv)
        # swap the pivot row up to position `rank`
        tmp = m[mat_idx, piv].copy()
        m[mat_idx, piv] = m[mat_idx, dest]
        m[mat_idx, dest] = tmp
        pivot_rows = m[mat_idx, dest]
        colbit = ((m >> np.uint64(col)) & np.uint64(1)).astype(bool)
        elim = colbit & (row_idx[None, :] != dest[:, None]) & has[:, None]
        m ^= pivot_rows[:, None] * elim.astype(np.uint64)
        rank += has
    return rank


def rank_distribution(rows: int, cols: int, ranks) -> np.ndarray:
    """Exact P(rank = r) for a random GF(2) matrix, per the q-binomial product."""
    out = []
    for r in ranks:
        if r < 0 or r > min(rows, cols):
            out.append(0.0)
            continue
        log_p = (r * (rows + cols - r) - rows * cols) * math.log(2.0)
        for i in range(r):
            log_p += math.log1p(-(2.0 ** (i - rows)))
            log_p += math.log1p(-(2.0 ** (i - cols)))
            log_p -= math.log1p(-(2.0 ** (i - r)))
        out.append(math.exp(log_p))
    return np.asarray(out)


def matrix_rank(stream, rows: int = 32, cols: int = 32, alpha: float = ALPHA) -> TestResult:
    b = _bits(stream)
    n = b.size
    per = rows * cols
    n_mat = n // per
    if n_mat < 38:
        return _not_run("matrix_rank", f"needs {38 * per} bits, got {n}")
    tail = b[: n_mat * per].reshape(n_mat, rows, cols)
    weights = (np.uint64(1) << np.arange(cols, dtype=np.uint64))[None, None, :]
    packed = (tail.astype(np.uint64) * weights).sum(axis=2)
    ranks = gf2_rank(packed, cols)
    full = min(rows, cols)
    p_full, p_minus = rank_distribution(rows, cols, (full, full - 1))
    probs = np.array([p_full, p_minus, 1.0 - p_full - p_minus])
    counts = np.array(
        [
            int(np.sum(ranks == full)),
            int(np.sum(ranks == full - 1)),
            int(np.sum(ranks <= full - 2)),
        ]
    )
    expected = n_mat * probs
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    p = math.exp(-chi2 / 2.0)
    return _result(
        "matrix_rank", chi2, p, alpha, n_matrices=n_mat, counts=counts, probs=probs
    )


# ---------------------------------------------------------------------------
# spectral


def dft_spectral(stream, alpha: float = ALPHA) -> TestResult:
    b = _bits(stream)
    n = b.size
    if n < 1000:
        return _not_run("dft_spectral", f"needs 1000 bits, got {n}")
    x = b.astype(np.float64) * 2.0 - 1.0
    mags = np.abs(sfft.rfft(x))[: n // 2]  # indices 0 .. n/2-1
    threshold = math.sqrt(math.log(1.0 / 0.05) * n)
    n1 = int(np.count_nonzero(mags < threshold))
    n0 = 0.95 * n / 2.0
    d = (n1 - n0) / math.sqrt(n * 0.95 * 0.05 / 4.0)
    p = math.erfc(abs(d) / math.sqrt(2.0))
    return _result("dft_spectral", d, p, alpha, below_threshold=n1, expected=n0)


# ---------------------------------------------------------------------------
# template tests


def _template_value(template) -> tuple:
    if isinstance(template, str):
        if set(template) - {"0", "1"}:
            raise ShapeError("template must be a 0/1 string")
        arr = np.fromiter((int(c) for c in template), dtype=np.uint8)
    else:
        arr = np.asarray(template, dtype=np.uint8).ravel()
    value = 0
    for bit in arr:
        value = (value << 1) | int(bit)
    return value, arr.size


def _count_nonoverlapping(block: np.ndarray, value: int, m: int) -> int:
    """Occurrences of an m-bit template, greedy left-to-right, no overlap."""
    hits = np.flatnonzero(_windowed_codes(block, m, cyclic=False) == value)
    w, last = 0, -m
    for pos in hits:
        if pos >= last + m:
            w += 1
            last = pos
    return w


def non_overlapping_template(
    stream, template="000000001", n_blocks: int = 8, alpha: float = ALPHA
) -> TestResult:
    value, m = _template_value(template)
    b = _bits(stream)
    n = b.size
    if n < 10_000:
        return _not_run("non_overlapping_template", f"needs 10000 bits, got {n}")
    block_len = n // n_blocks
    mu = (block_len - m + 1) / 2.0**m
    var = block_len * (1.0 / 2.0**m - (2.0 * m - 1.0) / 2.0 ** (2 * m))
    counts = np.array(
        [
            _count_nonoverlapping(b[j * block_len : (j + 1) * block_len], value, m)
            for j in range(n_blocks)
        ],
        dtype=np.int64,
    )
    chi2 = float(np.sum((counts - mu) ** 2 / var))
    p = float(special.gammaincc(n_blocks / 2.0, chi2 / 2.0))
    return _result(
        "non_overlapping_template", chi2, p, alpha,
        template="".join(str(int(c)) for c in np.binary_repr(value, m)),
        counts=counts, mu=mu,
    )


_OVERLAPPING_PI = (0.364091, 0.185659, 0.139381, 0.100571, 0.070432, 0.139865)


def overlapping_template(
    stream, template=None, block_len: int = 1032, alpha: float = ALPHA
) -> TestResult:
    b = _bits(stream)
    n = b.size
    if n < 1_000_000:
        return _not_run("overlapping_template", f"needs 1000000 bits, got {n}")
    if template is None:
        template = "1" * 9
    value, m = _template_value(template)
    n_blocks = n // block_len
    k = len(_OVERLAPPING_PI) - 1
    codes = _windowed_codes(b[: n_blocks * block_len], m, cyclic=False)
    hit = (codes == value).astype(np.int64)
    # per block: count windows fully inside the block
    per_block = block_len - m + 1
    idx = np.arange(n_blocks * block_len - m + 1)
    block_of = idx // block_len
    inside = idx % block_len < per_block
    counts = np.bincount(block_of[inside], weights=hit[inside], minlength=n_blocks).astype(np.int64)
    nu = np.bincount(np.minimum(counts, k), minlength=k + 1)
    expected = n_blocks * np.asarray(_OVERLAPPING_PI)
    chi2 = float(np.sum((nu - expected) ** 2 / expected))
    p = float(special.gammaincc(k / 2.0, chi2 / 2.0))
    return _result(
        "overlapping_template", chi2, p, alpha, nu=nu, n_blocks=n_blocks, template=template
    )


# ---------------------------------------------------------------------------
# universal statistical test

_UNIVERSAL_TABLE = {
    # L: (expected value, variance)
    6: (5.2177052, 2.954),
    7: (6.1962507, 3.125),
    8: (7.1836656, 3.238),
    9: (8.1764248, 3.311),
    10: (9.1723243, 3.356),
    11: (10.170032, 3.384),
    12: (11.168765, 3.401),
    13: (12.168070, 3.410),
    14: (13.167693, 3.416),
    15: (14.167488, 3.419),
    16: (15.167379, 3.421),
}

_UNIVERSAL_THRESHOLDS = (
    (387_840, 6),
    (904_960, 7),
    (2_068_480, 8),
    (4_654_080, 9),
    (10_342_400, 10),
    (22_753_280, 11),
    (49_643_520, 12),
    (107_560_960, 13),
    (231_669_760, 14),
    (496_435_200, 15),
    (1_059_061_760, 16),
)


def maurer_universal(stream, alpha: float = ALPHA) -> TestResult:
    b = _bits(stream)
    n = b.size
    if n < _UNIVERSAL_THRESHOLDS[0][0]:
        return _not_run("maurer_universal", f"needs {_UNIVERSAL_THRESHOLDS[0][0]} bits, got {n}")
    level = max(lv for thresh, lv in _UNIVERSAL_THRESHOLDS if n >= thresh)
    q = 10 * 2**level
    n_blocks = n // level
    k = n_blocks - q
    weights = 1 << np.arange(level - 1, -1, -1)
    vals = b[: n_blocks * level].reshape(n_blocks, level) @ weights
    # previous occurrence of each value, 1-based; zero means "never seen"
    order = np.argsort(vals, kind="stable")
    sv = vals[order]
    prev = np.zeros(n_blocks, dtype=np.int64)
    same = np.flatnonzero(sv[1:] == sv[:-1]) + 1
    prev[order[same]] = order[same - 1] + 1
    pos = np.arange(1, n_blocks + 1)
    gaps = (pos - prev)[q:]
    fn = float(np.log2(gaps).sum() / k)
    mu, var = _UNIVERSAL_TABLE[level]
    c = 0.7 - 0.8 / level + (4.0 + 32.0 / level) * k ** (-3.0 / level) / 15.0
    sigma = c * math.sqrt(var / k)
    p = math.erfc(abs(fn - mu) / (math.sqrt(2.0) * sigma))
    return _result("maurer_universal", fn, p, alpha, L=level, Q=q, K=k, mu=mu)


# ---------------------------------------------------------------------------
# pattern-entropy family


def _psi_sq(b: np.ndarray, m: int) -> float:
    if m == 0:
        return 0.0
    counts = np.bincount(_windowed_codes(b, m, cyclic=True), minlength=2**m)
    n = b.size
    return float(2.0**m / n * np.dot(counts, counts) - n)


def approximate_entropy(stream, m: int = 10, alpha: float = ALPHA) -> TestResult:
    b = _bits(stream)
    n = b.size
    if n < 2 ** (m + 5):
        return _not_run("approximate_entropy", f"needs {2 ** (m + 5)} bits for m={m}")

    def phi(mm: int) -> float:
        counts = np.bincount(_windowed_codes(b, mm, cyclic=True), minlength=2**mm)
        frac = counts[counts > 0] / n
        return float(np.dot(frac, np.log(frac)))

    apen = phi(m) - phi(m + 1)
    chi2 = 2.0 * n * (math.log(2.0) - apen)
    p = float(special.gammaincc(2.0 ** (m - 1), chi2 / 2.0))
    return _result("approximate_entropy", chi2, p, alpha, apen=apen, m=m)


def serial(stream, m: int = 16, alpha: float = ALPHA) -> TestResult:
    b = _bits(stream)
    n = b.size
    if n < 2 ** (m + 2):
        return _not_run("serial", f"needs {2 ** (m + 2)} bits for m={m}")
    psi_m = _psi_sq(b, m)
    psi_m1 = _psi_sq(b, m - 1)
    psi_m2 = _psi_sq(b, m - 2)
    d1 = psi_m - psi_m1
    d2 = psi_m - 2.0 * psi_m1 + psi_m2
    p1 = float(special.gammaincc(2.0 ** (m - 2), d1 / 2.0))
    p2 = float(special.gammaincc(2.0 ** (m - 3), d2 / 2.0))
    return TestResult(
        name="serial",
        statistic=d1,
        p_value=min(p1, p2),
        passed=bool(min(p1, p2) >= alpha),
        alpha=alpha,
        details={"p1": p1, "p2": p2, "delta1": d1, "delta2": d2, "m": m},
    )


# ---------------------------------------------------------------------------
# linear complexity

_LC_PI = (1 / 96, 1 / 32, 1 / 8, 1 / 2, 1 / 4, 1 / 16, 1 / 48)

try:  # popcount on packed words
    _popcount64 = np.bitwise_count
except AttributeError:  # pragma: no cover - older numpy
    _POP16 = np.array([bin(i).count("1") for i in range(1 << 16)], dtype=np.uint8)

    def _popcount64(a: np.ndarray) -> np.ndarray:
        return _POP16[a.view(np.uint16).reshape(*a.shape, 4)].sum(axis=-1)


def _shift_left_1(words: np.ndarray) -> None:
    """In-place left shift by one bit of little-endian packed rows."""
    carry = words[:, :-1] >> np.uint64(63)
    words <<= np.uint64(1)
    words[:, 1:] |= carry


def berlekamp_massey_lengths(blocks: np.ndarray) -> np.ndarray:
    """LFSR length of every row of a (n_blocks, M) 0/1 array.

    All rows advance through the algorithm in lockstep; polynomials are
    packed into 64-bit words so the per-step work is a handful of
    vectorised bitwise operations.
    """
    blocks = np.asarray(blocks, dtype=np.uint8)
    n_blocks, m_len = blocks.shape
    words = (m_len + 1 + 63) // 64
    c = np.zeros((n_blocks, words), dtype=np.uint64)
    b = np.zeros((n_blocks, words), dtype=np.uint64)
    w = np.zeros((n_blocks, words), dtype=np.uint64)  # reversed bit window
    c[:, 0] = 1
    b[:, 0] = 1
    lengths = np.zeros(n_blocks, dtype=np.int64)
    for n in range(m_len):
        # b holds B(x) * x**(n - m); the textbook starts with m = -1
        _shift_left_1(b)
        _shift_left_1(w)
        w[:, 0] |= blocks[:, n]
        d = (_popcount64(c & w).sum(axis=1) & 1).astype(bool)
        if not d.any():
            continue
        swap = d & (2 * lengths <= n)
        t = c.copy()
        c[d] ^= b[d]
        b[swap] = t[swap]
        lengths[swap] = n + 1 - lengths[swap]
    return lengths


def linear_complexity(stream, block_len: int = 500, alpha: float = ALPHA) -> TestResult:
    b = _bits(stream)
    n = b.size
    if n < 1_000_000:
        return _not_run("linear_complexity", f"needs 1000000 bits, got {n}")
    n_blocks = n // block_len
    lengths = berlekamp_massey_lengths(b[: n_blocks * block_len].reshape(n_blocks, block_len))
    m = block_len
    mu = m / 2.0 + (9.0 + (-1.0) ** (m + 1)) / 36.0 - (m / 3.0 + 2.0 / 9.0) / 2.0**m
    t = (-1.0) ** m * (lengths - mu) + 2.0 / 9.0
    edges = np.array([-np.inf, -2.5, -1.5, -0.5, 0.5, 1.5, 2.5, np.inf])
    nu, _ = np.histogram(t, bins=edges)
    expected = n_blocks * np.asarray(_LC_PI)
    chi2 = float(np.sum((nu - expected) ** 2 / expected))
    p = float(special.gammaincc(len(_LC_PI) / 2.0 - 0.5, chi2 / 2.0))
    return _result("linear_complexity", chi2, p, alpha, nu=nu, n_blocks=n_blocks, mu=mu)


# ---------------------------------------------------------------------------
# random excursions


def _cycle_starts(walk: np.ndarray) -> np.ndarray:
    """Start index of every zero-to-zero cycle of the +-1 walk.

    The count of starts is the standard's J: each return to the origin
    closes a cycle, and a trailing unclosed segment counts as one more.
    """
    zeros = np.flatnonzero(walk == 0)
    starts = np.r_[0, zeros + 1]
    if starts[-1] >= walk.size:
        starts = starts[:-1]  # walk ended on a zero; no trailing cycle
    return starts


def random_excursions(stream, min_cycles: int = 500, alpha: float = ALPHA) -> list:
    """Per-state chi-square of visit-count classes; one result per state.

    A state's result is marked not run when fewer than ``min_cycles``
    cycles visit it, mirroring the J = 500 applicability rule; that rule,
    not a length cutoff, is what gates short streams.
    """
    b = _bits(stream)
    if b.size == 0:
        return [_not_run("random_excursions", "empty stream")]
    walk = np.cumsum(b.astype(np.int64) * 2 - 1)
    starts = _cycle_starts(walk)
    j = starts.size
    out = []
    for x in (-4, -3, -2, -1, 1, 2, 3, 4):
        visits = (walk == x).astype(np.int64)
        per_cycle = np.add.reduceat(visits, starts)
        visited = int(np.count_nonzero(per_cycle))
        if visited < min_cycles:
            r = _not_run(
                "random_excursions",
                f"state {x} visited in {visited} cycles, needs {min_cycles}",
            )
            r.details = {"state": x, "cycles": j, "cycles_visiting": visited}
            out.append(r)
            continue
        nu = np.bincount(np.minimum(per_cycle, 5), minlength=6)
        ax = abs(x)
        pi0 = 1.0 - 1.0 / (2.0 * ax)
        pis = [pi0]
        for k in range(1, 5):
            pis.append(1.0 / (4.0 * ax * ax) * pi0 ** (k - 1))
        pis.append(1.0 / (2.0 * ax) * pi0**4)
        expected = j * np.asarray(pis)
        chi2 = float(np.sum((nu - expected) ** 2 / expected))
        p = float(special.gammaincc(2.5, chi2 / 2.0))
        r = _result(
            "random_excursions", chi2, p, alpha,
            state=x, cycles=j, cycles_visiting=visited, nu=nu,
        )
        out.append(r)
    return out


def random_excursions_variant(stream, min_cycles: int = 500, alpha: float = ALPHA) -> list:
    """Per-state total-visit z test; one result per state, J rule as above."""
    b = _bits(stream)
    if b.size == 0:
        return [_not_run("random_excursions_variant", "empty stream")]
    walk = np.cumsum(b.astype(np.int64) * 2 - 1)
    starts = _cycle_starts(walk)
    j = starts.size
    out = []
    for x in list(range(-9, 0)) + list(range(1, 10)):
        visits = (walk == x).astype(np.int64)
        per_cycle = np.add.reduceat(visits, starts)
        visited = int(np.count_nonzero(per_cycle))
        if visited < min_cycles:
            r = _not_run(
                "random_excursions_variant",
                f"state {x} visited in {visited} cycles, needs {min_cycles}",
            )
            r.details = {"state": x, "cycles": j, "cycles_visiting": visited}
            out.append(r)
            continue
        xi = int(visits.sum())
        p = math.erfc(abs(xi - j) / math.sqrt(2.0 * j * (4.0 * abs(x) - 2.0)))
        r = _result(
            "random_excursions_variant", xi, p, alpha,
            state=x, cycles=j, cycles_visiting=visited,
        )
        out.append(r)
    return out


# ---------------------------------------------------------------------------
# dispatch, conversion, battery

NIST_TESTS = (
    "monobit",
    "block_frequency",
    "cumulative_sums_forward",
    "cumulative_sums_backward",
    "runs",
    "longest_run",
    "matrix_rank",
    "dft_spectral",
    "non_overlapping_template",
    "overlapping_template",
    "maurer_universal",
    "approximate_entropy",
    "serial",
    "linear_complexity",
    "random_excursions",
    "random_excursions_variant",
)


def nist_test(test_id: str, stream, params: NistParams | None = None) -> TestResult:
    """Run one test by name; excursion tests aggregate their per-state rows."""
    p = params or NistParams()
    a = p.alpha
    n = _bits(stream).size
    scalar = {
        "monobit": lambda: monobit(stream, alpha=a),
        "block_frequency": lambda: block_frequency(stream, p.frequency_block_len(n), alpha=a),
        "cumulative_sums_forward": lambda: cumulative_sums(stream, backward=False, alpha=a),
        "cumulative_sums_backward": lambda: cumulative_sums(stream, backward=True, alpha=a),
        "runs": lambda: runs(stream, alpha=a),
        "longest_run": lambda: longest_run(stream, alpha=a),
        "matrix_rank": lambda: matrix_rank(stream, p.matrix_rows, p.matrix_cols, alpha=a),
        "dft_spectral": lambda: dft_spectral(stream, alpha=a),
        "non_overlapping_template": lambda: non_overlapping_template(
            stream, "0" * (p.template_len - 1) + "1", alpha=a
        ),
        "overlapping_template": lambda: overlapping_template(
            stream, "1" * p.template_len, alpha=a
        ),
        "maurer_universal": lambda: maurer_universal(stream, alpha=a),
        "approximate_entropy": lambda: approximate_entropy(stream, p.apen_m, alpha=a),
        "serial": lambda: serial(stream, p.serial_m, alpha=a),
        "linear_complexity": lambda: linear_complexity(stream, p.lc_block_len, alpha=a),
    }
    if test_id in scalar:
        return scalar[test_id]()
    if test_id in ("random_excursions", "random_excursions_variant"):
        fn = random_excursions if test_id == "random_excursions" else random_excursions_variant
        states = fn(stream, p.excursions_min_cycles, alpha=a)
        run = [r for r in states if not r.not_run]
        if not run:
            agg = _not_run(test_id, "no walk state had enough cycles")
        else:
            worst = min(run, key=lambda r: r.p_value)
            agg = TestResult(
                name=test_id,
                statistic=worst.statistic,
                p_value=worst.p_value,
                passed=all(r.passed for r in run),
                alpha=a,
            )
        agg.details = {
            "states_run": len(run),
            "states_total": len(states),
            "per_state": [r.to_dict() for r in states],
        }
        return agg
    raise UnknownTest(f"no bit-domain test named {test_id!r}")


def float_stream_to_bits(seqs, mode: str = "mantissa_drbg", n_bits: int | None = None) -> BitStream:
    """Turn float sequences into a BitStream.

    mantissa_drbg feeds the concatenated raw mantissa bits of all
    sequences into the whitener and draws n_bits (default 2**23) from it.
    threshold emits one bit per float: 1 iff v >= 0.5.
    """
    seqs = list(seqs)
    if not seqs:
        raise InsufficientData("no sequences given")
    if mode == "threshold":
        values = np.concatenate([np.asarray(s.values) for s in seqs])
        bits = (values >= 0.5).astype(np.uint8)
        if n_bits is not None:
            if n_bits > bits.size:
                raise InsufficientData(f"{len(seqs)} sequences give {bits.size} bits")
            bits = bits[:n_bits]
        return BitStream.from_bits(bits)
    if mode == "mantissa_drbg":
        entropy = b"".join(extract_mantissa_bits(s).bits for s in seqs)
        state = instantiate(entropy)
        return generate_bits(state, n_bits if n_bits is not None else 1 << 23)
    raise UnknownTest(f"no conversion mode named {mode!r}")


def nist_battery(streams, params: NistParams | None = None) -> BatteryReport:
    """Run the full subset on every stream; excursion rows are per state."""
    p = params or NistParams()
    streams = list(streams)
    if not streams:
        raise ShapeError("empty stream list")
    report = BatteryReport(battery="nist")
    for i, stream in enumerate(streams):
        subject = str(i)
        for test_id in NIST_TESTS:
            if test_id in ("random_excursions", "random_excursions_variant"):
                fn = random_excursions if test_id == "random_excursions" else random_excursions_variant
                for r in fn(stream, p.excursions_min_cycles, alpha=p.alpha):
                    state = r.details.get("state")
                    r.subject = subject if state is None else f"{subject}:{state:+d}"
                    report.add(r)
            else:
                r = nist_test(test_id, stream, p)
                r.subject = subject
                report.add(r)
    rates = report.pass_rates()
    report.summary = {
        "n_streams": len(streams),
        "pass_rates": rates,
        "miss_rates": report.miss_rates(),
        "not_run": {k: v["n"] - v["n_run"] for k, v in rates.items()},
    }
    return report
