"""The fifteen statistical tests of NIST SP 800-22, on numpy bit arrays.

Each function takes a uint8 array of 0/1 values and returns a list of
p-values (most tests return one; serial and cumulative sums return two,
the excursion tests eight and eighteen, template matching one per
template).  Applicability violations raise TooShort or Inapplicable.

Statistics follow SP 800-22 Rev 1a, including the corrected DFT
variance and the overlapping-template category probabilities.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from ..errors import Inapplicable, TooShort
from ..special import erfc, igamc

LN2 = math.log(2.0)

# Longest-run-of-ones category tables: block length -> (classes, pi).
_LONGEST_RUN_TABLES = {
    8: ((1, 2, 3, 4), (0.2148, 0.3672, 0.2305, 0.1875)),
    128: ((4, 5, 6, 7, 8, 9), (0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124)),
    10000: (
        (10, 11, 12, 13, 14, 15, 16),
        (0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727),
    ),
}

# Overlapping-template category probabilities for lambda = 2 (m=9, M=1032).
_OVERLAPPING_PI = (0.364091, 0.185659, 0.139381, 0.100571, 0.070432, 0.139865)

# Linear-complexity deviation categories.
_LC_PI = (0.010417, 0.03125, 0.125, 0.5, 0.25, 0.0625, 0.020833)

# Maurer's universal test: L -> (expected value, variance).
_UNIVERSAL_TABLE = {
    1: (0.7326495, 0.690),
    2: (1.5374383, 1.338),
    3: (2.4016068, 1.901),
    4: (3.3112247, 2.358),
    5: (4.2534266, 2.705),
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

# Smallest n for which each block size L is selected.
_UNIVERSAL_THRESHOLDS = (
    (1059061760, 16),
    (496435200, 15),
    (231669760, 14),
    (107560960, 13),
    (49643520, 12),
    (22753280, 11),
    (10342400, 10),
    (4654080, 9),
    (2068480, 8),
    (904960, 7),
    (387840, 6),
)

MIN_EXCURSION_CYCLES = 500


def _require(n: int, minimum: int, test: str) -> None:
    if n < minimum:
        raise TooShort(f"{test} needs at least {minimum} bits, got {n}")


def _phi(x: np.ndarray) -> np.ndarray:
    """Standard normal CDF, vectorized."""
    from scipy.special import erfc as _verfc

    return 0.5 * _verfc(-x / math.sqrt(2.0))


def _window_values(bits: np.ndarray, m: int, wrap: bool) -> np.ndarray:
    """Integer value of every (overlapping) m-bit window, MSB first."""
    if wrap:
        ext = np.concatenate([bits, bits[: m - 1]])
        length = bits.size
    else:
        ext = bits
        length = bits.size - m + 1
    vals = np.zeros(length, dtype=np.int64)
    for j in range(m):
        vals = (vals << 1) | ext[j : j + length]
    return vals


# -- 1. frequency (monobit) ------------------------------------------------


def frequency(bits: np.ndarray, enforce_min_length: bool = True) -> list[float]:
    n = bits.size
    if enforce_min_length:
        _require(n, 100, "frequency test")
    elif n == 0:
        raise TooShort("frequency test needs a non-empty sequence")
    s = 2 * int(bits.sum()) - n
    return [erfc(abs(s) / math.sqrt(2.0 * n))]


# -- 2. block frequency ------------------------------------------------------


def block_frequency(bits: np.ndarray, block: int) -> list[float]:
    n = bits.size
    _require(n, 100, "block frequency test")
    nblocks = n // block
    if nblocks < 1:
        raise TooShort(f"block frequency test needs one {block}-bit block, got {n} bits")
    pi = bits[: nblocks * block].reshape(nblocks, block).mean(axis=1)
    chi2 = 4.0 * block * float(((pi - 0.5) ** 2).sum())
    return [igamc(nblocks / 2.0, chi2 / 2.0)]


# -- 3. runs -----------------------------------------------------------------


def runs(bits: np.ndarray) -> list[float]:
    n = bits.size
    _require(n, 100, "runs test")
    pi = bits.mean()
    if abs(pi - 0.5) >= 2.0 / math.sqrt(n):
        return [0.0]
    v = 1 + int((bits[1:] != bits[:-1]).sum())
    num = abs(v - 2.0 * n * pi * (1.0 - pi))
    den = 2.0 * math.sqrt(2.0 * n) * pi * (1.0 - pi)
    return [erfc(num / den)]


# -- 4. longest run of ones --------------------------------------------------


def longest_run(bits: np.ndarray) -> list[float]:
    n = bits.size
    _require(n, 128, "longest-run test")
    if n < 6272:
        block = 8
    elif n < 750000:
        block = 128
    else:
        block = 10000
    classes, pi = _LONGEST_RUN_TABLES[block]
    nblocks = n // block
    mat = bits[: nblocks * block].reshape(nblocks, block)
    running = np.zeros(nblocks, dtype=np.int32)
    best = np.zeros(nblocks, dtype=np.int32)
    for j in range(block):
        running = (running + 1) * mat[:, j]
        np.maximum(best, running, out=best)
    edges = np.array(classes)
    cats = np.clip(np.searchsorted(edges, best, side="left"), 0, len(classes) - 1)
    nu = np.bincount(cats, minlength=len(classes)).astype(float)
    expected = nblocks * np.asarray(pi)
    chi2 = float((((nu - expected) ** 2) / expected).sum())
    return [igamc((len(classes) - 1) / 2.0, chi2 / 2.0)]


# -- 5. binary matrix rank ---------------------------------------------------


def _gf2_rank(rows: np.ndarray) -> int:
    pivots: dict[int, int] = {}
    rank = 0
    for value in rows:
        cur = int(value)
        while cur:
            hb = cur.bit_length() - 1
            if hb in pivots:
                cur ^= pivots[hb]
            else:
                pivots[hb] = cur
                rank += 1
                break
    return rank


@lru_cache(maxsize=4)
def _rank_probabilities(m: int, q: int) -> tuple[float, float, float]:
    def prob(r: int) -> float:
        exponent = r * (m + q - r) - m * q
        prod = 1.0
        for i in range(r):
            prod *= (1.0 - 2.0 ** (i - m)) * (1.0 - 2.0 ** (i - q)) / (
                1.0 - 2.0 ** (i - r)
            )
        return 2.0**exponent * prod

    full = prob(min(m, q))
    minus1 = prob(min(m, q) - 1)
    return full, minus1, 1.0 - full - minus1


def binary_matrix_rank(bits: np.ndarray, m: int = 32, q: int = 32) -> list[float]:
    n = bits.size
    _require(n, 38 * m * q, "matrix rank test")
    nmat = n // (m * q)
    mats = bits[: nmat * m * q].reshape(nmat, m, q)
    packed = np.packbits(mats, axis=2, bitorder="little")
    words = packed.reshape(nmat, m, q // 8).astype(np.uint32)
    shifts = np.arange(q // 8, dtype=np.uint32) * 8
    rows = (words << shifts).sum(axis=2, dtype=np.uint64)
    p_full, p_minus1, p_rest = _rank_probabilities(m, q)
    full = minus1 = 0
    r_max = min(m, q)
    for i in range(nmat):
        r = _gf2_rank(rows[i])
        if r == r_max:
            full += 1
        elif r == r_max - 1:
            minus1 += 1
    rest = nmat - full - minus1
    chi2 = (
        (full - nmat * p_full) ** 2 / (nmat * p_full)
        + (minus1 - nmat * p_minus1) ** 2 / (nmat * p_minus1)
        + (rest - nmat * p_rest) ** 2 / (nmat * p_rest)
    )
    return [math.exp(-chi2 / 2.0)]


# -- 6. discrete Fourier transform -------------------------------------------


def dft(bits: np.ndarray) -> list[float]:
    n = bits.size
    _require(n, 1000, "spectral test")
    x = 2.0 * bits.astype(np.float64) - 1.0
    moduli = np.abs(np.fft.rfft(x))[: n // 2]
    threshold = math.sqrt(n * math.log(1.0 / 0.05))
    n0 = 0.95 * n / 2.0
    n1 = int((moduli < threshold).sum())
    d = (n1 - n0) / math.sqrt(n * 0.95 * 0.05 / 4.0)
    return [erfc(abs(d) / math.sqrt(2.0))]


# -- 7. non-overlapping template matching -------------------------------------


@lru_cache(maxsize=4)
def aperiodic_templates(m: int) -> tuple[tuple[int, ...], ...]:
    """All aperiodic m-bit templates, ascending by value (MSB first)."""
    out = []
    for value in range(2**m):
        tpl = tuple((value >> (m - 1 - j)) & 1 for j in range(m))
        if all(tpl[s:] != tpl[: m - s] for s in range(1, m)):
            out.append(tpl)
    return tuple(out)


def _template_value(tpl: tuple[int, ...]) -> int:
    v = 0
    for b in tpl:
        v = (v << 1) | b
    return v


def non_overlapping_templates(
    bits: np.ndarray, m: int = 9, profile: str = "full", n_blocks: int = 8
) -> list[float]:
    n = bits.size
    _require(n, n_blocks * (2**m + m - 1), "non-overlapping template test")
    block = n // n_blocks
    templates = aperiodic_templates(m)
    if profile == "reduced":
        templates = templates[:2]
    elif profile != "full":
        raise ValueError(f"unknown template profile {profile!r}")
    mean = (block - m + 1) / 2.0**m
    var = block * (1.0 / 2.0**m - (2.0 * m - 1.0) / 2.0 ** (2 * m))
    windows = _window_values(bits[: n_blocks * block], m, wrap=False)
    limit = block - m  # last in-block window offset
    pvalues = []
    for tpl in templates:
        positions = np.flatnonzero(windows == _template_value(tpl))
        offsets = positions % block
        valid = positions[offsets <= limit]
        blocks_of = valid // block
        counts = np.zeros(n_blocks, dtype=np.int64)
        nxt = -1
        prev_block = -1
        for pos, blk in zip(valid.tolist(), blocks_of.tolist()):
            if blk != prev_block:
                nxt = -1
                prev_block = blk
            if pos >= nxt:
                counts[blk] += 1
                nxt = pos + m
        chi2 = float((((counts - mean) ** 2) / var).sum())
        pvalues.append(igamc(n_blocks / 2.0, chi2 / 2.0))
    return pvalues


# -- 8. overlapping template matching ------------------------------------------


def overlapping_template(bits: np.ndarray, m: int = 9, block: int = 1032) -> list[float]:
    n = bits.size
    _require(n, 10**6, "overlapping template test")
    if m != 9 or block != 1032:
        raise Inapplicable(
            "overlapping-template category probabilities are tabulated for "
            "m=9, block=1032"
        )
    nblocks = n // block
    windows = _window_values(bits[: nblocks * block], m, wrap=False)
    hits = windows == (2**m - 1)
    nu = np.zeros(6, dtype=np.int64)
    per_block = block - m + 1
    for j in range(nblocks):
        count = int(hits[j * block : j * block + per_block].sum())
        nu[min(count, 5)] += 1
    expected = nblocks * np.asarray(_OVERLAPPING_PI)
    chi2 = float((((nu - expected) ** 2) / expected).sum())
    return [igamc(5.0 / 2.0, chi2 / 2.0)]


# -- 9. Maurer's universal statistical test ------------------------------------


def universal(bits: np.ndarray, L: int | None = None, Q: int | None = None) -> list[float]:
    n = bits.size
    _require(n, 387840, "universal test")
    if L is None:
        for threshold, candidate in _UNIVERSAL_THRESHOLDS:
            if n >= threshold:
                L = candidate
                break
    if L not in _UNIVERSAL_TABLE:
        raise Inapplicable(f"universal test block length {L} is not tabulated")
    if Q is None:
        Q = 10 * 2**L
    nblocks = n // L
    K = nblocks - Q
    if K < 1000:
        raise Inapplicable("universal test needs more initialization blocks than data")
    powers = 1 << np.arange(L - 1, -1, -1, dtype=np.int64)
    vals = bits[: nblocks * L].reshape(nblocks, L).astype(np.int64) @ powers
    order = np.argsort(vals, kind="stable")
    sv = vals[order]
    prev = np.zeros(nblocks, dtype=np.int64)
    if nblocks > 1:
        same = sv[1:] == sv[:-1]
        prev[order[1:]] = np.where(same, order[:-1] + 1, 0)
    dist = np.arange(1, nblocks + 1, dtype=np.int64) - prev
    f = float(np.log2(dist[Q:]).sum()) / K
    expected, variance = _UNIVERSAL_TABLE[L]
    c = 0.7 - 0.8 / L + (4.0 + 32.0 / L) * K ** (-3.0 / L) / 15.0
    sigma = c * math.sqrt(variance / K)
    return [erfc(abs(f - expected) / (math.sqrt(2.0) * sigma))]


# -- 10. linear complexity ------------------------------------------------------


def berlekamp_massey_length(s: int, length: int) -> int:
    """Length of the shortest LFSR generating the bit sequence.

    ``s`` packs the sequence as sum(bit_i << i).  Incremental-products
    formulation: the discrepancy is read off a running product register
    instead of being recomputed, which keeps the loop O(1) big-int ops.
    """
    sb, sc = s, s
    deg_c = 0
    m = 0
    for n in range(length):
        disc = sc & (1 << m)
        m += 1
        if disc:
            sc >>= m
            m = 0
            if 2 * deg_c <= n:
                sb, sc = sc, sb
                deg_c = n + 1 - deg_c
            sc ^= sb
    return deg_c


def linear_complexity(bits: np.ndarray, block: int = 1000) -> list[float]:
    n = bits.size
    _require(n, 10**6, "linear complexity test")
    nblocks = n // block
    packed = np.packbits(bits[: nblocks * block].reshape(nblocks, block),
                         axis=1, bitorder="little")
    mu = (
        block / 2.0
        + (9.0 + (-1.0) ** (block + 1)) / 36.0
        - (block / 3.0 + 2.0 / 9.0) / 2.0**block
    )
    sign = 1.0 if block % 2 == 0 else -1.0
    nu = np.zeros(7, dtype=np.int64)
    for i in range(nblocks):
        s = int.from_bytes(packed[i].tobytes(), "little")
        l = berlekamp_massey_length(s, block)
        t = sign * (l - mu) + 2.0 / 9.0
        if t <= -2.5:
            nu[0] += 1
        elif t > 2.5:
            nu[6] += 1
        else:
            nu[int(math.floor(t + 2.5)) + 1] += 1
    expected = nblocks * np.asarray(_LC_PI)
    chi2 = float((((nu - expected) ** 2) / expected).sum())
    return [igamc(3.0, chi2 / 2.0)]


# -- 11. serial -------------------------------------------------------------------


def _psi_squared(bits: np.ndarray, m: int) -> float:
    if m == 0:
        return 0.0
    counts = np.bincount(_window_values(bits, m, wrap=True), minlength=2**m)
    n = bits.size
    return float(2.0**m / n * (counts.astype(np.float64) ** 2).sum() - n)


def serial(bits: np.ndarray, m: int = 10) -> list[float]:
    n = bits.size
    if m < 2:
        raise ValueError("serial test needs m >= 2")
    if n < 2 ** (m + 2):
        raise TooShort(f"serial test with m={m} needs at least {2**(m+2)} bits")
    psi_m = _psi_squared(bits, m)
    psi_m1 = _psi_squared(bits, m - 1)
    psi_m2 = _psi_squared(bits, m - 2)
    d1 = max(psi_m - psi_m1, 0.0)
    d2 = max(psi_m - 2.0 * psi_m1 + psi_m2, 0.0)
    return [
        igamc(2.0 ** (m - 2), d1 / 2.0),
        igamc(2.0 ** (m - 3), d2 / 2.0),
    ]


# -- 12. approximate entropy -------------------------------------------------------


def approximate_entropy(bits: np.ndarray, m: int = 10) -> list[float]:
    n = bits.size
    if n < 2 ** (m + 5):
        raise TooShort(
            f"approximate entropy test with m={m} needs at least {2**(m+5)} bits"
        )

    def phi(mm: int) -> float:
        counts = np.bincount(_window_values(bits, mm, wrap=True), minlength=2**mm)
        pi = counts[counts > 0].astype(np.float64) / n
        return float((pi * np.log(pi)).sum())

    apen = phi(m) - phi(m + 1)
    chi2 = max(2.0 * n * (LN2 - apen), 0.0)
    return [igamc(2.0 ** (m - 1), chi2 / 2.0)]


# -- 13. cumulative sums ------------------------------------------------------------


def _cusum_p(z: int, n: int) -> float:
    sn = math.sqrt(n)
    k1 = np.arange(math.floor((-n / z + 1) / 4), math.floor((n / z - 1) / 4) + 1)
    term1 = (_phi((4 * k1 + 1) * z / sn) - _phi((4 * k1 - 1) * z / sn)).sum()
    k2 = np.arange(math.floor((-n / z - 3) / 4), math.floor((n / z - 1) / 4) + 1)
    term2 = (_phi((4 * k2 + 3) * z / sn) - _phi((4 * k2 + 1) * z / sn)).sum()
    return float(1.0 - term1 + term2)


def cumulative_sums(bits: np.ndarray) -> list[float]:
    n = bits.size
    _require(n, 100, "cumulative sums test")
    steps = 2 * bits.astype(np.int64) - 1
    out = []
    for direction in (steps, steps[::-1]):
        z = int(np.abs(np.cumsum(direction)).max())
        out.append(min(1.0, max(0.0, _cusum_p(z, n))))
    return out


# -- 14/15. random excursions --------------------------------------------------------


def _excursion_walk(bits: np.ndarray):
    s = np.cumsum(2 * bits.astype(np.int64) - 1)
    zero_idx = np.flatnonzero(s == 0)
    j = int(zero_idx.size) + (1 if s.size and s[-1] != 0 else 0)
    return s, zero_idx, j


def random_excursions(bits: np.ndarray) -> list[float]:
    n = bits.size
    _require(n, 100, "random excursions test")
    s, zero_idx, j = _excursion_walk(bits)
    if j < MIN_EXCURSION_CYCLES:
        raise Inapplicable(
            f"random excursions test needs {MIN_EXCURSION_CYCLES} cycles, got {j}"
        )
    states = np.array([-4, -3, -2, -1, 1, 2, 3, 4])
    sel = (s != 0) & (np.abs(s) <= 4)
    cycle_of = np.searchsorted(zero_idx, np.flatnonzero(sel), side="left")
    value = s[sel]
    state_index = np.where(value < 0, value + 4, value + 3)
    counts = np.zeros((j, 8), dtype=np.int64)
    np.add.at(counts, (cycle_of, state_index), 1)
    pvalues = []
    for idx, x in enumerate(states):
        ax = abs(int(x))
        visits = np.bincount(np.minimum(counts[:, idx], 5), minlength=6)
        p0 = 1.0 - 1.0 / (2.0 * ax)
        pi = [p0]
        for k in range(1, 5):
            pi.append(1.0 / (4.0 * ax * ax) * p0 ** (k - 1))
        pi.append(1.0 / (2.0 * ax) * p0**4)
        expected = j * np.asarray(pi)
        chi2 = float((((visits - expected) ** 2) / expected).sum())
        pvalues.append(igamc(5.0 / 2.0, chi2 / 2.0))
    return pvalues


def random_excursions_variant(bits: np.ndarray) -> list[float]:
    n = bits.size
    _require(n, 100, "random excursions variant test")
    s, _, j = _excursion_walk(bits)
    if j < MIN_EXCURSION_CYCLES:
        raise Inapplicable(
            f"random excursions variant test needs {MIN_EXCURSION_CYCLES} cycles, got {j}"
        )
    clipped = s[(s != 0) & (np.abs(s) <= 9)]
    counts = np.bincount(clipped + 9, minlength=19)
    pvalues = []
    for x in list(range(-9, 0)) + list(range(1, 10)):
        xi = counts[x + 9]
        pvalues.append(erfc(abs(int(xi) - j) / math.sqrt(2.0 * j * (4.0 * abs(x) - 2.0))))
    return pvalues
