"""Evaluation arithmetic over battery reports.

Median p-value profiles, the Maurer-normalized mean absolute error,
pooled p-value histograms, per-test subsequence pass rates, and the
balance-threshold solver behind the Stokes-parameter table.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from statistics import median

import numpy as np

from .bitstream import BitSequence
from .errors import DomainError, EmptyProfile, TooShort
from .special import erfcinv
from .stattests import (
    CATEGORY_LABELS,
    TEST_CATEGORIES,
    TEST_IDS,
    TEST_NAMES,
    TestParams,
    TestReport,
    run_battery,
)

MAURER_TEST_ID = 9
PASS_ALPHA = 0.01

# Reference polarization tomography data (measured, for reporting only):
# N -> (balance column, S_0, S_x, S_y, S_z).  The source table headed the
# second column (N-|D|)/(N+|D|) yet lists values above 1; it is treated
# here as the balance ratio (N+|D|)/(N-|D|), the reading consistent with
# the threshold relation the rows satisfy.
TABLE1_STOKES = {
    10**2: (1.7, 1.0, 0.96399, 0.07258, 0.25584),
    10**3: (1.18, 1.0, 0.99585, 0.02621, 0.08719),
    10**4: (1.05, 1.0, 0.99956, 0.01548, 0.02518),
    10**5: (1.016, 1.0, 0.99988, 0.01274, 0.00828),
    10**6: (1.005, 1.0, 0.99991, 0.01261, 0.00254),
    10**7: (1.0016, 1.0, 0.99992, 0.01258, 0.00082),
}


@dataclass(frozen=True)
class MedianProfile:
    """Per-test median p-value over a collection of reports.

    Tests with several p-values per sequence are reduced to their
    within-sequence median first, then the medians are taken across
    sequences.  Only tests applicable in at least one report appear.
    """

    medians: dict[int, float]

    def normalized(self) -> dict[int, float]:
        """Medians with Maurer's test halved (its nominal target is 1)."""
        out = dict(self.medians)
        if MAURER_TEST_ID in out:
            out[MAURER_TEST_ID] = out[MAURER_TEST_ID] / 2.0
        return out

    def as_dict(self) -> dict:
        return {
            "tests": [
                {
                    "id": tid,
                    "name": TEST_NAMES[tid],
                    "categories": list(TEST_CATEGORIES[tid]),
                    "median_p": self.medians[tid],
                }
                for tid in sorted(self.medians)
            ]
        }


def median_profile(reports: list[TestReport]) -> MedianProfile:
    if not reports:
        raise EmptyProfile("no reports to profile")
    per_test: dict[int, list[float]] = {}
    for report in reports:
        for oc in report.outcomes:
            if oc.applicable and oc.p_values:
                per_test.setdefault(oc.test_id, []).append(oc.median_p())
    if not per_test:
        raise EmptyProfile("no applicable test results in any report")
    return MedianProfile({tid: float(median(vals)) for tid, vals in per_test.items()})


def mae(profile: MedianProfile) -> float:
    """Mean absolute deviation of the normalized medians from 0.5."""
    normalized = profile.normalized()
    if not normalized:
        raise EmptyProfile("profile holds no medians")
    return sum(abs(p - 0.5) for p in normalized.values()) / len(normalized)


@dataclass
class HistogramSpec:
    """p-value histogram: left-closed bins, final bin closed at 1.0."""

    bin_count: int = 20
    counts: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    total: int = 0

    @property
    def bin_width(self) -> float:
        return 1.0 / self.bin_count

    @property
    def uniform_expectation(self) -> float:
        return self.total / self.bin_count

    def chi_squared(self) -> float:
        if self.total == 0:
            raise EmptyProfile("empty histogram")
        e = self.uniform_expectation
        return float((((self.counts - e) ** 2) / e).sum())

    def edges(self) -> list[tuple[float, float]]:
        w = self.bin_width
        return [(i * w, (i + 1) * w) for i in range(self.bin_count)]


def aggregate_histogram(
    reports: list[TestReport], spec: HistogramSpec | None = None
) -> HistogramSpec:
    """Pool every p-value from every applicable test into the bins."""
    if not reports:
        raise EmptyProfile("no reports to aggregate")
    spec = spec or HistogramSpec()
    pooled: list[float] = []
    for report in reports:
        pooled.extend(report.pooled_p_values())
    values = np.asarray(pooled)
    idx = np.minimum(
        (values / (1.0 / spec.bin_count)).astype(np.int64), spec.bin_count - 1
    )
    spec.counts = np.bincount(idx, minlength=spec.bin_count).astype(np.int64)
    spec.total = values.size
    return spec


@dataclass(frozen=True)
class PassRates:
    """Per-test percentage of subsequences passing at the given alpha."""

    alpha: float
    subsequences: int
    rates: dict[int, float]  # test id -> percentage over applicable subsequences
    applicable: dict[int, int]  # test id -> number of subsequences it ran on

    def by_category(self) -> dict[str, dict[int, float]]:
        grouped: dict[str, dict[int, float]] = {c: {} for c in CATEGORY_LABELS}
        for tid, rate in self.rates.items():
            for cat in TEST_CATEGORIES[tid]:
                grouped[cat][tid] = rate
        return grouped


def pass_rates_from_reports(
    reports: list[TestReport], alpha: float = PASS_ALPHA
) -> PassRates:
    """Fraction of reports in which each test passes (median rule)."""
    if not reports:
        raise EmptyProfile("no reports")
    passes: dict[int, int] = {tid: 0 for tid in TEST_IDS}
    ran: dict[int, int] = {tid: 0 for tid in TEST_IDS}
    for report in reports:
        for oc in report.outcomes:
            if oc.applicable:
                ran[oc.test_id] += 1
                if oc.passed(alpha):
                    passes[oc.test_id] += 1
    rates = {
        tid: 100.0 * passes[tid] / ran[tid] for tid in TEST_IDS if ran[tid] > 0
    }
    return PassRates(
        alpha=alpha,
        subsequences=len(reports),
        rates=rates,
        applicable={tid: ran[tid] for tid in TEST_IDS if ran[tid] > 0},
    )


def subsequence_pass_rates(
    seq: BitSequence,
    sub_len: int,
    alpha: float = PASS_ALPHA,
    params: TestParams | None = None,
) -> PassRates:
    """Split into disjoint subsequences, run the battery on each, tally passes."""
    if sub_len < 100:
        raise TooShort("subsequence length must be at least 100 bits")
    if len(seq) < sub_len:
        raise TooShort(
            f"sequence of {len(seq)} bits cannot yield a {sub_len}-bit subsequence"
        )
    params = params or TestParams.for_length(sub_len)
    arr = seq.array
    count = len(seq) // sub_len
    reports = []
    for i in range(count):
        part = BitSequence.from_array(arr[i * sub_len : (i + 1) * sub_len])
        reports.append(run_battery(part, params, sequence_id=f"sub_{i:04d}"))
    return pass_rates_from_reports(reports, alpha)


@dataclass(frozen=True)
class ThresholdRow:
    """Worst acceptable balance (and |S_z|) for a given sequence length."""

    length: int
    b_max: float
    sz_max: float


def balance_threshold(n: int, alpha: float = PASS_ALPHA) -> ThresholdRow:
    """Solve erfc(sqrt(N/2) * (B-1)/(B+1)) = alpha for the balance bound.

    The ratio rho = (B-1)/(B+1) equals the largest |S_z| the detector
    split may show while the frequency test still passes at alpha.
    """
    if n < 2:
        raise DomainError("threshold needs a sequence length of at least 2")
    rho = erfcinv(alpha) / math.sqrt(n / 2.0)
    if rho >= 1.0:
        raise DomainError(
            f"no passing balance exists for N={n} at alpha={alpha} (ratio >= 1)"
        )
    return ThresholdRow(length=n, b_max=(1.0 + rho) / (1.0 - rho), sz_max=rho)


def threshold_table(lengths, alpha: float = PASS_ALPHA) -> list[ThresholdRow]:
    return [balance_threshold(int(n), alpha) for n in lengths]


# -- delimited output ------------------------------------------------------


def write_histogram_csv(hist: HistogramSpec, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_lo", "bin_hi", "count", "uniform_expectation"])
        for (lo, hi), count in zip(hist.edges(), hist.counts):
            writer.writerow([f"{lo:.2f}", f"{hi:.2f}", int(count), hist.uniform_expectation])


def write_pass_rates_csv(rates: PassRates, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["test_id", "name", "categories", "applicable", "pass_rate_pct"])
        for tid in sorted(rates.rates):
            writer.writerow(
                [
                    tid,
                    TEST_NAMES[tid],
                    "+".join(TEST_CATEGORIES[tid]),
                    rates.applicable[tid],
                    f"{rates.rates[tid]:.2f}",
                ]
            )


def write_threshold_csv(rows: list[ThresholdRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["N", "b_max", "sz_max"])
        for row in rows:
            writer.writerow([row.length, f"{row.b_max:.6f}", f"{row.sz_max:.6f}"])
