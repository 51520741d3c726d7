"""Test roster, category grouping, and per-test parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

TEST_IDS = tuple(range(1, 16))

TEST_NAMES = {
    1: "Frequency",
    2: "Block Frequency",
    3: "Runs",
    4: "Longest Run of Ones",
    5: "Binary Matrix Rank",
    6: "Discrete Fourier Transform",
    7: "Non-overlapping Template Matching",
    8: "Overlapping Template Matching",
    9: "Maurer's Universal Statistical",
    10: "Linear Complexity",
    11: "Serial",
    12: "Approximate Entropy",
    13: "Cumulative Sums",
    14: "Random Excursions",
    15: "Random Excursions Variant",
}

CATEGORY_LABELS = {
    "I": "Balance",
    "II": "Template",
    "III": "Complexity",
    "IV": "Spectral",
    "V": "Structural",
}

# The cumulative-sums test (13) spans both the balance and structural groups.
TEST_CATEGORIES = {
    1: ("I",),
    2: ("I",),
    3: ("I",),
    4: ("I",),
    5: ("V",),
    6: ("IV",),
    7: ("II",),
    8: ("II",),
    9: ("III",),
    10: ("III",),
    11: ("II",),
    12: ("II",),
    13: ("I", "V"),
    14: ("V",),
    15: ("V",),
}


@dataclass(frozen=True)
class TestParams:
    """Parameters for one battery run.

    ``for_length`` picks sizes appropriate to the sequence length; at
    the working length of 2e6 bits that means a 20000-bit frequency
    block, 9-bit templates, 32x32 rank matrices, 1000-bit linear
    complexity blocks, universal-test L=7/Q=1280, and m=10 for the
    serial and approximate-entropy tests.
    """

    __test__ = False  # not a pytest class, despite the name

    block_frequency_block: int = 20000
    template_length: int = 9
    template_profile: str = "full"  # "full" = all aperiodic templates, "reduced" = 2
    overlapping_template_length: int = 9
    overlapping_block: int = 1032
    rank_rows: int = 32
    rank_cols: int = 32
    linear_complexity_block: int = 1000
    universal_l: int | None = None  # None = select from the sequence length
    universal_q: int | None = None
    serial_m: int = 10
    apen_m: int = 10

    @classmethod
    def for_length(cls, n: int, template_profile: str = "full") -> "TestParams":
        log2n = int(math.log2(n)) if n >= 2 else 1
        return cls(
            block_frequency_block=max(20, n // 100),
            template_profile=template_profile,
            serial_m=min(10, max(2, log2n - 3)),
            apen_m=min(10, max(1, log2n - 6)),
        )

    def reduced(self) -> "TestParams":
        return replace(self, template_profile="reduced")

    def as_dict(self) -> dict:
        return {
            "block_frequency_block": self.block_frequency_block,
            "template_length": self.template_length,
            "template_profile": self.template_profile,
            "overlapping_template_length": self.overlapping_template_length,
            "overlapping_block": self.overlapping_block,
            "rank_rows": self.rank_rows,
            "rank_cols": self.rank_cols,
            "linear_complexity_block": self.linear_complexity_block,
            "universal_l": self.universal_l,
            "universal_q": self.universal_q,
            "serial_m": self.serial_m,
            "apen_m": self.apen_m,
        }
