"""Photonic RNG simulators, extractors, and statistical evaluation."""

from .analysis import (
    HistogramSpec,
    MedianProfile,
    PassRates,
    ThresholdRow,
    aggregate_histogram,
    balance_threshold,
    mae,
    median_profile,
    pass_rates_from_reports,
    subsequence_pass_rates,
    threshold_table,
)
from .bitstream import (
    BalanceStats,
    BitSequence,
    balance,
    balance_stats,
    chunk,
    discrepancy,
    read_bits,
    write_bits,
)
from .extractors import (
    BabkinCodec,
    ExtractionStats,
    babkin_encode_subseq,
    babkin_number,
    babkin_stream,
    binomial,
    block_decompose,
    digital_mix,
    von_neumann,
)
from .physics import (
    HomFit,
    PhotocountHistogram,
    hom_fit,
    photocount_histogram,
    sample_photocounts,
    spectral_width,
)
from .sources import (
    CoherentSourceConfig,
    GenerationLog,
    HeraldedSourceConfig,
    HybridSourceConfig,
    emission_probability,
    event_rate,
    multiphoton_prob,
    rebalance_offset,
    simulate_coherent,
    simulate_coherent_bits,
    simulate_heralded,
    simulate_hybrid,
    simulate_hybrid_with_log,
    software_source,
)
from .stattests import (
    TestOutcome,
    TestParams,
    TestReport,
    frequency_test,
    run_battery,
    run_test,
)

__version__ = "0.1.0"
