"""Acceptance suite: one test per exit criterion, at stated tolerance.

Each test prints one ``ACCEPTANCE <id> <PASS/FAIL>`` line (visible with
``pytest -s``; the -v test list carries the same information).  Two
sub-criteria assert published reference numbers that conflict with
their own defining formulas; they are implemented faithfully and marked
strict-xfail, with the analysis recorded in the project notes:

* 03b: the tomography S_z column is measured data and deviates from the
  erfc-inversion by up to 5.7e-3, far beyond the 1e-4 tolerance.
* 13b: lambda0^2/(2 pi w) = 6.5263 nm, 0.41% from the rounded 6.5 nm
  quote, beyond the 0.1% tolerance.
"""

import math
from itertools import combinations

import numpy as np
import pytest
from scipy.stats import chi2 as chi2_dist

from photonrng.analysis import (
    TABLE1_STOKES,
    aggregate_histogram,
    balance_threshold,
    mae,
    median_profile,
)
from photonrng.bitstream import BitSequence
from photonrng.errors import Inapplicable, TooShort
from photonrng.extractors import BabkinCodec, binomial, digital_mix, von_neumann
from photonrng.physics import (
    dip_model,
    hom_fit,
    photocount_histogram,
    sample_photocounts,
    spectral_width,
)
from photonrng.sources import (
    CoherentSourceConfig,
    HeraldedSourceConfig,
    HybridSourceConfig,
    event_rate,
    multiphoton_prob,
    simulate_coherent_bits,
    simulate_heralded,
    simulate_hybrid,
    software_source,
)
from photonrng.stattests import TestParams, frequency_test, run_battery

ALPHA = 0.01

# First 20 seeds (ascending) whose 2e6-bit walks have >= 500 zero
# crossings, so the excursion tests are applicable in every battery run.
CALIBRATION_SEEDS = (0, 1, 3, 5, 7, 9, 10, 11, 12, 13, 14, 15, 16, 17, 20, 21, 22, 24, 25, 26)


def note(cid: str, status: str, detail: str) -> None:
    print(f"ACCEPTANCE {cid} {status}: {detail}", flush=True)


def test_criterion_01_event_rate():
    rate = event_rate(20e6, 0.1)
    note("01", "PASS" if abs(rate - 1.9e6) / 1.9e6 < 0.005 else "FAIL",
         f"event_rate(20e6, 0.1) = {rate:.4g} Hz")
    assert rate == pytest.approx(1.903e6, rel=1e-3)
    assert abs(rate - 1.9e6) / 1.9e6 < 0.005


def test_criterion_02_multiphoton_probability():
    p = multiphoton_prob(0.1)
    note("02", "PASS" if abs(p - 0.00468) < 5e-6 else "FAIL",
         f"multiphoton_prob(0.1) = {p:.6f}")
    assert p == pytest.approx(0.00468, abs=5e-6)
    assert round(p, 3) == 0.005  # the quoted half percent


def test_criterion_03a_table1_balance_column():
    deltas = {}
    for n, (b_ref, *_rest) in TABLE1_STOKES.items():
        row = balance_threshold(n, ALPHA)
        deltas[n] = abs(row.b_max - b_ref)
    worst = max(deltas.values())
    note("03a", "PASS" if worst <= 0.01 else "FAIL",
         f"balance column reproduced, worst |delta| = {worst:.4f}")
    assert worst <= 0.01


@pytest.mark.xfail(
    strict=True,
    reason="S_z column is measured tomography data; the erfc inversion gives "
    "0.2576/0.0815/0.0258/0.0081 for N=1e2..1e5 vs the quoted "
    "0.25584/0.08719/0.02518/0.00828 (up to 5.7e-3 apart, tolerance 1e-4)",
)
def test_criterion_03b_table1_stokes_column():
    deltas = {}
    for n, (_b, _s0, _sx, _sy, sz_ref) in TABLE1_STOKES.items():
        row = balance_threshold(n, ALPHA)
        deltas[n] = abs(row.sz_max - sz_ref)
    worst = max(deltas.values())
    note("03b", "PASS" if worst <= 1e-4 else "FAIL (spec-data conflict, see notes)",
         f"S_z column, worst |delta| = {worst:.5f}")
    assert worst <= 1e-4


def test_criterion_04_frequency_known_answer():
    seq = BitSequence.from01("1011010101")
    from photonrng.bitstream import discrepancy

    assert discrepancy(seq) == 2
    p = frequency_test(seq, enforce_min_length=False)
    note("04", "PASS" if abs(p - 0.5271) <= 1e-4 else "FAIL",
         f"monobit p on the 10-bit reference word = {p:.6f}")
    assert p == pytest.approx(0.5271, abs=1e-4)


def test_criterion_05_babkin_exhaustive_oracle():
    for n in range(2, 13):
        codec = BabkinCodec(n)
        for k in range(n + 1):
            c_nk = math.comb(n, k)
            exps = codec.blocks[k]
            assert sum(1 << b for b in exps) == c_nk
            ranks = set()
            outputs: dict[int, list[str]] = {w: [] for w in set(exps)}
            for cols in combinations(range(n), k):
                bits = np.zeros(n, dtype=np.uint8)
                bits[list(cols)] = 1
                num = codec.number(bits)
                assert 0 <= num < c_nk
                ranks.add(num)
                out = codec.encode_subsequence(bits).to01()
                outputs[len(out)].append(out)
            assert len(ranks) == c_nk  # bijection onto [0, C(n,k) - 1]
            # blocks partition the range: each width w swallowed 2^w words
            # per block of that width, and outputs are exactly uniform
            width_blocks: dict[int, int] = {}
            for w in exps:
                width_blocks[w] = width_blocks.get(w, 0) + 1
            for w, outs in outputs.items():
                assert len(outs) == width_blocks[w] * (1 << w)
                expected = sorted(
                    format(v, f"0{w}b") if w else "" for v in range(1 << w)
                ) * width_blocks[w]
                assert sorted(outs) == sorted(expected)
    note("05", "PASS", "rank bijection, block partition, and per-block "
         "uniformity verified exhaustively for n = 2..12")


def test_criterion_06_babkin_worked_trace():
    codec = BabkinCodec(8)
    word = BitSequence.from01("00101000")  # ones at positions 3 and 5
    num = codec.number(word)
    exps = list(codec.blocks[2])
    out = codec.encode_subsequence(word).to01()
    ok = num == 8 and exps == [2, 3, 4] and out == "000"
    note("06", "PASS" if ok else "FAIL",
         f"rank={num}, blocks={exps}, output={out!r}")
    assert num == 8
    assert exps == [2, 3, 4]
    assert out == "000"  # rank 8 falls in block 2, width b_2 = 3


def test_criterion_07_binomial_agreement():
    exact = binomial(300, 150)
    approx = binomial(300, 150, mode="approximate")
    rel = abs(approx - exact) / exact
    note("07", "PASS" if rel < 1e-10 else "FAIL",
         f"C(300,150) exact-vs-Gamma relative error = {rel:.2e}")
    assert rel < 1e-10


def test_criterion_08_von_neumann_yield():
    gen = np.random.default_rng(2024)
    seq = BitSequence.from_array((gen.random(10**6) < 0.7).astype(np.uint8))
    out, stats = von_neumann(seq)
    p = frequency_test(out)
    ok = abs(stats.yield_ratio - 0.21) <= 0.01 and p >= ALPHA
    # the pair rule can never keep more than half the bits
    for probe in (seq, software_source(10**5, 1), BitSequence.from01("01" * 500)):
        _, s = von_neumann(probe)
        assert s.discarded_bits >= s.input_bits / 2
        ok = ok and s.discarded_bits >= s.input_bits / 2
    note("08", "PASS" if ok else "FAIL",
         f"yield = {stats.yield_ratio:.4f}, output monobit p = {p:.3f}")
    assert stats.yield_ratio == pytest.approx(0.21, abs=0.01)
    assert p >= ALPHA


def test_criterion_09_battery_calibration():
    passes = {tid: 0 for tid in range(1, 16)}
    reports = []
    for seed in CALIBRATION_SEEDS:
        report = run_battery(software_source(2_000_000, seed), sequence_id=f"cal-{seed}")
        reports.append(report)
        for oc in report.outcomes:
            assert oc.applicable, f"test {oc.test_id} inapplicable for seed {seed}"
            if oc.passed(ALPHA):
                passes[oc.test_id] += 1
    hist = aggregate_histogram(reports)
    chi2 = hist.chi_squared()
    critical = chi2_dist.ppf(1 - 0.001, hist.bin_count - 1)
    worst = min(passes.values())
    ok = worst >= 18 and chi2 < critical
    note("09", "PASS" if ok else "FAIL",
         f"min per-test passes = {worst}/20, pooled chi2 = {chi2:.1f} "
         f"(critical {critical:.1f}, {hist.total} p-values)")
    for tid, count in passes.items():
        assert count >= 18, f"test {tid} passed only {count}/20"
    assert chi2 < critical


def test_criterion_10_bias_detection():
    fails = passes = 0
    for seed in range(20):
        biased = CoherentSourceConfig(
            bias_amplitude=0.1, bias_period=1e4, seed=seed
        )
        seq, _ = simulate_coherent_bits(biased, 10**6)
        if frequency_test(seq) < ALPHA:
            fails += 1
        clean = CoherentSourceConfig(seed=1000 + seed)
        seq, _ = simulate_coherent_bits(clean, 10**6)
        if frequency_test(seq) >= ALPHA:
            passes += 1
    ok = fails >= 18 and passes >= 18
    note("10", "PASS" if ok else "FAIL",
         f"biased source fails monobit in {fails}/20 seeds, "
         f"clean source passes in {passes}/20")
    assert fails >= 18
    assert passes >= 18


def test_criterion_11_hybrid_improvement_ordering():
    wins = 0
    pairs = 30
    for seed in range(pairs):
        coh = CoherentSourceConfig(bias_amplitude=0.05, seed=seed)
        raw, _ = simulate_coherent_bits(coh, 2_000_000)
        hyb_cfg = HybridSourceConfig(
            coherent=coh,
            heralded=HeraldedSourceConfig(seed=10_000 + seed),
            mean_spacing=20.0,
            seed=20_000 + seed,
        )
        hyb = simulate_hybrid(hyb_cfg, 2_000_000)
        mae_raw = mae(median_profile([run_battery(raw, sequence_id=f"raw-{seed}")]))
        mae_hyb = mae(median_profile([run_battery(hyb, sequence_id=f"hyb-{seed}")]))
        if mae_raw > mae_hyb:
            wins += 1
    ok = wins >= 0.8 * pairs
    note("11", "PASS" if ok else "FAIL",
         f"raw-coherent MAE exceeded hybrid MAE in {wins}/{pairs} paired seeds")
    assert wins >= 0.8 * pairs


def test_criterion_12_digital_mixing_monotonicity():
    periods = (None, 100, 20, 5, 1)  # None = unmixed
    per_period: dict[object, list[float]] = {i: [] for i in periods}
    for seed in range(20):
        coh = CoherentSourceConfig(bias_amplitude=0.05, seed=seed)
        base, _ = simulate_coherent_bits(coh, 10**6)
        quantum = simulate_heralded(HeraldedSourceConfig(seed=30_000 + seed), 10**6)
        for i in periods:
            mixed = base if i is None else digital_mix(base, quantum, i)
            per_period[i].append(frequency_test(mixed))
    medians = [float(np.median(per_period[i])) for i in periods]
    ok = all(b >= a for a, b in zip(medians, medians[1:]))
    note("12", "PASS" if ok else "FAIL",
         "median monobit p over periods (inf,100,20,5,1) = "
         + ", ".join(f"{m:.3g}" for m in medians))
    assert all(b >= a for a, b in zip(medians, medians[1:]))


W_REF = 1.6e-5


def test_criterion_13a_hom_pipeline():
    grid = np.linspace(-8 * W_REF, 8 * W_REF, 50)
    clean = dip_model(grid, 100.0, -0.8, W_REF)
    worst = 0.0
    for seed in range(100):
        gen = np.random.default_rng(seed)
        noisy = clean * (1.0 + 0.03 * gen.standard_normal(grid.size))
        fit = hom_fit(np.column_stack([grid, noisy]))
        worst = max(worst, abs(fit.width - W_REF) / W_REF)
    d_omega, d_lambda = spectral_width(W_REF, 810e-9)
    omega_ok = abs(d_omega - 1.874e13) / 1.874e13 < 0.001
    ok = worst < 0.05 and omega_ok
    note("13a", "PASS" if ok else "FAIL",
         f"worst width error over 100 noisy fits = {worst:.3%}, "
         f"d_omega = {d_omega:.4g} Hz, d_lambda = {d_lambda * 1e9:.4f} nm")
    assert worst < 0.05
    assert omega_ok


@pytest.mark.xfail(
    strict=True,
    reason="lambda0^2/(2 pi w) = 6.5263 nm; the quoted 6.5 nm is a 2-digit "
    "rounding, 0.41% away, beyond the 0.1% tolerance",
)
def test_criterion_13b_hom_quoted_delta_lambda():
    _, d_lambda = spectral_width(W_REF, 810e-9)
    rel = abs(d_lambda - 6.5e-9) / 6.5e-9
    note("13b", "PASS" if rel < 0.001 else "FAIL (spec-data conflict, see notes)",
         f"d_lambda = {d_lambda * 1e9:.4f} nm vs quoted 6.5 nm ({rel:.3%} apart)")
    assert rel < 0.001


def test_criterion_14_poisson_characterization():
    hist = photocount_histogram(sample_photocounts(0.1, 10**7, seed=14))
    delta = abs(hist.sample_mean - 0.1)
    from photonrng.physics import REFERENCE_MEANS

    ok = delta <= 0.001
    note("14", "PASS" if ok else "FAIL",
         f"lambda-hat = {hist.sample_mean:.5f} over 1e7 cycles "
         f"(reference run means {REFERENCE_MEANS} documented, not asserted)")
    assert delta <= 0.001
    assert REFERENCE_MEANS == (0.095, 0.105, 0.11)
