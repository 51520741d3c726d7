"""Stochastic simulators of the photonic bit sources.

Three physical architectures are modeled as Bernoulli-type bit
processes, plus a seeded CSPRNG reference stream:

* coherent  -- attenuated laser; Poisson photocounts per clock cycle,
  each photon routed to detector D1 with probability q(t).  Cycles in
  which both detectors fire are discarded and logged.  D1 -> '0',
  D2 -> '1'.
* heralded  -- idealized pair source; independent Bernoulli(p) bits
  where p performs a slow bounded random walk (environmental drift).
* hybrid    -- coherent stream with heralded bits interleaved at mean
  spacing omega, optionally with the shared output channel rebalanced
  the way the physical setup equalizes detector count rates.

The polarization-misalignment bias is modeled as a rectified sinusoid,
``q(t) = 0.5 + offset + amplitude * |sin(pi * t / period)|``: the
misalignment magnitude wobbles but does not change sign, so a nonzero
amplitude produces a net imbalance that the frequency test can see.
With ``bias_period=None`` the amplitude acts as a static offset.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from .bitstream import BitSequence
from .errors import DomainError

_BATCH = 1 << 22
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class CoherentSourceConfig:
    """Parameters of the attenuated-laser source."""

    mean_photons: float = 0.1
    clock_rate: float = 20e6
    bias_amplitude: float = 0.0
    bias_period: float | None = None
    bias_offset: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.mean_photons < 0:
            raise DomainError("mean_photons must be >= 0")
        if self.clock_rate < 0:
            raise DomainError("clock_rate must be >= 0")
        if not 0.0 <= self.bias_amplitude <= 0.5:
            raise DomainError("bias_amplitude must be in [0, 0.5]")
        if self.bias_period is not None and self.bias_period <= 0:
            raise DomainError("bias_period must be positive or None")
        lo = 0.5 + self.bias_offset
        hi = lo + self.bias_amplitude
        if not (0.0 <= lo and hi <= 1.0):
            raise DomainError("detector-1 probability must stay within [0, 1]")


@dataclass(frozen=True)
class HeraldedSourceConfig:
    """Parameters of the heralded single-photon source."""

    base_p: float = 0.5
    drift_step: float = 0.0
    drift_bounds: tuple[float, float] = (0.01, 0.99)
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.drift_bounds
        if not 0.0 < self.base_p < 1.0:
            raise DomainError("base_p must be in (0, 1)")
        if self.drift_step < 0:
            raise DomainError("drift_step must be >= 0")
        if not (0.0 < lo < hi < 1.0):
            raise DomainError("drift_bounds must satisfy 0 < lo < hi < 1")
        if not lo <= self.base_p <= hi:
            raise DomainError("base_p must lie within drift_bounds")


@dataclass(frozen=True)
class HybridSourceConfig:
    """Coherent source with heralded bits interleaved at mean spacing omega."""

    coherent: CoherentSourceConfig
    heralded: HeraldedSourceConfig
    mean_spacing: float = 20.0
    interleave: Literal["stochastic", "periodic"] = "stochastic"
    rebalance: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.mean_spacing < 1:
            raise DomainError("mean_spacing must be >= 1")
        if self.interleave not in ("stochastic", "periodic"):
            raise DomainError("interleave must be 'stochastic' or 'periodic'")

    @property
    def heralded_fraction(self) -> float:
        """Nominal fraction of heralded bits in the output stream."""
        if self.interleave == "periodic":
            return 1.0 / math.ceil(self.mean_spacing)
        return 1.0 / (1.0 + self.mean_spacing)


@dataclass(frozen=True)
class GenerationLog:
    """Cycle accounting for a simulator run."""

    emitted_bits: int
    empty_cycles: int
    coincidence_discards: int
    elapsed_cycles: int

    def as_dict(self) -> dict:
        return {
            "emitted_bits": self.emitted_bits,
            "empty_cycles": self.empty_cycles,
            "coincidence_discards": self.coincidence_discards,
            "elapsed_cycles": self.elapsed_cycles,
        }


# -- coherent source ----------------------------------------------------


def _coherent_q(cfg: CoherentSourceConfig, t0: int, count: int) -> np.ndarray:
    base = 0.5 + cfg.bias_offset
    if cfg.bias_period is None:
        return np.full(count, base + cfg.bias_amplitude)
    t = np.arange(t0, t0 + count, dtype=np.float64)
    return base + cfg.bias_amplitude * np.abs(np.sin(np.pi * t / cfg.bias_period))


def _q_phase_grid(cfg: CoherentSourceConfig) -> np.ndarray:
    """q(t) sampled over one modulation period (or a single phase)."""
    if cfg.bias_period is None:
        return _coherent_q(cfg, 0, 1)
    period = cfg.bias_period
    if abs(period - round(period)) < 1e-9 and period <= 65536:
        return _coherent_q(cfg, 0, int(round(period)))
    t = np.linspace(0.0, period, 4096, endpoint=False)
    base = 0.5 + cfg.bias_offset
    return base + cfg.bias_amplitude * np.abs(np.sin(np.pi * t / period))


def _split_probabilities(lam: float, q: np.ndarray, shift: float = 0.0):
    """Per-cycle probabilities of a clean D1 event and a clean D2 event."""
    qc = q + shift
    if qc.size and (qc.min() < 0.0 or qc.max() > 1.0):
        raise DomainError("shifted detector-1 probability left [0, 1]")
    scale = math.exp(-lam)
    p0 = scale * (np.exp(lam * qc) - 1.0)
    p1 = scale * (np.exp(lam * (1.0 - qc)) - 1.0)
    return p0, p1


def emission_probability(cfg: CoherentSourceConfig, q_shift: float = 0.0) -> float:
    """Phase-averaged probability that a cycle emits a bit."""
    p0, p1 = _split_probabilities(cfg.mean_photons, _q_phase_grid(cfg), q_shift)
    return float((p0 + p1).mean())


def _coherent_batch(rng, cfg, t0, count, q_shift):
    """One vectorized block of cycles; returns bits plus per-cycle masks."""
    q = _coherent_q(cfg, t0, count) + q_shift
    if count and (q.min() < 0.0 or q.max() > 1.0):
        raise DomainError("shifted detector-1 probability left [0, 1]")
    n = rng.poisson(cfg.mean_photons, count)
    d1 = rng.binomial(n, q)
    fired = n > 0
    emit = fired & ((d1 == 0) | (d1 == n))
    bits = ((d1[emit] == 0).astype(np.uint8))  # all photons on D2 -> '1'
    return bits, fired, emit


def simulate_coherent(
    cfg: CoherentSourceConfig, cycles: int, q_shift: float = 0.0
) -> tuple[BitSequence, GenerationLog]:
    """Run the attenuated-laser simulator for a fixed number of clock cycles.

    Per cycle, draws a Poisson photon count; zero photons emit nothing,
    photons split across both detectors discard the cycle, otherwise the
    single firing detector encodes the bit.
    """
    if cycles < 0:
        raise DomainError("cycles must be >= 0")
    rng = np.random.default_rng(cfg.seed)
    parts: list[np.ndarray] = []
    empty = coinc = 0
    t = 0
    while t < cycles:
        count = min(cycles - t, _BATCH)
        bits, fired, emit = _coherent_batch(rng, cfg, t, count, q_shift)
        parts.append(bits)
        empty += int(count - fired.sum())
        coinc += int(fired.sum() - emit.sum())
        t += count
    out = np.concatenate(parts) if parts else np.empty(0, dtype=np.uint8)
    log = GenerationLog(
        emitted_bits=int(out.size),
        empty_cycles=empty,
        coincidence_discards=coinc,
        elapsed_cycles=cycles,
    )
    return BitSequence.from_array(out), log


def simulate_coherent_bits(
    cfg: CoherentSourceConfig, nbits: int, q_shift: float = 0.0
) -> tuple[BitSequence, GenerationLog]:
    """Run the coherent simulator until exactly ``nbits`` bits are emitted.

    The log covers every elapsed cycle up to and including the one that
    produced the final bit, so the cycle partition identity holds.
    """
    if nbits < 0:
        raise DomainError("nbits must be >= 0")
    if nbits == 0:
        return BitSequence.empty(), GenerationLog(0, 0, 0, 0)
    p_emit = emission_probability(cfg, q_shift)
    if p_emit <= 0.0:
        raise DomainError("source cannot emit bits (zero mean photon number)")
    rng = np.random.default_rng(cfg.seed)
    parts: list[np.ndarray] = []
    got = empty = coinc = elapsed = 0
    while True:
        count = min(int(1.1 * (nbits - got) / p_emit) + 1024, _BATCH)
        bits, fired, emit = _coherent_batch(rng, cfg, elapsed, count, q_shift)
        if got + bits.size >= nbits:
            take = nbits - got
            cut = int(np.flatnonzero(emit)[take - 1]) + 1
            parts.append(bits[:take])
            fired_used = int(fired[:cut].sum())
            empty += cut - fired_used
            coinc += fired_used - int(emit[:cut].sum())
            elapsed += cut
            break
        parts.append(bits)
        got += bits.size
        empty += int(count - fired.sum())
        coinc += int(fired.sum() - emit.sum())
        elapsed += count
    out = np.concatenate(parts)
    log = GenerationLog(
        emitted_bits=nbits,
        empty_cycles=empty,
        coincidence_discards=coinc,
        elapsed_cycles=elapsed,
    )
    return BitSequence.from_array(out), log


# -- heralded source -----------------------------------------------------


def _heralded_p(cfg: HeraldedSourceConfig, count: int, rng) -> np.ndarray:
    """Per-bit probability of '1' under the bounded random walk."""
    if cfg.drift_step == 0.0:
        return np.full(count, cfg.base_p)
    steps = (rng.integers(0, 2, size=count) * 2 - 1).astype(np.float64)
    steps[0] = 0.0  # the first bit sees base_p itself
    walk = cfg.base_p + cfg.drift_step * np.cumsum(steps)
    lo, hi = cfg.drift_bounds
    width = hi - lo
    folded = np.abs(np.mod(walk - lo, 2.0 * width) - width)
    return hi - folded


def simulate_heralded(
    cfg: HeraldedSourceConfig, count: int, p_shift: float = 0.0
) -> BitSequence:
    """Emit ``count`` Bernoulli(p(t)) bits with p drifting inside its bounds."""
    if count < 0:
        raise DomainError("count must be >= 0")
    if count == 0:
        return BitSequence.empty()
    rng = np.random.default_rng(cfg.seed)
    p = _heralded_p(cfg, count, rng) + p_shift
    if p.min() < 0.0 or p.max() > 1.0:
        raise DomainError("shifted heralded probability left [0, 1]")
    bits = (rng.random(count) < p).astype(np.uint8)
    return BitSequence.from_array(bits)


# -- hybrid source -------------------------------------------------------


def rebalance_offset(cfg: HybridSourceConfig) -> float:
    """Detector-split correction that zeroes the mixed stream's mean bias.

    Mirrors the half-wave-plate calibration of the physical hybrid
    channel: a single constant rotation applied to both components so
    the two detectors see equal count rates.  Solved from the exact
    Poisson split probabilities, ignoring heralded drift.
    """
    if not cfg.rebalance:
        return 0.0
    f = cfg.heralded_fraction
    lam = cfg.coherent.mean_photons
    qs = _q_phase_grid(cfg.coherent)
    p_h = cfg.heralded.base_p

    def mixed_bias(c: float) -> float:
        if lam > 0:
            p0, p1 = _split_probabilities(lam, qs, c)
            coh = float((p1 - p0).sum() / (p1 + p0).sum())
        else:
            coh = 0.0
        her = 2.0 * (p_h - c) - 1.0
        return (1.0 - f) * coh + f * her

    if abs(mixed_bias(0.0)) < 1e-12:
        return 0.0
    margin = 1e-9
    lo = max(-float(qs.min()), p_h - 1.0) + margin
    hi = min(1.0 - float(qs.max()), p_h) - margin
    if lo >= hi or mixed_bias(lo) * mixed_bias(hi) > 0:
        raise DomainError("cannot rebalance: no feasible channel rotation")
    return float(brentq(mixed_bias, lo, hi, xtol=1e-14))


def _hybrid_mask(cfg: HybridSourceConfig, total_bits: int) -> np.ndarray:
    """Boolean mask of heralded positions in the output stream."""
    if cfg.interleave == "periodic":
        mask = np.zeros(total_bits, dtype=bool)
        step = math.ceil(cfg.mean_spacing)
        mask[step - 1 :: step] = True
        return mask
    rng = np.random.default_rng(cfg.seed)
    return rng.random(total_bits) < cfg.heralded_fraction


def simulate_hybrid_with_log(
    cfg: HybridSourceConfig, total_bits: int
) -> tuple[BitSequence, GenerationLog]:
    """Hybrid stream plus cycle accounting (heralded bits count one cycle each)."""
    if total_bits < 0:
        raise DomainError("total_bits must be >= 0")
    if total_bits == 0:
        return BitSequence.empty(), GenerationLog(0, 0, 0, 0)
    c = rebalance_offset(cfg)
    mask = _hybrid_mask(cfg, total_bits)
    n_her = int(mask.sum())
    n_coh = total_bits - n_her
    out = np.empty(total_bits, dtype=np.uint8)
    if n_coh:
        coh, log = simulate_coherent_bits(cfg.coherent, n_coh, q_shift=c)
        out[~mask] = coh.array
    else:
        log = GenerationLog(0, 0, 0, 0)
    if n_her:
        out[mask] = simulate_heralded(cfg.heralded, n_her, p_shift=-c).array
    full_log = GenerationLog(
        emitted_bits=total_bits,
        empty_cycles=log.empty_cycles,
        coincidence_discards=log.coincidence_discards,
        elapsed_cycles=log.elapsed_cycles + n_her,
    )
    return BitSequence.from_array(out), full_log


def simulate_hybrid(cfg: HybridSourceConfig, total_bits: int) -> BitSequence:
    """Coherent bits with heralded bits interleaved at mean spacing omega."""
    seq, _ = simulate_hybrid_with_log(cfg, total_bits)
    return seq


# -- software reference source -------------------------------------------


def software_source(count: int, seed: int) -> BitSequence:
    """Seeded cryptographically strong reference stream.

    Bits come from the SHAKE-256 extendable-output function keyed by the
    64-bit seed, so the stream is deterministic per seed yet passes the
    statistical battery like a platform CSPRNG.
    """
    if count < 0:
        raise DomainError("count must be >= 0")
    if count == 0:
        return BitSequence.empty()
    key = (int(seed) & _MASK64).to_bytes(8, "little")
    raw = hashlib.shake_256(key).digest((count + 7) // 8)
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), count=count, bitorder="little")
    return BitSequence.from_array(bits)


# -- closed-form characteristics ------------------------------------------


def event_rate(clock_hz: float, lam: float) -> float:
    """Bit generation rate: clock frequency times P(at least one photon)."""
    if clock_hz < 0 or lam < 0:
        raise DomainError("clock_hz and lam must be >= 0")
    return clock_hz * (1.0 - math.exp(-lam))


def multiphoton_prob(lam: float) -> float:
    """Probability of two or more photons in one cycle, 1 - e^-lam (1 + lam)."""
    if lam < 0:
        raise DomainError("lam must be >= 0")
    return 1.0 - math.exp(-lam) * (1.0 + lam)
