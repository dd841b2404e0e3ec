"""Trial-parallel Monte Carlo for decision chains over faulty broadcasts.

Reproducibility contract: every trial owns a counter-based random stream
derived from (seed, phase, hypothesis, trial_index), and inside a trial the
draw order is fixed (all private beliefs first, then the channel uniforms).
Any subset of trials therefore replays bit for bit in any order, estimates
aggregate integer error counts, and results are identical whatever the block
size or thread count.  run_trial and the batched kernels share the same
stage-step arithmetic, so a replayed trial matches its batched twin exactly.

Strategy dispatch mirrors what later nodes can actually compute:

* flip channel, full memory: the shared public belief is a scalar recursion,
  advanced with update_public_belief;
* bounded memory (flip or erasure): per-state cutoff tables from the exact
  window recursion, which is the strategy's own oracle;
* erasure channel, unbounded memory: nearest-unerased evidence with decision
  marginals calibrated in a separate pass (its own rng phase), node k using
  batch frequencies of earlier stages only.

A flip channel with power or sporadic memory has no supported strategy and
is rejected up front.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .analysis import SeriesResult, default_grid
from .belief_model import BeliefModel, sample
from .channels import Channel, ErasureSchedule, FlipSchedule, erasure_levels, flip_probs
from .exact_dp import MAX_CAPACITY, exact_error_series
from .strategy import BELIEF_CEIL, BELIEF_FLOOR, belief_cutoff_from_public, update_public_belief
from .topology import MemorySchedule, memory_size

_PHASE_MEASURE = 0
_PHASE_CALIBRATE = 1
_PHASE_AUX = 2

_BLOCK_BUDGET = 1 << 22  # floats per drawn matrix per block
_CI_Z = 1.96


@dataclass(frozen=True)
class ExperimentConfig:
    model: BeliefModel
    channel: Channel
    memory: MemorySchedule
    stages: int
    trials: int
    seed: int
    calibration_trials: int = 2000
    grid: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.stages < 1:
            raise ValueError(f"stages must be >= 1, got {self.stages!r}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a uint64, got {self.seed!r}")
        if isinstance(self.channel, FlipSchedule):
            if self.memory.family not in ("full", "bounded"):
                raise ValueError(
                    f"flip channel supports full or bounded memory, not {self.memory.family!r}: "
                    f"nodes cannot reconstruct a shared belief from a partial unbounded window"
                )
        elif not isinstance(self.channel, ErasureSchedule):
            raise ValueError(f"channel must be a FlipSchedule or ErasureSchedule, got {self.channel!r}")
        if self.memory.family == "bounded" and self.memory.capacity > MAX_CAPACITY:
            raise ValueError(f"bounded memory is capped at capacity {MAX_CAPACITY} for exact cutoffs")
        if self._needs_calibration():
            if self.calibration_trials < 50:
                raise ValueError(f"calibration needs at least 50 trials, got {self.calibration_trials!r}")
            if self.calibration_trials * self.stages > 1 << 24:
                raise ValueError(
                    "calibration matrices would exceed the memory budget; "
                    "reduce calibration_trials or stages"
                )
        if self.grid is not None:
            g = np.asarray(self.grid, dtype=np.int64)
            if g.size == 0 or g[0] < 1 or g[-1] > self.stages or (np.diff(g) <= 0).any():
                raise ValueError("grid must be strictly increasing inside [1, stages]")

    def _needs_calibration(self) -> bool:
        return isinstance(self.channel, ErasureSchedule) and self.memory.family != "bounded"


@dataclass
class TrialRecord:
    decisions: np.ndarray
    last_error_index: int
    clamp_count: int


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(repr(config).encode()).hexdigest()[:12]


def _trial_rng(seed: int, phase: int, hypothesis: int, trial: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(phase, hypothesis, trial))
    return np.random.Generator(np.random.Philox(ss))


def _draw_block(config: ExperimentConfig, phase: int, hypothesis: int, lo: int, hi: int):
    """Private beliefs and channel uniforms for trials lo..hi-1, one row each."""
    k_stages = config.stages
    beliefs = np.empty((hi - lo, k_stages))
    chan = np.empty((hi - lo, k_stages))
    for i, t in enumerate(range(lo, hi)):
        g = _trial_rng(config.seed, phase, hypothesis, t)
        beliefs[i] = sample(config.model, hypothesis, g, size=k_stages)
        chan[i] = g.random(k_stages)
    return beliefs, chan


def _block_size(stages: int) -> int:
    return max(256, min(8192, _BLOCK_BUDGET // max(stages, 1)))


def _grid_slots(grid: np.ndarray, stages: int) -> np.ndarray:
    slot = np.full(stages + 1, -1, dtype=np.int64)
    slot[grid] = np.arange(grid.size)
    return slot


def _run_flip_full(config, hypothesis, lo, hi, slot, n_slots, collect, ctx):
    del ctx
    k_stages = config.stages
    model = config.model
    qs = flip_probs(config.channel, np.arange(1, k_stages + 1))
    beliefs, chan = _draw_block(config, _PHASE_MEASURE, hypothesis, lo, hi)
    m = hi - lo
    b = np.full(m, model.prior_1)
    counts = np.zeros(n_slots, dtype=np.int64)
    last = np.zeros(m, dtype=np.int64)
    clamp = np.zeros(m, dtype=np.int64)
    dec = np.zeros((m, k_stages), dtype=np.int8) if collect else None
    for k in range(1, k_stages + 1):
        cut = belief_cutoff_from_public(b, model)
        d = beliefs[:, k - 1] > cut
        if collect:
            dec[:, k - 1] = d
        wrong = d if hypothesis == 0 else ~d
        s = slot[k]
        if s >= 0:
            counts[s] += int(np.count_nonzero(wrong))
        last[wrong] = k
        observed = d != (chan[:, k - 1] < qs[k - 1])
        b = update_public_belief(b, float(qs[k - 1]), observed, model)
        clamp += (b <= BELIEF_FLOOR) | (b >= BELIEF_CEIL)
    return counts, last, clamp, dec


def _scan_step(k, beliefs_col, chan_col, ev_stage, ev_val, marginals, mem, lv0, lv1, model):
    """One stage of the nearest-unerased rule.  Shared by measurement and
    calibration so both passes run identical arithmetic."""
    has = (ev_stage > 0) & (ev_stage >= k - mem)
    m0 = marginals[0][ev_stage]
    m1 = marginals[1][ev_stage]
    l1 = np.where(ev_val, m1, 1.0 - m1)
    l0 = np.where(ev_val, m0, 1.0 - m0)
    prior = model.prior_1
    post = np.where(has, l1 * prior / (l1 * prior + l0 * (1.0 - prior)), prior)
    cut = belief_cutoff_from_public(post, model)
    d = beliefs_col > cut
    lv = np.where(d, lv1, lv0)
    keep = chan_col >= lv
    new_stage = np.where(keep, k, ev_stage)
    new_val = np.where(keep, d, ev_val)
    return d, new_stage, new_val


def _run_scan(config, hypothesis, lo, hi, slot, n_slots, collect, ctx):
    marginals = ctx
    k_stages = config.stages
    model = config.model
    lv0s, lv1s = erasure_levels(config.channel, np.arange(1, k_stages + 1))
    beliefs, chan = _draw_block(config, _PHASE_MEASURE, hypothesis, lo, hi)
    m = hi - lo
    counts = np.zeros(n_slots, dtype=np.int64)
    last = np.zeros(m, dtype=np.int64)
    clamp = np.zeros(m, dtype=np.int64)
    dec = np.zeros((m, k_stages), dtype=np.int8) if collect else None
    ev_stage = np.zeros(m, dtype=np.int64)
    ev_val = np.zeros(m, dtype=bool)
    for k in range(1, k_stages + 1):
        mem = memory_size(config.memory, k)
        d, ev_stage, ev_val = _scan_step(
            k, beliefs[:, k - 1], chan[:, k - 1], ev_stage, ev_val,
            marginals, mem, lv0s[k - 1], lv1s[k - 1], model,
        )
        if collect:
            dec[:, k - 1] = d
        wrong = d if hypothesis == 0 else ~d
        s = slot[k]
        if s >= 0:
            counts[s] += int(np.count_nonzero(wrong))
        last[wrong] = k
    return counts, last, clamp, dec


def _run_window(config, hypothesis, lo, hi, slot, n_slots, collect, ctx):
    tables = ctx
    k_stages = config.stages
    channel = config.channel
    flip = isinstance(channel, FlipSchedule)
    a_size = 2 if flip else 3
    if flip:
        qs = flip_probs(channel, np.arange(1, k_stages + 1))
    else:
        lv0s, lv1s = erasure_levels(channel, np.arange(1, k_stages + 1))
    beliefs, chan = _draw_block(config, _PHASE_MEASURE, hypothesis, lo, hi)
    m = hi - lo
    counts = np.zeros(n_slots, dtype=np.int64)
    last = np.zeros(m, dtype=np.int64)
    clamp = np.zeros(m, dtype=np.int64)
    dec = np.zeros((m, k_stages), dtype=np.int8) if collect else None
    state = np.zeros(m, dtype=np.int64)
    wlen = 0
    cap = config.memory.capacity
    for k in range(1, k_stages + 1):
        tau = tables[k - 1][state]
        d = beliefs[:, k - 1] > tau
        if collect:
            dec[:, k - 1] = d
        wrong = d if hypothesis == 0 else ~d
        s = slot[k]
        if s >= 0:
            counts[s] += int(np.count_nonzero(wrong))
        last[wrong] = k
        if flip:
            symbol = (d != (chan[:, k - 1] < qs[k - 1])).astype(np.int64)
        else:
            lv = np.where(d, lv1s[k - 1], lv0s[k - 1])
            symbol = np.where(chan[:, k - 1] < lv, 2, d.astype(np.int64))
        new_len = min(cap, k)
        if new_len == wlen + 1:
            state = symbol + a_size * state
        else:
            state = symbol + a_size * (state % a_size ** (wlen - 1))
        wlen = new_len
    return counts, last, clamp, dec


@lru_cache(maxsize=8)
def _cutoff_tables_cached(model, channel, capacity, stages):
    _, tables = exact_error_series(
        model, channel, MemorySchedule("bounded", capacity=capacity), stages, collect_cutoffs=True
    )
    return tuple(tables)


@lru_cache(maxsize=8)
def _marginals_cached(model, channel, memory, stages, seed, n_cal):
    """Decision marginals P(decide 1 | hypothesis) per stage, estimated by
    running the nearest-unerased rule on calibration trials: stage k always
    uses the batch frequencies of stages before k, built online."""
    lv0s, lv1s = erasure_levels(channel, np.arange(1, stages + 1))
    marginals = np.full((2, stages + 1), 0.5)
    floor = 0.5 / n_cal
    batches = {}
    for h in (0, 1):
        beliefs = np.empty((n_cal, stages))
        chan = np.empty((n_cal, stages))
        for t in range(n_cal):
            g = _trial_rng(seed, _PHASE_CALIBRATE, h, t)
            beliefs[t] = sample(model, h, g, size=stages)
            chan[t] = g.random(stages)
        batches[h] = (beliefs, chan, np.zeros(n_cal, dtype=np.int64), np.zeros(n_cal, dtype=bool))
    for k in range(1, stages + 1):
        mem = memory_size(memory, k)
        for h in (0, 1):
            beliefs, chan, ev_stage, ev_val = batches[h]
            d, new_stage, new_val = _scan_step(
                k, beliefs[:, k - 1], chan[:, k - 1], ev_stage, ev_val,
                marginals, mem, lv0s[k - 1], lv1s[k - 1], model,
            )
            marginals[h, k] = float(np.clip(d.mean(), floor, 1.0 - floor))
            batches[h] = (beliefs, chan, new_stage, new_val)
    marginals.flags.writeable = False
    return marginals


def _kernel_for(config: ExperimentConfig):
    if config.memory.family == "bounded":
        ctx = _cutoff_tables_cached(config.model, config.channel, config.memory.capacity, config.stages)
        return _run_window, ctx
    if isinstance(config.channel, FlipSchedule):
        return _run_flip_full, None
    ctx = _marginals_cached(
        config.model, config.channel, config.memory, config.stages, config.seed, config.calibration_trials
    )
    return _run_scan, ctx


def _collect_blocks(config: ExperimentConfig, slot, n_slots, threads: int):
    """Run every (hypothesis, block) job; gather per-hypothesis counts and
    the per-trial last-error vectors in trial order."""
    kernel, ctx = _kernel_for(config)
    bs = _block_size(config.stages)
    jobs = [
        (hyp, lo, min(lo + bs, config.trials))
        for hyp in (0, 1)
        for lo in range(0, config.trials, bs)
    ]

    def run(job):
        hyp, lo, hi = job
        counts, last, clamp, _ = kernel(config, hyp, lo, hi, slot, n_slots, False, ctx)
        return hyp, counts, last, clamp

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    counts = np.zeros((2, n_slots), dtype=np.int64)
    lasts = {0: [], 1: []}
    clamps = np.zeros(2, dtype=np.int64)
    for hyp, c, last, clamp in results:
        counts[hyp] += c
        lasts[hyp].append(last)
        clamps[hyp] += int(clamp.sum())
    return counts, (np.concatenate(lasts[0]), np.concatenate(lasts[1])), clamps


def estimate_error_series(config: ExperimentConfig, threads: int = 1) -> SeriesResult:
    """Error probability on the stage grid, prior-weighted over hypotheses,
    with a normal-approximation confidence band from the per-hypothesis
    counts.  Byte-identical for fixed (config, seed) whatever `threads` is."""
    grid = np.asarray(config.grid if config.grid is not None else default_grid(config.stages), dtype=np.int64)
    slot = _grid_slots(grid, config.stages)
    counts, _, clamps = _collect_blocks(config, slot, grid.size, threads)
    n = config.trials
    p0 = counts[0] / n
    p1 = counts[1] / n
    pi0, pi1 = config.model.prior_0, config.model.prior_1
    pe = pi0 * p0 + pi1 * p1
    var = pi0**2 * p0 * (1.0 - p0) / n + pi1**2 * p1 * (1.0 - p1) / n
    half = _CI_Z * np.sqrt(var)
    return SeriesResult(
        grid,
        pe,
        meta={
            "producer": "simulate",
            "seed": config.seed,
            "trials": n,
            "stages": config.stages,
            "config_hash": config_hash(config),
            "clamp_events": int(clamps.sum()),
        },
        extra={
            "ci_low": np.clip(pe - half, 0.0, 1.0),
            "ci_high": np.clip(pe + half, 0.0, 1.0),
            "p0_type1_hat": p0,
            "p1_type2_hat": p1,
            "err0": counts[0],
            "err1": counts[1],
        },
    )


@dataclass(frozen=True)
class HerdingRow:
    late_error_fraction: float
    q50: float
    q90: float
    q99: float


@dataclass(frozen=True)
class HerdingReport:
    rows: tuple[HerdingRow, HerdingRow]
    combined_late_fraction: float
    k0_stage: int
    stages: int
    trials: int
    seed: int


def herding_stats(config: ExperimentConfig, k0_fraction: float = 0.5, threads: int = 1) -> HerdingReport:
    """Distribution of the last erring stage per trial (0 when none err).

    late_error_fraction is the share of trials whose last error lands beyond
    k0_fraction of the horizon; stuck chains keep that share up as the
    horizon doubles, learning chains push it down.
    """
    if not 0.0 < k0_fraction < 1.0:
        raise ValueError(f"k0_fraction must lie in (0, 1), got {k0_fraction!r}")
    slot = np.full(config.stages + 1, -1, dtype=np.int64)
    _, lasts, _ = _collect_blocks(config, slot, 1, threads)
    k0 = int(math.floor(k0_fraction * config.stages))
    rows = []
    for h in (0, 1):
        last = lasts[h]
        q50, q90, q99 = np.percentile(last, [50, 90, 99])
        rows.append(HerdingRow(float((last > k0).mean()), float(q50), float(q90), float(q99)))
    combined = config.model.prior_0 * rows[0].late_error_fraction + config.model.prior_1 * rows[1].late_error_fraction
    return HerdingReport(tuple(rows), combined, k0, config.stages, config.trials, config.seed)


def run_trial(config: ExperimentConfig, trial_index: int, hypothesis: int) -> TrialRecord:
    """Replay one trial bit for bit, returning its full decision path."""
    if hypothesis not in (0, 1):
        raise ValueError(f"hypothesis must be 0 or 1, got {hypothesis!r}")
    if trial_index < 0:
        raise ValueError(f"trial_index must be >= 0, got {trial_index!r}")
    kernel, ctx = _kernel_for(config)
    slot = np.full(config.stages + 1, -1, dtype=np.int64)
    _, last, clamp, dec = kernel(config, hypothesis, trial_index, trial_index + 1, slot, 1, True, ctx)
    return TrialRecord(dec[0], int(last[0]), int(clamp[0]))


@dataclass(frozen=True)
class ChainEstimate:
    p_hat: float
    ci_low: float
    ci_high: float
    trials: int
    successes: int


def estimate_chain_success(erasure_level: float, hops: int, trials: int, seed: int) -> ChainEstimate:
    """Monte Carlo estimate of chain_success_probability: `hops` scans of
    `hops` candidates each, all erased independently at the given level."""
    if not 0.0 <= erasure_level <= 1.0:
        raise ValueError(f"erasure level must lie in [0, 1], got {erasure_level!r}")
    if hops < 1:
        raise ValueError(f"hops must be >= 1, got {hops!r}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials!r}")
    g = _trial_rng(seed, _PHASE_AUX, 0, 0)
    chunk = max(1, (1 << 20) // (hops * hops))
    successes = 0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        u = g.random((m, hops, hops))
        successes += int(((u >= erasure_level).any(axis=2)).all(axis=1).sum())
        done += m
    p = successes / trials
    half = _CI_Z * math.sqrt(p * (1.0 - p) / trials)
    return ChainEstimate(p, max(0.0, p - half), min(1.0, p + half), trials, successes)
