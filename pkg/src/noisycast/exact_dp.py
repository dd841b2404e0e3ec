"""Exact per-stage error probabilities for windowed decision chains.

The state is the window of the most recent corrupted broadcasts, encoded in
base A (A = 2 for flips, 3 with the erasure symbol) with digit 0 the newest
symbol.  The pair of window distributions conditional on each hypothesis is
pushed forward one stage at a time; the deciding node's cutoffs are computed
from those same distributions, so the recursion reproduces exactly the
strategy the simulated nodes follow and serves as their oracle.  Window
capacity is capped at 12 symbols (3**12 states is where exactness stops
being cheap).

martingale_check enumerates full broadcast histories instead of windows and
verifies two structural facts of the noisy public likelihood ratio: it is a
martingale under hypothesis 0 up to floating-point error, and the mass it
places above any fixed threshold trends downward.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .belief_model import BeliefModel, cdf
from .channels import Channel, ErasureSchedule, FlipSchedule, _erasure_levels_at, flip_prob
from .strategy import MAP_RULE, ThresholdRule, likelihood_threshold
from .topology import MemorySchedule
from .analysis import SeriesResult

MAX_CAPACITY = 12


@dataclass
class WindowDistribution:
    """Conditional distributions of the window seen by the next node."""

    alphabet: int
    capacity: int
    length: int
    mass0: np.ndarray
    mass1: np.ndarray


@dataclass
class StageErrors:
    type1: float
    type2: float
    cutoffs: np.ndarray


def initial_window(alphabet: int, capacity: int) -> WindowDistribution:
    if alphabet not in (2, 3):
        raise ValueError(f"alphabet must be 2 or 3, got {alphabet!r}")
    if not 1 <= capacity <= MAX_CAPACITY:
        raise ValueError(f"capacity must lie in [1, {MAX_CAPACITY}], got {capacity!r}")
    return WindowDistribution(alphabet, capacity, 0, np.ones(1), np.ones(1))


def window_alphabet(channel: Channel) -> int:
    return 2 if isinstance(channel, FlipSchedule) else 3


def _cutoffs(mass0: np.ndarray, mass1: np.ndarray, threshold: float, prior_1: float) -> np.ndarray:
    """Per-state private-belief cutoffs of the likelihood-ratio test.

    States with zero mass under both hypotheses are unreachable; they get
    the neutral cutoff so downstream arrays stay finite.
    """
    tw = threshold * prior_1
    pz = 1.0 - prior_1
    num = tw * mass0
    den = num + pz * mass1
    tau = np.full(num.shape, tw / (tw + pz))
    np.divide(num, den, out=tau, where=den > 0.0)
    return tau


def evolve_window(
    dist: WindowDistribution,
    stage: int,
    model: BeliefModel,
    channel: Channel,
    rule: ThresholdRule = MAP_RULE,
) -> tuple[WindowDistribution, StageErrors]:
    """Decide at `stage` against the current window, then absorb the broadcast.

    Returns the window distribution node stage + 1 will see, together with
    the deciding node's exact error probabilities and cutoff table.
    """
    a_size = dist.alphabet
    tau = _cutoffs(dist.mass0, dist.mass1, likelihood_threshold(rule, model), model.prior_1)
    dec0_h0 = cdf(model, 0, tau)
    dec0_h1 = cdf(model, 1, tau)
    type1 = float(dist.mass0 @ (1.0 - dec0_h0))
    type2 = float(dist.mass1 @ dec0_h1)

    if isinstance(channel, FlipSchedule):
        q = flip_prob(channel, stage)
        w = 1.0 - 2.0 * q
        sym_h0 = [q + w * dec0_h0, 1.0 - q - w * dec0_h0]
        sym_h1 = [q + w * dec0_h1, 1.0 - q - w * dec0_h1]
    else:
        lv0, lv1 = _erasure_levels_at(channel, stage)
        sym_h0 = [(1.0 - lv0) * dec0_h0, (1.0 - lv1) * (1.0 - dec0_h0), lv0 * dec0_h0 + lv1 * (1.0 - dec0_h0)]
        sym_h1 = [(1.0 - lv0) * dec0_h1, (1.0 - lv1) * (1.0 - dec0_h1), lv0 * dec0_h1 + lv1 * (1.0 - dec0_h1)]

    new_len = min(dist.capacity, stage)
    if new_len == dist.length + 1:
        new0 = np.empty((dist.mass0.size, a_size))
        new1 = np.empty((dist.mass1.size, a_size))
        for v in range(a_size):
            new0[:, v] = dist.mass0 * sym_h0[v]
            new1[:, v] = dist.mass1 * sym_h1[v]
    elif new_len == dist.length:
        # at capacity: drop the oldest symbol (top digit), push the new one
        kept = a_size ** (dist.length - 1)
        new0 = np.empty((kept, a_size))
        new1 = np.empty((kept, a_size))
        for v in range(a_size):
            new0[:, v] = (dist.mass0 * sym_h0[v]).reshape(a_size, kept).sum(axis=0)
            new1[:, v] = (dist.mass1 * sym_h1[v]).reshape(a_size, kept).sum(axis=0)
    else:
        raise ValueError(f"window of length {dist.length} cannot evolve to length {new_len}")
    # raveling (states, A) lands symbol v of state s at index A*s + v, the
    # base-A encoding with the new symbol as digit 0
    new_dist = WindowDistribution(a_size, dist.capacity, new_len, new0.ravel(), new1.ravel())
    return new_dist, StageErrors(type1, type2, tau)


def exact_error_series(
    model: BeliefModel,
    channel: Channel,
    memory: MemorySchedule,
    stages: int,
    rule: ThresholdRule = MAP_RULE,
    collect_cutoffs: bool = False,
):
    """Exact error probability of every node 1..stages under bounded memory.

    Returns a SeriesResult over all stages with extra columns p0_type1 and
    p1_type2; with collect_cutoffs=True also returns the list of per-stage
    cutoff tables, indexed by the node's window state.
    """
    if memory.family != "bounded":
        raise ValueError(f"exact recursion needs bounded memory, got family {memory.family!r}")
    if stages < 1:
        raise ValueError(f"stages must be >= 1, got {stages!r}")
    dist = initial_window(window_alphabet(channel), memory.capacity)
    pe = np.empty(stages)
    t1 = np.empty(stages)
    t2 = np.empty(stages)
    tables: list[np.ndarray] = []
    for k in range(1, stages + 1):
        dist, errs = evolve_window(dist, k, model, channel, rule)
        t1[k - 1] = errs.type1
        t2[k - 1] = errs.type2
        pe[k - 1] = model.prior_0 * errs.type1 + model.prior_1 * errs.type2
        if collect_cutoffs:
            tables.append(errs.cutoffs)
    series = SeriesResult(
        np.arange(1, stages + 1),
        pe,
        meta={"producer": "exact", "capacity": memory.capacity},
        extra={"p0_type1": t1, "p1_type2": t2},
    )
    if collect_cutoffs:
        return series, tables
    return series


@dataclass
class MartingaleReport:
    max_deviation: float
    stage_deviations: np.ndarray
    tail_mass: np.ndarray
    tail_threshold: float


def martingale_check(
    schedule: FlipSchedule, model: BeliefModel, k_max: int, tail_threshold: float = 0.5
) -> MartingaleReport:
    """Enumerate all flip-channel broadcast histories up to depth k_max.

    stage_deviations[k-1] is the largest one-step martingale defect of the
    public likelihood ratio when extending histories of length k - 1, and
    tail_mass[k-1] the hypothesis-0 mass on histories of length k whose
    likelihood ratio exceeds tail_threshold.
    """
    if not isinstance(schedule, FlipSchedule):
        raise ValueError("martingale enumeration is defined for flip channels")
    if not 1 <= k_max <= 14:
        raise ValueError(f"k_max must lie in [1, 14], got {k_max!r}")
    p0 = np.ones(1)
    p1 = np.ones(1)
    devs = np.empty(k_max)
    masses = np.empty(k_max)
    for k in range(1, k_max + 1):
        tau = _cutoffs(p0, p1, model.prior_ratio, model.prior_1)
        dec0_h0 = cdf(model, 0, tau)
        dec0_h1 = cdf(model, 1, tau)
        q = flip_prob(schedule, k)
        w = 1.0 - 2.0 * q
        a0 = q + w * dec0_h0
        a1 = q + w * dec0_h1
        c0 = np.stack([p0 * a0, p0 * (1.0 - a0)], axis=1)
        c1 = np.stack([p1 * a1, p1 * (1.0 - a1)], axis=1)
        devs[k - 1] = float(np.abs((c1.sum(axis=1) - p1) / p0).max())
        p0 = c0.ravel()
        p1 = c1.ravel()
        masses[k - 1] = float(p0[(p1 / p0) > tail_threshold].sum())
    return MartingaleReport(float(devs.max()), devs, masses, tail_threshold)
