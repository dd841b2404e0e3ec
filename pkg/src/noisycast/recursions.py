"""Deterministic shrink recursions c_{k+1} = c_k * (1 - delta_k * c_k**n).

These one-line recursions are the backbone of every convergence-rate law in
the package: c_k is a public-belief (or error) proxy, delta_k the per-stage
informativeness times a constant from the signal tails, and n = beta + 1 the
tail exponent plus one.  Summable delta forces a positive limit, divergent
delta forces zero, and constant delta gives the clean k**(-1/n) decay whose
extremes lemma3_sandwich pins down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import SeriesResult, default_grid
from .belief_model import BeliefModel, tail_constants
from .channels import FlipSchedule, target_informativeness

_CHUNK = 1 << 20


class StepSizeError(ValueError):
    """delta_k * c_k**n reached 1 and the next iterate would not be positive."""

    def __init__(self, stage: int, next_value: float):
        self.stage = stage
        self.next_value = next_value
        super().__init__(
            f"step at stage {stage} drives the iterate to {next_value}; "
            f"the recursion needs delta_k * c_k**n < 1"
        )


@dataclass(frozen=True)
class RecursionSpec:
    """initial value c_1, exponent n, and delta as a float or a callable
    mapping an integer stage array to per-stage values."""

    initial: float
    exponent: int
    delta: object

    def __post_init__(self) -> None:
        if not 0.0 < self.initial < 1.0:
            raise ValueError(f"initial value must lie in (0, 1), got {self.initial!r}")
        if int(self.exponent) != self.exponent or self.exponent < 1:
            raise ValueError(f"exponent must be an integer >= 1, got {self.exponent!r}")
        if not callable(self.delta) and not np.isscalar(self.delta):
            raise ValueError("delta must be a float or a callable on stage arrays")


def _delta_chunk(delta, ks: np.ndarray) -> np.ndarray:
    if callable(delta):
        vals = np.asarray(delta(ks), dtype=float)
        if vals.shape != ks.shape:
            vals = np.broadcast_to(vals, ks.shape).astype(float)
    else:
        vals = np.full(ks.shape, float(delta))
    if (vals < 0.0).any() or not np.isfinite(vals).all():
        raise ValueError("delta must be finite and nonnegative at every stage")
    return vals


def iterate_recursion(spec: RecursionSpec, stages: int, grid=None) -> SeriesResult:
    """Run the recursion to c_stages, recording values on the grid."""
    if stages < 1:
        raise ValueError(f"stages must be >= 1, got {stages!r}")
    grid_arr = np.asarray(default_grid(stages) if grid is None else grid, dtype=np.int64)
    if grid_arr[0] < 1 or grid_arr[-1] > stages or (np.diff(grid_arr) <= 0).any():
        raise ValueError("grid must be strictly increasing inside [1, stages]")
    targets = [int(g) for g in grid_arr]
    vals = np.empty(len(targets))
    gi = 0
    c = float(spec.initial)
    if targets[0] == 1:
        vals[0] = c
        gi = 1
    next_rec = targets[gi] if gi < len(targets) else 0
    n = spec.exponent
    kk = 1
    for lo in range(1, stages, _CHUNK):
        hi = min(lo + _CHUNK - 1, stages - 1)
        ks = np.arange(lo, hi + 1, dtype=np.int64)
        ds = _delta_chunk(spec.delta, ks).tolist()
        if n == 1:
            for d in ds:
                step = d * c * c
                if step >= c:
                    raise StepSizeError(kk, c - step)
                c -= step
                kk += 1
                if kk == next_rec:
                    vals[gi] = c
                    gi += 1
                    next_rec = targets[gi] if gi < len(targets) else 0
        elif n == 2:
            for d in ds:
                step = d * c * c * c
                if step >= c:
                    raise StepSizeError(kk, c - step)
                c -= step
                kk += 1
                if kk == next_rec:
                    vals[gi] = c
                    gi += 1
                    next_rec = targets[gi] if gi < len(targets) else 0
        else:
            for d in ds:
                step = d * c ** (n + 1)
                if step >= c:
                    raise StepSizeError(kk, c - step)
                c -= step
                kk += 1
                if kk == next_rec:
                    vals[gi] = c
                    gi += 1
                    next_rec = targets[gi] if gi < len(targets) else 0
    return SeriesResult(
        grid_arr,
        vals,
        meta={"producer": "recursion", "exponent": n, "initial": spec.initial, "stages": stages},
    )


@dataclass(frozen=True)
class SandwichResult:
    low: float
    high: float
    k_min: int
    stages: int


def lemma3_sandwich(spec: RecursionSpec, k_min: int, stages: int) -> SandwichResult:
    """Extremes of c_k * (delta_k * k)**(1/n) over k_min <= k <= stages.

    For constant delta the normalised iterate converges, so the band between
    the extremes certifies c_k = Theta(k**(-1/n)) on the window.
    """
    if not 1 <= k_min <= stages:
        raise ValueError(f"need 1 <= k_min <= stages, got {k_min!r}, {stages!r}")
    inv_n = 1.0 / spec.exponent
    n = spec.exponent
    c = float(spec.initial)
    low = math.inf
    high = -math.inf
    for lo in range(1, stages + 1, _CHUNK):
        hi = min(lo + _CHUNK - 1, stages)
        ks = np.arange(lo, hi + 1, dtype=np.int64)
        ds = _delta_chunk(spec.delta, ks).tolist()
        for i, d in enumerate(ds):
            k = lo + i
            if k >= k_min:
                r = c * (d * k) ** inv_n
                if r < low:
                    low = r
                if r > high:
                    high = r
            if k < stages:
                step = d * c ** (n + 1) if n > 2 else (d * c * c if n == 1 else d * c * c * c)
                if step >= c:
                    raise StepSizeError(k, c - step)
                c -= step
    return SandwichResult(low, high, k_min, stages)


@dataclass(frozen=True)
class LimitClassification:
    label: str
    estimate: float
    checkpoints: tuple
    values: tuple
    relative_changes: tuple


def lemma4_classify(spec: RecursionSpec, stages: int, tol: float = 1e-3) -> LimitClassification:
    """Label the recursion's limit by comparing checkpoint values.

    Checkpoints sit at stages/8, /4, /2, and stages.  A final doubling that
    moves the iterate by a relative tol or less reads as a positive limit; an
    iterate that has collapsed below tol * initial, or that keeps moving by
    at least tol across every doubling, reads as convergence to zero.  tol
    sets the plateau resolution: limits smaller than roughly tol * initial
    cannot be told apart from zero at the given horizon.
    """
    if stages < 8:
        raise ValueError(f"classification needs stages >= 8, got {stages!r}")
    if not 0.0 < tol < 1.0:
        raise ValueError(f"tol must lie in (0, 1), got {tol!r}")
    cps = [stages // 8, stages // 4, stages // 2, stages]
    series = iterate_recursion(spec, stages, grid=np.asarray(cps))
    v = series.values
    rel = tuple(float(abs(v[i + 1] - v[i]) / v[i]) for i in range(3))
    estimate = float(v[-1])
    if rel[-1] < tol and estimate > 1e-12:
        label = "positive_limit"
    elif estimate < tol * spec.initial or min(rel) >= tol:
        label = "converges_to_zero"
    else:
        label = "inconclusive"
    return LimitClassification(label, estimate, tuple(cps), tuple(float(x) for x in v), rel)


def type1_lower_bound(series: SeriesResult, model: BeliefModel) -> SeriesResult:
    """Lower bound on the stage error implied by a public-belief series.

    With beta = 0 the bound is (gamma / 4) * b_k**2 and charges the node
    after the one whose belief is b_k; for beta > 0 it is
    (gamma / (beta + 1)) * b_k**(beta + 2) at the same stage.
    """
    beta, gamma = tail_constants(model)
    if beta == 0:
        stages = series.stages + 1
        values = 0.25 * gamma * series.values**2
    else:
        stages = series.stages
        values = (gamma / (beta + 1.0)) * series.values ** (beta + 2.0)
    meta = dict(series.meta)
    meta["derived"] = "type1_lower_bound"
    return SeriesResult(stages, values, meta=meta)


def informativeness_delta(model: BeliefModel, schedule: FlipSchedule, denominator: str = "beta_plus_one"):
    """Per-stage delta_k = coeff * Q_k with the coefficient read off the
    signal tails.  denominator 'beta_plus_one' uses gamma / (beta + 1), the
    constant the tail integral produces; 'beta' uses gamma / beta, a looser
    classical normalisation (at beta = 0 both reduce to gamma, the endpoint
    density)."""
    beta, gamma = tail_constants(model)
    if denominator == "beta_plus_one":
        coeff = gamma / (beta + 1.0)
    elif denominator == "beta":
        coeff = gamma if beta == 0 else gamma / beta
    else:
        raise ValueError(f"denominator must be beta_plus_one or beta, got {denominator!r}")
    return lambda ks: coeff * target_informativeness(schedule, ks)


def rate_recursion(
    model: BeliefModel,
    schedule: FlipSchedule,
    initial: float,
    denominator: str = "beta_plus_one",
) -> RecursionSpec:
    """Recursion spec for a belief chain: exponent beta + 1, channel-driven delta."""
    beta = model.beta
    if abs(beta - round(beta)) > 1e-9:
        raise ValueError(f"rate recursion needs integer beta, got {beta!r}")
    return RecursionSpec(
        initial=initial,
        exponent=int(round(beta)) + 1,
        delta=informativeness_delta(model, schedule, denominator),
    )
