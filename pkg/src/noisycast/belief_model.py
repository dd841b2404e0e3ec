"""Private-signal model: a matched pair of belief densities on (0, 1).

Each node summarises its own signal as the posterior probability of
hypothesis 1, its private belief.  The conditional belief densities used
throughout are

    f0(r) = z * r**beta * (1 - r)**(beta + 1)     under hypothesis 0,
    f1(r) = z * r**(beta + 1) * (1 - r)**beta     under hypothesis 1,

with the shared normaliser z = 1 / B(beta + 1, beta + 2).  The pair obeys
f0(r) / f1(r) = (1 - r) / r, the consistency identity any private-belief
distribution must satisfy, and the mass near both endpoints vanishes like a
power with exponent beta: small beta means near-certain signals are common,
large beta makes them rare and slows everything downstream.

beta = 0 is the fully closed-form case, densities (2(1 - r), 2r) with
distribution functions (1 - (1 - r)**2, r**2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special


@dataclass(frozen=True)
class BeliefModel:
    """Tail exponent of the signal family plus the prior on hypothesis 1."""

    beta: float = 0.0
    prior_1: float = 0.5

    def __post_init__(self) -> None:
        if not (math.isfinite(self.beta) and self.beta >= 0.0):
            raise ValueError(f"beta must be a finite float >= 0, got {self.beta!r}")
        if not 0.0 < self.prior_1 < 1.0:
            raise ValueError(f"prior_1 must lie strictly inside (0, 1), got {self.prior_1!r}")

    @property
    def prior_0(self) -> float:
        return 1.0 - self.prior_1

    @property
    def prior_ratio(self) -> float:
        """prior_0 / prior_1, the likelihood-ratio threshold of the MAP test."""
        return (1.0 - self.prior_1) / self.prior_1

    @property
    def norm_constant(self) -> float:
        """Shared normaliser z of both conditional densities."""
        return float(1.0 / special.beta(self.beta + 1.0, self.beta + 2.0))


def _shape(model: BeliefModel, hypothesis: int) -> tuple[float, float]:
    """Beta-distribution shape parameters of the belief under the hypothesis."""
    if hypothesis not in (0, 1):
        raise ValueError(f"hypothesis must be 0 or 1, got {hypothesis!r}")
    if hypothesis == 0:
        return model.beta + 1.0, model.beta + 2.0
    return model.beta + 2.0, model.beta + 1.0


def density(model: BeliefModel, hypothesis: int, r):
    """Conditional density of the private belief at r.  Vectorised in r."""
    a, b = _shape(model, hypothesis)
    r = np.asarray(r, dtype=float)
    return model.norm_constant * r ** (a - 1.0) * (1.0 - r) ** (b - 1.0)


def cdf(model: BeliefModel, hypothesis: int, r):
    """Conditional distribution function of the private belief.

    Integer beta uses the exact binomial-sum form of the regularised
    incomplete beta function, so the frequently hit beta = 0 case costs a
    couple of polynomial terms and carries no quadrature error.  Non-integer
    beta falls back to the library implementation.
    """
    a, b = _shape(model, hypothesis)
    r = np.asarray(r, dtype=float)
    if float(model.beta).is_integer():
        n = int(a + b) - 1
        lo = int(a)
        out = np.zeros_like(r)
        for j in range(lo, n + 1):
            out = out + math.comb(n, j) * r**j * (1.0 - r) ** (n - j)
        return out
    return special.betainc(a, b, r)


def sample(model: BeliefModel, hypothesis: int, rng: np.random.Generator, size=None):
    """Draw private beliefs from the conditional law using the given generator."""
    a, b = _shape(model, hypothesis)
    return rng.beta(a, b, size=size)


def private_likelihood_ratio(model: BeliefModel, belief: float) -> float:
    """Likelihood ratio (hypothesis 1 over 0) of the signal behind a belief.

    belief = prior_1 * L / (prior_0 + prior_1 * L) inverted for L.  The
    endpoints come back as 0.0 and inf rather than raising: a belief of
    exactly 0 or 1 encodes an unboundedly strong signal.
    """
    if not 0.0 <= belief <= 1.0:
        raise ValueError(f"belief must lie in [0, 1], got {belief!r}")
    if belief == 0.0:
        return 0.0
    if belief == 1.0:
        return math.inf
    return model.prior_ratio * belief / (1.0 - belief)


def tail_constants(model: BeliefModel) -> tuple[float, float]:
    """(beta, gamma) with f1(r) ~ gamma * (1 - r)**beta as r -> 1.

    By symmetry the same gamma governs f0 near 0.  These two numbers are all
    the rate laws need from the signal family.
    """
    return model.beta, model.norm_constant
