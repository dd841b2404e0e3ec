"""Who sees whom: per-node observation windows and relay-chain depth.

Node k observes the corrupted broadcasts of its m_k immediate predecessors,
m_k given by a memory schedule.  backward_search_depth measures how far
information can be relayed to node k through unerased hops: it is the
largest n such that a chain of n hops, each spanning at most n stages, fits
among the existing nodes (n * n < k) with every node along the trailing
stretch able to look back at least n stages.  With full memory this equals
isqrt(k - 1) exactly; the sporadic family shows how rare long windows choke
the depth down to 1 no matter how large they individually are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_MEMORY_FAMILIES = ("bounded", "power", "full", "sporadic")


@dataclass(frozen=True)
class MemorySchedule:
    """family 'bounded' looks back capacity stages, 'power' ceil(k**sigma),
    'full' sees everything, 'sporadic' sees isqrt(k) at perfect squares and
    a single stage otherwise.  All are truncated to the k - 1 existing nodes."""

    family: str
    capacity: int | None = None
    sigma: float | None = None

    def __post_init__(self) -> None:
        if self.family not in _MEMORY_FAMILIES:
            raise ValueError(f"unknown memory family {self.family!r}, expected one of {_MEMORY_FAMILIES}")
        if self.family == "bounded":
            if self.capacity is None or int(self.capacity) != self.capacity or self.capacity < 1:
                raise ValueError(f"bounded family needs integer capacity >= 1, got {self.capacity!r}")
        elif self.capacity is not None:
            raise ValueError(f"{self.family} family takes no capacity")
        if self.family == "power":
            if self.sigma is None or not 0.0 < self.sigma <= 1.0:
                raise ValueError(f"power family needs sigma in (0, 1], got {self.sigma!r}")
        elif self.sigma is not None:
            raise ValueError(f"{self.family} family takes no sigma")


def memory_size(schedule: MemorySchedule, k: int) -> int:
    """Number of predecessors node k observes.  Node 1 observes nobody."""
    if k < 1:
        raise ValueError(f"nodes are 1-based, got {k!r}")
    if k == 1:
        return 0
    fam = schedule.family
    if fam == "bounded":
        return min(schedule.capacity, k - 1)
    if fam == "power":
        return min(math.ceil(k**schedule.sigma), k - 1)
    if fam == "full":
        return k - 1
    r = math.isqrt(k)
    return min(r if r * r == k else 1, k - 1)


def _sporadic_min(lo: int, hi: int) -> int:
    """Minimum sporadic-family memory over nodes lo..hi (all >= 2)."""
    best = hi
    for j in range(lo, hi + 1):
        r = math.isqrt(j)
        m = min(r if r * r == j else 1, j - 1)
        if m < best:
            best = m
            if best <= 1:
                break
    return best


def backward_search_depth(schedule: MemorySchedule, k: int) -> int:
    """Largest n with n * n <= k - 1 and memory >= n over nodes k - n*n + n .. k.

    The window is the set of possible hop origins of an n-hop chain ending
    at node k with hops of length at most n.  Growing n only enlarges the
    window and raises the bar, so the feasible set of n is downward closed
    and a binary search applies.
    """
    if k < 1:
        raise ValueError(f"nodes are 1-based, got {k!r}")
    if k < 2:
        return 0
    fam = schedule.family
    cap = schedule.capacity
    sg = schedule.sigma
    best = 0
    lo, hi = 1, math.isqrt(k - 1)
    while lo <= hi:
        n = (lo + hi) // 2
        j0 = k - n * n + n
        if fam == "full":
            ok = j0 - 1 >= n
        elif fam == "bounded":
            ok = n <= cap and j0 - 1 >= n
        elif fam == "power":
            ok = min(math.ceil(j0**sg), j0 - 1) >= n
        else:
            ok = _sporadic_min(j0, k) >= n
        if ok:
            best = n
            lo = n + 1
        else:
            hi = n - 1
    return best


def chain_success_probability(erasure_level: float, hops: int) -> float:
    """Probability that `hops` scans of `hops` candidates each find an
    unerased broadcast, erasures independent at the given level."""
    if not 0.0 <= erasure_level <= 1.0:
        raise ValueError(f"erasure level must lie in [0, 1], got {erasure_level!r}")
    if hops < 1 or int(hops) != hops:
        raise ValueError(f"hops must be a positive integer, got {hops!r}")
    return (1.0 - erasure_level**hops) ** hops
