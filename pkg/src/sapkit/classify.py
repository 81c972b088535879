"""Size classes of tasks relative to their bottleneck capacity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .core import InputError, SapInstance, Task, bottleneck


@dataclass(frozen=True)
class ThresholdTuple:
    k: int
    delta: Fraction
    mu: Fraction


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**9)
    return Fraction(x)


def check_epsilon(epsilon) -> Fraction:
    """Return ``epsilon`` as a Fraction after validating ``1/epsilon`` is an integer >= 2."""
    eps = _as_fraction(epsilon)
    if eps <= 0 or eps > Fraction(1, 2) or eps.numerator != 1:
        raise InputError(f"epsilon must be 1/k for an integer k >= 2, got {epsilon}")
    return eps


def threshold_tuples(epsilon) -> list[ThresholdTuple]:
    """Candidate (delta_k, mu_k) pairs for k = 1..1/epsilon.

    delta_k = eps^(10k / eps^k) and mu_k = delta_{k+1}; the exponents are
    integers because 1/eps is.  Thresholds shrink doubly exponentially, which
    is why the command line lets callers override them.
    """
    eps = check_epsilon(epsilon)
    inv = eps.denominator
    out = []
    for k in range(1, inv + 1):
        delta = eps ** (10 * k * inv ** k)
        mu = eps ** (10 * (k + 1) * inv ** (k + 1))
        out.append(ThresholdTuple(k, delta, mu))
    return out


def split_tasks(instance: SapInstance, mu, delta) -> tuple[list[Task], list[Task], list[Task]]:
    """Partition into (small, middle, large) by comparing ``d`` with the bottleneck."""
    mu, delta = _as_fraction(mu), _as_fraction(delta)
    if not 0 < mu <= delta:
        raise InputError("need 0 < mu <= delta")
    small, middle, large = [], [], []
    for task in instance.tasks:
        b = bottleneck(instance, task)
        if task.d > delta * b:
            large.append(task)
        elif task.d <= mu * b:
            small.append(task)
        else:
            middle.append(task)
    return small, middle, large


def large_per_edge_bound(u_e: int, delta) -> int:
    """Upper bound on large tasks sharing an edge of capacity ``u_e``: ceil(log2(u_e) / delta^2)."""
    delta = _as_fraction(delta)
    if u_e < 2 or not 0 < delta <= 1:
        raise InputError("need u_e >= 2 and 0 < delta <= 1")
    if u_e & (u_e - 1) == 0:
        log = Fraction(u_e.bit_length() - 1)
        q = log / (delta * delta)
        return -(-q.numerator // q.denominator)
    return math.ceil(math.log2(u_e) / float(delta * delta) - 1e-12)


def audit_large_per_edge(instance: SapInstance, placement, delta) -> list[int]:
    """Edges (with capacity >= 2) where the placed large tasks exceed the bound."""
    delta = _as_fraction(delta)
    bad = []
    for e, u in enumerate(instance.capacities):
        if u < 2:
            continue
        count = 0
        for tid in placement:
            task = instance.task(tid)
            if task.uses(e) and task.d > delta * bottleneck(instance, task):
                count += 1
        if count > large_per_edge_bound(u, delta):
            bad.append(e)
    return bad
