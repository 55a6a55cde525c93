"""The tight equivocation continuity bound, its saturating pair, and a bound check.

For alphabets with |X| = nx >= 2 and any conditioning alphabet, two joint
distributions within total variation eps of each other have equivocations
differing by at most

    eps * log2(nx - 1) + h(eps)        for eps in (0, 1 - 1/nx],

with h the binary entropy. The bound is saturated by a point mass paired
against a distribution spreading eps uniformly over the other nx - 1
outcomes of the same block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DistributionPair,
    JointDistribution,
    ValidationError,
    binary_entropy,
    conditional_entropy,
    tv_distance,
    _as_prob,
)

SLACK_TOL = 1e-9  # absorbs accumulated float error in entropy sums
_EDGE_TOL = 1e-12  # grace at the eps = 1 - 1/nx boundary for float inputs


@dataclass(frozen=True)
class BoundResult:
    """Value of the continuity bound at a given TV radius.

    `clamped` is set when epsilon exceeded 1 - 1/nx and the trivial
    envelope log2(nx) was returned instead of the formula.
    """

    epsilon: float
    nx: int
    value: float
    clamped: bool


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of checking one pair against the bound at its measured TV."""

    gap: float
    tv: float
    bound_at_tv: float
    holds: bool
    slack: float


def _check_nx(nx: int) -> int:
    nx = int(nx)
    if nx < 2:
        raise ValidationError(f"nx must be >= 2, got {nx}")
    return nx


def continuity_bound(epsilon: float, nx: int) -> BoundResult:
    """Largest possible equivocation gap at TV radius epsilon for an X alphabet of size nx.

    Returns epsilon * log2(nx - 1) + h(epsilon) for epsilon in [0, 1 - 1/nx]
    (the value at 0 is defined by continuity); beyond that radius the
    formula no longer applies and the trivial envelope log2(nx) is returned
    with clamped = True.
    """
    nx = _check_nx(nx)
    epsilon = _as_prob(epsilon, "epsilon")
    threshold = 1.0 - 1.0 / nx
    if epsilon > threshold:
        return BoundResult(epsilon=epsilon, nx=nx, value=math.log2(nx), clamped=True)
    value = epsilon * math.log2(nx - 1) + binary_entropy(epsilon)
    return BoundResult(epsilon=epsilon, nx=nx, value=value, clamped=False)


def extremal_pair(epsilon: float, nx: int, ny: int = 1) -> DistributionPair:
    """The saturating pair at TV radius epsilon: gap equals the bound exactly.

    q puts all mass on outcome (1, 1); p keeps 1 - epsilon there and spreads
    epsilon uniformly over the other nx - 1 outcomes of block 1. All blocks
    j != 1 are zero (any block choice is equivalent under the block
    symmetries). tv(p, q) = epsilon and the equivocation gap equals
    continuity_bound(epsilon, nx).value.
    """
    nx = _check_nx(nx)
    ny = int(ny)
    if ny < 1:
        raise ValidationError(f"ny must be >= 1, got {ny}")
    epsilon = float(epsilon)
    threshold = 1.0 - 1.0 / nx
    if not (0.0 < epsilon <= threshold + _EDGE_TOL):
        raise ValidationError(f"epsilon must be in (0, {threshold}], got {epsilon}")
    q = np.zeros((nx, ny))
    q[0, 0] = 1.0
    p = np.zeros((nx, ny))
    p[0, 0] = 1.0 - epsilon
    p[1:, 0] = epsilon / (nx - 1)
    return DistributionPair(JointDistribution(p), JointDistribution(q))


def check_bound(pair: DistributionPair) -> BoundCheck:
    """Measure a pair's equivocation gap against the bound at its measured TV.

    slack = bound_at_tv - gap; the pair `holds` when slack >= -1e-9.
    """
    nx = _check_nx(pair.nx)
    gap = abs(conditional_entropy(pair.p) - conditional_entropy(pair.q))
    tv = tv_distance(pair.p, pair.q)
    bound_at_tv = continuity_bound(tv, nx).value
    slack = bound_at_tv - gap
    return BoundCheck(gap=gap, tv=tv, bound_at_tv=bound_at_tv, holds=bool(slack >= -SLACK_TOL), slack=slack)
