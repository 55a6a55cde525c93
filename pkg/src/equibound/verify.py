"""Desk-scale empirical verification of the bound and the walk.

Two independent routes are provided: seeded random campaigns
(`verify_trials`) that check every sampled pair against the bound and run
the invariant-checked walk on it, and an exhaustive simplex grid search
(`grid_search_max_gap`) that serves as the brute-force oracle for
tightness. The grid search never consults the bound formula while
searching; it only reports it next to the measured maximum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .bounds import SLACK_TOL, check_bound, continuity_bound
from .core import (
    DistributionPair,
    JointDistribution,
    ValidationError,
    _as_prob,
    _xlog2x_arr,
)
from .walk import InvariantViolation, run_walk

DESK_SCALE_CELLS = 6
DESK_SCALE_STEPS = 101


@dataclass(frozen=True)
class TrialReport:
    """Aggregate of one random campaign: counts, worst ratio, worst pair."""

    trials: int
    violations: int
    max_gap_over_bound_ratio: float
    worst_pair: DistributionPair | None
    seed: int
    nx: int
    ny: int


@dataclass(frozen=True)
class GridSearchResult:
    """Result of the exhaustive grid search: measured maximum vs the bound."""

    max_gap: float
    bound: float
    argmax_pair: DistributionPair


def sample_joint(nx: int, ny: int, seed) -> JointDistribution:
    """Draw a joint grid from the flat (Dirichlet-1) measure on the simplex.

    `seed` is an int (deterministic: same seed, same draw) or a numpy
    Generator for callers managing their own stream.
    """
    nx, ny = int(nx), int(ny)
    if nx < 1 or ny < 1:
        raise ValidationError(f"nx and ny must be >= 1, got ({nx}, {ny})")
    rng = np.random.default_rng(seed)
    v = rng.dirichlet(np.ones(nx * ny))
    return JointDistribution(v.reshape(nx, ny))


def perturb_within_tv(p: JointDistribution, eps: float, seed) -> JointDistribution:
    """Move mass eps away from p: returns q with tv(p, q) = min(eps, movable).

    Donor cells are chosen at random among the positive entries of p,
    recipients at random among the remaining cells; mass is taken from the
    donors (capped by their current values) and spread over the recipients
    with random weights. `movable` is the chosen donors' total mass, so the
    achieved displacement never exceeds eps (within 1e-12) and is exactly
    eps whenever the donors carry enough. Deterministic per int seed.
    """
    eps = _as_prob(eps, "eps")
    rng = np.random.default_rng(seed)
    flat = np.array(p.probs).ravel()
    ncells = flat.size
    if eps == 0.0 or ncells == 1:
        return p
    positive = rng.permutation(np.flatnonzero(flat > 0.0))
    n_donors_max = len(positive) if len(positive) < ncells else ncells - 1
    n_donors = int(rng.integers(1, n_donors_max + 1))
    donors = positive[:n_donors]
    others = rng.permutation(np.setdiff1d(np.arange(ncells), donors))
    recipients = others[: int(rng.integers(1, len(others) + 1))]

    target = min(eps, float(flat[donors].sum()))
    remaining = target
    for c in donors:
        if remaining <= 0.0:
            break
        take = min(float(flat[c]), remaining)
        flat[c] -= take
        remaining -= take
    adds = target * rng.dirichlet(np.ones(len(recipients)))
    # the last recipient takes the exact remainder, so the added mass is target
    adds[-1] = max(0.0, target - float(adds[:-1].sum()))
    flat[recipients] += adds
    return JointDistribution(flat.reshape(p.probs.shape))


def _ratio(gap: float, bound: float) -> float:
    if bound > 0.0:
        return gap / bound
    return 0.0 if gap <= 1e-12 else math.inf


def verify_trials(nx: int, ny: int, trials: int, seed: int, eps: float | None = None) -> TrialReport:
    """Run a seeded campaign of independent bound checks plus walk certificates.

    Each trial t uses the substream default_rng(seed + t), samples p, builds
    q (an independent sample when eps is None, a TV-eps perturbation of p
    otherwise), evaluates check_bound, and runs the invariant-checked walk.
    Trials are independent, so results do not depend on execution order; a
    walk violation propagates with the trial's sub-seed attached.
    """
    nx, ny, trials, seed = int(nx), int(ny), int(trials), int(seed)
    if nx < 2:
        raise ValidationError(f"nx must be >= 2, got {nx}")
    if ny < 1:
        raise ValidationError(f"ny must be >= 1, got {ny}")
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    if seed < 0:
        raise ValidationError(f"seed must be >= 0, got {seed}")
    if eps is not None:
        eps = _as_prob(eps, "eps")

    violations = 0
    max_ratio = 0.0
    worst: DistributionPair | None = None
    for t in range(trials):
        sub_seed = seed + t
        rng = np.random.default_rng(sub_seed)
        p = sample_joint(nx, ny, rng)
        q = sample_joint(nx, ny, rng) if eps is None else perturb_within_tv(p, eps, rng)
        pair = DistributionPair(p, q)
        result = check_bound(pair)
        if result.slack < -SLACK_TOL:
            violations += 1
        ratio = _ratio(result.gap, result.bound_at_tv)
        if worst is None or ratio > max_ratio:
            max_ratio = ratio
            worst = pair
        try:
            run_walk(pair, snapshots="none")
        except InvariantViolation as exc:
            raise InvariantViolation(
                f"{exc} [trial sub-seed {sub_seed}, nx={nx}, ny={ny}, eps={eps}]"
            ) from exc
    return TrialReport(
        trials=trials,
        violations=violations,
        max_gap_over_bound_ratio=max_ratio,
        worst_pair=worst,
        seed=seed,
        nx=nx,
        ny=ny,
    )


def _compositions(total: int, parts: int) -> np.ndarray:
    """All orderings of `total` units into `parts` nonnegative cells, one per row."""
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    rows = []
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        row = []
        for b in bars:
            row.append(b - prev - 1)
            prev = b
        row.append(total + parts - 2 - prev)
        rows.append(row)
    return np.array(rows, dtype=np.int64)


def grid_search_max_gap(nx: int, ny: int, eps: float, steps_per_dim: int) -> GridSearchResult:
    """Exhaustively maximize the equivocation gap over grid pairs within TV <= eps.

    Every grid point is a composition of steps_per_dim into nx*ny cells
    scaled to the simplex. Feasibility is decided in exact integer
    arithmetic (L1 distance of the counts), so no pair is lost to float
    noise. The search prunes with its own best-so-far gap only; the bound is
    computed once for the report and never steers the search. Guarded to
    desk scale: nx*ny <= 6 and steps_per_dim <= 101.
    """
    nx, ny, steps = int(nx), int(ny), int(steps_per_dim)
    if nx < 2:
        raise ValidationError(f"nx must be >= 2, got {nx}")
    if ny < 1:
        raise ValidationError(f"ny must be >= 1, got {ny}")
    cells = nx * ny
    if cells > DESK_SCALE_CELLS:
        raise ValidationError(f"nx*ny = {cells} exceeds the desk-scale guard {DESK_SCALE_CELLS}")
    if not 1 <= steps <= DESK_SCALE_STEPS:
        raise ValidationError(f"steps_per_dim must be in 1..{DESK_SCALE_STEPS}, got {steps}")
    eps = float(eps)
    threshold = 1.0 - 1.0 / nx
    if not (0.0 < eps <= threshold + 1e-12):
        raise ValidationError(f"eps must be in (0, {threshold}], got {eps}")

    counts = _compositions(steps, cells)
    grids = counts.reshape(-1, nx, ny) / float(steps)
    block_mass = grids.sum(axis=1)
    # H(X|Y) = H(XY) - H(Y), vectorized over all grid points
    h_values = -_xlog2x_arr(grids).sum(axis=(1, 2)) + _xlog2x_arr(block_mass).sum(axis=1)

    order = np.argsort(h_values, kind="stable")
    h_sorted = h_values[order]
    counts_sorted = counts[order]
    n = len(h_sorted)
    max_l1 = int(math.floor(2.0 * eps * steps + 1e-9))

    best = -1.0
    best_low = best_high = 0
    top_h = h_sorted[-1]
    for a in range(n):
        if top_h - h_sorted[a] <= best:
            break
        lo = int(np.searchsorted(h_sorted, h_sorted[a] + best, side="right"))
        if lo >= n:
            continue
        l1 = np.abs(counts_sorted[lo:] - counts_sorted[a]).sum(axis=1)
        feasible = np.flatnonzero(l1 <= max_l1)
        if len(feasible) == 0:
            continue
        b = lo + int(feasible[-1])
        gap = float(h_sorted[b] - h_sorted[a])
        if gap > best:
            best = gap
            best_low, best_high = a, b
    if best < 0.0:
        best = 0.0

    def _point(idx: int) -> JointDistribution:
        return JointDistribution(counts_sorted[idx].reshape(nx, ny) / float(steps))

    argmax = DistributionPair(p=_point(best_high), q=_point(best_low))
    return GridSearchResult(max_gap=best, bound=continuity_bound(eps, nx).value, argmax_pair=argmax)
