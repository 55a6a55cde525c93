"""Executable simplex walk: transport a pair to the extremal configuration.

The walk turns the tightness argument into a runtime-checkable certificate.
Starting from any pair (p, q) it

1. orients the pair so H(X|Y) of p is the larger equivocation,
2. reorders blocks and rows into a canonical form,
3. walks q block by block until every block of q is a point mass
   (so H(X'|Y') = 0), moving shared weight in p where needed,
4. averages both grids over blocks, leaving product distributions with a
   uniform Y-marginal.

Along the way the total variation distance never increases and the
equivocation gap never decreases; both are re-measured after every recorded
step and a violation beyond 1e-9 raises InvariantViolation (that signals an
implementation bug, never valid-input behavior). The final gap is then at
most the continuity bound evaluated at the initial TV.

Block labels, trace labels and BlockPartition index sets are 1-based;
in-memory arrays are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np

from .bounds import continuity_bound
from .core import (
    DistributionPair,
    JointDistribution,
    ValidationError,
    conditional_entropy,
    _cond_entropy_mixture,
)

STEP_TOL = 1e-9  # tolerance for every walk invariant

SnapshotMode = Literal["phases", "all", "none"]
_SNAPSHOT_MODES = ("phases", "all", "none")

# move callback: (kind, 1-based row, transferred mass)
_OnMove = Optional[Callable[[str, int, float], None]]


class InvariantViolation(RuntimeError):
    """A walk step broke a monotonicity or terminal-state guarantee."""


@dataclass(frozen=True)
class BlockPartition:
    """Within block j, the rows where q >= p (in_set) and where q < p (out_set).

    Indices are 1-based and refer to positions after reordering, so every
    index in in_set precedes every index in out_set.
    """

    j: int
    in_set: tuple[int, ...]
    out_set: tuple[int, ...]

    def __post_init__(self) -> None:
        merged = sorted(self.in_set + self.out_set)
        if merged != list(range(1, len(merged) + 1)):
            raise ValidationError(f"in_set {self.in_set} and out_set {self.out_set} must partition 1..nx")
        if self.in_set and self.out_set and max(self.in_set) > min(self.out_set):
            raise ValidationError("every in_set index must precede every out_set index")


@dataclass(frozen=True)
class WalkStep:
    """One recorded step: label, measured tv/gap, optional snapshots and moved mass."""

    label: str
    tv: float
    gap: float
    p: JointDistribution | None = None
    q: JointDistribution | None = None
    transferred: float | None = None


@dataclass(frozen=True)
class WalkTrace:
    """Ordered record of a walk, with the untouched initial and final pairs."""

    steps: tuple[WalkStep, ...]
    initial: DistributionPair
    final: DistributionPair

    @property
    def initial_tv(self) -> float:
        return self.steps[0].tv

    @property
    def final_tv(self) -> float:
        return self.steps[-1].tv

    @property
    def initial_gap(self) -> float:
        return self.steps[0].gap

    @property
    def final_gap(self) -> float:
        return self.steps[-1].gap


def canonical_orient(pair: DistributionPair) -> DistributionPair:
    """Swap the pair if needed so conditional_entropy(p) >= conditional_entropy(q).

    Ties are left unchanged. Gap and TV are unaffected.
    """
    if conditional_entropy(pair.q) > conditional_entropy(pair.p):
        return DistributionPair(pair.q, pair.p)
    return pair


def reorder(pair: DistributionPair) -> tuple[DistributionPair, list[BlockPartition]]:
    """Apply the canonical block/row ordering simultaneously to both grids.

    Blocks are sorted so q_Y(j) - p_Y(j) is non-increasing (stable); within
    each block, rows with q >= p come first, each group sorted by q
    non-increasing (stable, ties keep original index order). All moves are
    block symmetries, so equivocations and TV are unchanged.

    Returns the reordered pair and the per-block partitions in the new
    (1-based) coordinates.
    """
    P = np.array(pair.p.probs)
    Q = np.array(pair.q.probs)
    nx, ny = P.shape
    order = np.argsort(-(Q.sum(axis=0) - P.sum(axis=0)), kind="stable")
    P = P[:, order]
    Q = Q[:, order]
    partitions: list[BlockPartition] = []
    for j0 in range(ny):
        qcol = Q[:, j0]
        in_rows = np.flatnonzero(qcol >= P[:, j0])
        out_rows = np.flatnonzero(qcol < P[:, j0])
        in_rows = in_rows[np.argsort(-qcol[in_rows], kind="stable")]
        out_rows = out_rows[np.argsort(-qcol[out_rows], kind="stable")]
        rowperm = np.concatenate([in_rows, out_rows])
        P[:, j0] = P[rowperm, j0]
        Q[:, j0] = Q[rowperm, j0]
        k = len(in_rows)
        partitions.append(
            BlockPartition(j=j0 + 1, in_set=tuple(range(1, k + 1)), out_set=tuple(range(k + 1, nx + 1)))
        )
    reordered = DistributionPair(JointDistribution(P), JointDistribution(Q))
    return reordered, partitions


def _concentrate(P: np.ndarray, Q: np.ndarray, j0: int, on_move: _OnMove = None) -> float:
    """Phase 1: fold q's excess over p (rows below 1 with q >= p) into q's top row.

    Touches q only. Requires Q[0, j0] >= P[0, j0]; afterwards q's top row
    dominates p's and every other row of q is dominated by p's.
    """
    moved = 0.0
    for i0 in range(1, P.shape[0]):
        if Q[i0, j0] >= P[i0, j0]:
            s = Q[i0, j0] - P[i0, j0]
            if s == 0.0:
                continue
            Q[0, j0] += s
            Q[i0, j0] = P[i0, j0]
            moved += s
            if on_move is not None:
                on_move("concentrate", i0 + 1, s)
    return moved


def _transfer(P: np.ndarray, Q: np.ndarray, j0: int, on_move: _OnMove = None) -> float:
    """Phase 2: move each remaining q weight to the top row of the block, in both grids.

    Requires Q[0, j0] >= P[0, j0] and P[i, j0] >= Q[i, j0] for i > 0; then
    each shared move of weight s keeps the block's TV contribution constant
    and cannot shrink the entropy difference (x*log2(x) is convex).
    """
    moved = 0.0
    for i0 in range(1, P.shape[0]):
        s = Q[i0, j0]
        if s == 0.0:
            continue
        Q[0, j0] += s
        P[0, j0] += s
        Q[i0, j0] = 0.0
        P[i0, j0] -= s
        moved += s
        if on_move is not None:
            on_move("transfer", i0 + 1, s)
    return moved


def _fill(P: np.ndarray, Q: np.ndarray, j0: int, on_move: _OnMove = None) -> tuple[float, bool]:
    """Empty in-set procedure: raise q's top row from the bottom rows, q only.

    Requires Q[i, j0] < P[i, j0] for all i. Sources are consumed from the
    bottom row upward; each transfer is capped at P[0, j0] - Q[0, j0] so the
    block's TV contribution is unchanged. Returns (moved, switched):
    switched is True when the cap bound the last transfer, i.e. Q[0, j0]
    reached P[0, j0] exactly and two-phase processing applies from here.
    """
    moved = 0.0
    for i0 in range(P.shape[0] - 1, 0, -1):
        avail = Q[i0, j0]
        if avail == 0.0:
            continue
        cap = P[0, j0] - Q[0, j0]
        if avail >= cap:
            t = cap if cap > 0.0 else 0.0
            if t > 0.0:
                Q[i0, j0] -= t
                moved += t
            Q[0, j0] = P[0, j0]
            if on_move is not None:
                on_move("fill", i0 + 1, t)
            return moved, True
        Q[0, j0] += avail
        Q[i0, j0] = 0.0
        moved += avail
        if on_move is not None:
            on_move("fill", i0 + 1, avail)
    return moved, False


def _check_block_label(pair: DistributionPair, j: int) -> int:
    j = int(j)
    if not 1 <= j <= pair.ny:
        raise ValidationError(f"block index {j} out of range 1..{pair.ny}")
    return j - 1


def process_block_nonempty(pair: DistributionPair, j: int) -> DistributionPair:
    """Drive block j of q to a point mass on its top row (two-phase processing).

    Precondition: the block is reordered and its in-set is nonempty, so
    q(1,j) >= p(1,j). Phase 1 concentrates q's excess into the top row;
    Phase 2 transfers the rest of the block upward in both grids. The
    block's TV contribution and both block masses are preserved, and block
    j contributes 0 to conditional_entropy(q) afterwards.
    """
    j0 = _check_block_label(pair, j)
    P = np.array(pair.p.probs)
    Q = np.array(pair.q.probs)
    if Q[0, j0] < P[0, j0]:
        raise ValidationError(f"block {j} has an empty in-set (q(1,{j}) < p(1,{j})); use process_block_empty")
    _concentrate(P, Q, j0)
    _transfer(P, Q, j0)
    return DistributionPair(JointDistribution(P), JointDistribution(Q))


def process_block_empty(pair: DistributionPair, j: int) -> DistributionPair:
    """Drive block j of q to a point mass when every row has q < p.

    Weight moves within q only, from the bottom rows into the top row, each
    transfer capped at p(1,j) - q(1,j) so TV is unchanged. If the cap binds
    the block satisfies the nonempty-in-set preconditions and processing
    continues with the two-phase procedure; otherwise the sources run out
    with q(1,j) = q_Y(j).
    """
    j0 = _check_block_label(pair, j)
    P = np.array(pair.p.probs)
    Q = np.array(pair.q.probs)
    if (Q[:, j0] >= P[:, j0]).any():
        raise ValidationError(f"block {j} has a nonempty in-set; use process_block_nonempty")
    _, switched = _fill(P, Q, j0)
    if switched:
        _concentrate(P, Q, j0)
        _transfer(P, Q, j0)
    return DistributionPair(JointDistribution(P), JointDistribution(Q))


def average_blocks(J: JointDistribution) -> JointDistribution:
    """Replace every block by the average over all blocks.

    The output is a product distribution with a uniform Y-marginal and the
    same X-marginal. The map is a uniform mixture of block permutations, so
    it cannot decrease the equivocation, and it cannot increase TV.
    """
    m = J.probs.mean(axis=1, keepdims=True)
    return JointDistribution(np.broadcast_to(m, J.probs.shape).copy())


class _TraceBuilder:
    def __init__(self, mode: SnapshotMode):
        self.mode = mode
        self.steps: list[WalkStep] = []
        self._tv: float | None = None
        self._gap: float | None = None

    def record(
        self,
        label: str,
        P: np.ndarray,
        Q: np.ndarray,
        transferred: float | None = None,
        substep: bool = False,
        absolute_gap: bool = False,
    ) -> None:
        if substep and self.mode != "all":
            return
        tv = 0.5 * float(np.abs(P - Q).sum())
        gap = _cond_entropy_mixture(P) - _cond_entropy_mixture(Q)
        if absolute_gap:
            gap = abs(gap)
        if self._tv is not None and tv > self._tv + STEP_TOL:
            raise InvariantViolation(f"step {label!r}: tv increased from {self._tv} to {tv}")
        if self._gap is not None and gap < self._gap - STEP_TOL:
            raise InvariantViolation(f"step {label!r}: gap decreased from {self._gap} to {gap}")
        self._tv, self._gap = tv, gap
        snap = self.mode == "all" or (self.mode == "phases" and not substep)
        self.steps.append(
            WalkStep(
                label=label,
                tv=tv,
                gap=gap,
                p=JointDistribution(P) if snap else None,
                q=JointDistribution(Q) if snap else None,
                transferred=transferred,
            )
        )


def run_walk(pair: DistributionPair, snapshots: SnapshotMode = "phases") -> WalkTrace:
    """Run the full walk and return its invariant-checked trace.

    `snapshots` controls how much of the state is copied into the trace:
    "phases" snapshots at phase boundaries (default), "all" additionally
    records every individual weight move, "none" keeps only labels and the
    measured tv/gap per phase.

    Guarantees on return (each checked, violation raises InvariantViolation):
    per recorded step tv is non-increasing and the gap non-decreasing within
    1e-9; the final q has conditional entropy <= 1e-9 and X-marginal 1 on
    outcome 1; and the final gap is at most the continuity bound evaluated
    at the initial TV.
    """
    if snapshots not in _SNAPSHOT_MODES:
        raise ValidationError(f"snapshots must be one of {_SNAPSHOT_MODES}, got {snapshots!r}")
    tb = _TraceBuilder(snapshots)
    tb.record("initial", pair.p.probs, pair.q.probs, absolute_gap=True)
    oriented = canonical_orient(pair)
    tb.record("orient", oriented.p.probs, oriented.q.probs)
    reordered, partitions = reorder(oriented)
    P = np.array(reordered.p.probs)
    Q = np.array(reordered.q.probs)
    tb.record("reorder", P, Q)

    for part in partitions:
        j0 = part.j - 1

        def on_move(kind: str, i: int, s: float) -> None:
            tb.record(f"block {part.j} {kind} i={i}", P, Q, transferred=s, substep=True)

        if part.in_set:
            moved = _concentrate(P, Q, j0, on_move)
            tb.record(f"block {part.j} concentrate", P, Q, transferred=moved)
            moved = _transfer(P, Q, j0, on_move)
            tb.record(f"block {part.j} transfer", P, Q, transferred=moved)
        else:
            moved, switched = _fill(P, Q, j0, on_move)
            tb.record(f"block {part.j} fill", P, Q, transferred=moved)
            if switched:
                moved = _concentrate(P, Q, j0, on_move)
                tb.record(f"block {part.j} concentrate", P, Q, transferred=moved)
                moved = _transfer(P, Q, j0, on_move)
                tb.record(f"block {part.j} transfer", P, Q, transferred=moved)

    if (Q[1:, :] > 0.0).any():
        raise InvariantViolation("blocks processed but q still has weight below the top row")

    p_avg = average_blocks(JointDistribution(P))
    q_avg = average_blocks(JointDistribution(Q))
    tb.record("average", p_avg.probs, q_avg.probs)

    final = DistributionPair(p_avg, q_avg)
    steps = tuple(tb.steps)
    final_q_entropy = conditional_entropy(final.q)
    if final_q_entropy > STEP_TOL:
        raise InvariantViolation(f"final q has conditional entropy {final_q_entropy} > {STEP_TOL}")
    q_x_top = float(final.q.probs[0, :].sum())
    if abs(q_x_top - 1.0) > STEP_TOL:
        raise InvariantViolation(f"final q_X(1) = {q_x_top}, expected 1")
    initial_tv = steps[0].tv
    final_gap = steps[-1].gap
    chain_cap = continuity_bound(initial_tv, pair.nx).value if pair.nx >= 2 else 0.0
    if final_gap > chain_cap + STEP_TOL:
        raise InvariantViolation(
            f"final gap {final_gap} exceeds the bound {chain_cap} at the initial tv {initial_tv}"
        )
    return WalkTrace(steps=steps, initial=pair, final=final)
