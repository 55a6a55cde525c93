import numpy as np
import pytest

from equibound import (
    BlockPartition,
    DistributionPair,
    JointDistribution,
    ValidationError,
    average_blocks,
    canonical_orient,
    conditional_entropy,
    continuity_bound,
    entropy,
    extremal_pair,
    marginal,
    process_block_empty,
    process_block_nonempty,
    reorder,
    run_walk,
    sample_joint,
    tv_distance,
)


def _pair(p_rows, q_rows):
    return DistributionPair(JointDistribution(p_rows), JointDistribution(q_rows))


def _random_pair(rng, nx, ny):
    p = JointDistribution(rng.dirichlet(np.ones(nx * ny)).reshape(nx, ny))
    q = JointDistribution(rng.dirichlet(np.ones(nx * ny)).reshape(nx, ny))
    return DistributionPair(p, q)


# ---------------------------------------------------------------- canonical_orient

def test_orient_keeps_ordered_pair():
    pair = extremal_pair(0.5, 2, 1)
    assert canonical_orient(pair) is pair


def test_orient_swaps_reversed_pair():
    pair = extremal_pair(0.5, 2, 1)
    swapped = canonical_orient(DistributionPair(pair.q, pair.p))
    assert swapped.p == pair.p
    assert swapped.q == pair.q


def test_orient_no_swap_on_tie():
    J = JointDistribution([[0.25, 0.25], [0.25, 0.25]])
    K = JointDistribution([[0.25, 0.25], [0.25, 0.25]])
    oriented = canonical_orient(DistributionPair(J, K))
    assert oriented.p is J
    assert oriented.q is K


# ---------------------------------------------------------------- reorder

def test_reorder_extremal_already_canonical():
    pair = extremal_pair(0.3, 2, 1)
    out, parts = reorder(pair)
    assert out.p == pair.p
    assert out.q == pair.q
    assert parts == [BlockPartition(j=1, in_set=(1,), out_set=(2,))]


def test_reorder_sorts_blocks_by_mass_surplus():
    # p_Y = (0.7, 0.3), q_Y = (0.4, 0.6): q_Y - p_Y = (-0.3, +0.3), so blocks swap
    pair = _pair([[0.4, 0.1], [0.3, 0.2]], [[0.2, 0.5], [0.2, 0.1]])
    out, _ = reorder(pair)
    assert np.allclose(marginal(out.p, "y"), [0.3, 0.7], atol=1e-15)
    assert np.allclose(marginal(out.q, "y"), [0.6, 0.4], atol=1e-15)


def test_reorder_all_rows_in_set():
    # block 1: q >= p entrywise, so in_set covers both rows
    pair = _pair([[0.1, 0.7], [0.2, 0.0]], [[0.3, 0.4], [0.3, 0.0]])
    _, parts = reorder(pair)
    assert parts[0] == BlockPartition(j=1, in_set=(1, 2), out_set=())


def test_reorder_sorts_in_set_by_q_descending():
    pair = _pair([[0.1, 0.3], [0.2, 0.4]], [[0.2, 0.35], [0.3, 0.15]])
    out, parts = reorder(pair)
    for j0 in range(out.ny):
        k = len(parts[j0].in_set)
        qcol = out.q.probs[:, j0]
        assert all(qcol[i] >= qcol[i + 1] for i in range(k - 1))
        assert all(qcol[i] >= qcol[i + 1] for i in range(k, out.nx - 1))


def test_reorder_preserves_entropies_and_tv():
    rng = np.random.default_rng(42)
    for _ in range(100):
        pair = _random_pair(rng, int(rng.integers(2, 6)), int(rng.integers(1, 5)))
        out, parts = reorder(pair)
        assert conditional_entropy(out.p) == pytest.approx(conditional_entropy(pair.p), abs=1e-12)
        assert conditional_entropy(out.q) == pytest.approx(conditional_entropy(pair.q), abs=1e-12)
        assert tv_distance(out.p, out.q) == pytest.approx(tv_distance(pair.p, pair.q), abs=1e-12)
        for part in parts:
            qcol = out.q.probs[:, part.j - 1]
            pcol = out.p.probs[:, part.j - 1]
            assert all(qcol[i - 1] >= pcol[i - 1] for i in part.in_set)
            assert all(qcol[i - 1] < pcol[i - 1] for i in part.out_set)


# ---------------------------------------------------------------- block processing

def test_nonempty_block_two_rows_in_set():
    pair = _pair([[0.1, 0.7], [0.2, 0.0]], [[0.3, 0.4], [0.3, 0.0]])
    out = process_block_nonempty(pair, 1)
    assert np.allclose(out.p.probs[:, 0], [0.3, 0.0], atol=1e-15)
    assert np.allclose(out.q.probs[:, 0], [0.6, 0.0], atol=1e-15)
    # block TV contribution 0.3 before and after; the other block untouched
    assert np.abs(out.p.probs[:, 0] - out.q.probs[:, 0]).sum() == pytest.approx(0.3, abs=1e-15)
    assert np.array_equal(out.p.probs[:, 1], pair.p.probs[:, 1])
    assert np.array_equal(out.q.probs[:, 1], pair.q.probs[:, 1])


def test_nonempty_block_equal_blocks_walk_together():
    pair = _pair([[0.5], [0.5]], [[0.5], [0.5]])
    out = process_block_nonempty(pair, 1)
    assert out.p == JointDistribution([[1.0], [0.0]])
    assert out.q == JointDistribution([[1.0], [0.0]])
    assert tv_distance(out.p, out.q) == 0.0


def test_nonempty_block_singleton_in_set():
    # Phase 1 is a no-op; Phase 2 moves s = 0.2 in both grids
    pair = _pair([[0.2, 0.5], [0.3, 0.0]], [[0.25, 0.55], [0.2, 0.0]])
    before = np.abs(pair.p.probs[:, 0] - pair.q.probs[:, 0]).sum()
    out = process_block_nonempty(pair, 1)
    assert np.allclose(out.q.probs[:, 0], [0.45, 0.0], atol=1e-15)
    assert np.allclose(out.p.probs[:, 0], [0.4, 0.1], atol=1e-15)
    after = np.abs(out.p.probs[:, 0] - out.q.probs[:, 0]).sum()
    assert before == pytest.approx(0.15, abs=1e-15)
    assert after == pytest.approx(before, abs=1e-15)


def test_nonempty_block_precondition():
    pair = _pair([[0.4, 0.2], [0.3, 0.1]], [[0.2, 0.5], [0.2, 0.1]])
    with pytest.raises(ValidationError, match="empty"):
        process_block_nonempty(pair, 1)


def test_empty_block_cap_binds_and_switches():
    pair = _pair([[0.4, 0.2], [0.3, 0.1]], [[0.2, 0.5], [0.2, 0.1]])
    out = process_block_empty(pair, 1)
    assert np.allclose(out.q.probs[:, 0], [0.4, 0.0], atol=1e-15)
    assert np.array_equal(out.p.probs, pair.p.probs)
    assert np.abs(out.p.probs[:, 0] - out.q.probs[:, 0]).sum() == pytest.approx(0.3, abs=1e-15)


def test_empty_block_sources_run_out():
    pair = _pair([[0.9, 0.0], [0.05, 0.05]], [[0.5, 0.4], [0.04, 0.06]])
    out = process_block_empty(pair, 1)
    assert np.allclose(out.q.probs[:, 0], [0.54, 0.0], atol=1e-15)
    assert out.q.probs[0, 0] == pytest.approx(marginal(pair.q, "y")[0], abs=1e-15)
    assert np.array_equal(out.p.probs, pair.p.probs)


def test_empty_block_single_row_is_terminal():
    pair = _pair([[0.7, 0.3]], [[0.4, 0.6]])
    out = process_block_empty(pair, 1)
    assert out.p == pair.p
    assert out.q == pair.q


def test_empty_block_precondition():
    pair = _pair([[0.1, 0.7], [0.2, 0.0]], [[0.3, 0.4], [0.3, 0.0]])
    with pytest.raises(ValidationError, match="nonempty"):
        process_block_empty(pair, 1)


def test_block_processing_preserves_block_masses():
    rng = np.random.default_rng(7)
    for _ in range(100):
        pair = _random_pair(rng, int(rng.integers(2, 6)), int(rng.integers(1, 4)))
        reordered, parts = reorder(canonical_orient(pair))
        for part in parts:
            before_p = marginal(reordered.p, "y")
            before_q = marginal(reordered.q, "y")
            if part.in_set:
                out = process_block_nonempty(reordered, part.j)
            else:
                out = process_block_empty(reordered, part.j)
            assert np.allclose(marginal(out.p, "y"), before_p, atol=1e-12)
            assert np.allclose(marginal(out.q, "y"), before_q, atol=1e-12)
            assert tv_distance(out.p, out.q) == pytest.approx(
                tv_distance(reordered.p, reordered.q), abs=1e-12
            )
            # processed block of q is a point mass on the top row
            assert np.all(out.q.probs[1:, part.j - 1] == 0.0)
            reordered = out


# ---------------------------------------------------------------- average_blocks

def test_average_blocks_examples():
    assert average_blocks(JointDistribution([[0.5, 0.0], [0.0, 0.5]])) == JointDistribution(
        [[0.25, 0.25], [0.25, 0.25]]
    )
    J = JointDistribution([[0.3, 0.3], [0.2, 0.2]])
    assert average_blocks(J) == J
    assert average_blocks(JointDistribution([[1.0, 0.0], [0.0, 0.0]])) == JointDistribution(
        [[0.5, 0.5], [0.0, 0.0]]
    )


def test_average_blocks_is_product_with_uniform_y():
    rng = np.random.default_rng(11)
    for _ in range(50):
        nx, ny = int(rng.integers(1, 6)), int(rng.integers(1, 5))
        J = JointDistribution(rng.dirichlet(np.ones(nx * ny)).reshape(nx, ny))
        out = average_blocks(J)
        assert np.allclose(marginal(out, "y"), np.full(ny, 1.0 / ny), atol=1e-12)
        assert np.allclose(marginal(out, "x"), marginal(J, "x"), atol=1e-13)
        # every block identical
        assert np.all(out.probs == out.probs[:, :1])


def test_average_blocks_contracts_tv_and_raises_entropy():
    rng = np.random.default_rng(13)
    for _ in range(200):
        nx, ny = int(rng.integers(2, 6)), int(rng.integers(1, 5))
        pair = _random_pair(rng, nx, ny)
        ap, aq = average_blocks(pair.p), average_blocks(pair.q)
        assert tv_distance(ap, aq) <= tv_distance(pair.p, pair.q) + 1e-12
        assert conditional_entropy(ap) >= conditional_entropy(pair.p) - 1e-9


# ---------------------------------------------------------------- run_walk

def test_walk_extremal_pair_is_fixed_point():
    pair = extremal_pair(0.5, 2, 1)
    trace = run_walk(pair)
    assert all(step.tv == 0.5 for step in trace.steps)
    assert all(step.gap == 1.0 for step in trace.steps)
    assert trace.final.p == pair.p
    assert trace.final.q == pair.q


def test_walk_identical_pair():
    J = JointDistribution([[0.3, 0.2], [0.1, 0.4]])
    trace = run_walk(DistributionPair(J, J))
    assert trace.final_tv == 0.0
    assert trace.final_gap >= 0.0
    assert conditional_entropy(trace.final.q) == pytest.approx(0.0, abs=1e-12)


def test_walk_second_saturating_family():
    # initial gap 1 at tv 0.5 and bound(0.5, 2) = 1 pin the final gap at 1
    p = JointDistribution([[0.25, 0.25], [0.25, 0.25]])
    q = JointDistribution([[0.5, 0.5], [0.0, 0.0]])
    trace = run_walk(DistributionPair(p, q))
    assert trace.final_gap == pytest.approx(1.0, abs=1e-12)
    assert trace.final_tv <= 0.5 + 1e-12


def test_walk_trace_invariants_on_random_pairs():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        nx, ny = int(rng.integers(1, 6)), int(rng.integers(1, 5))
        pair = _random_pair(rng, nx, ny)
        trace = run_walk(pair)
        tvs = [s.tv for s in trace.steps]
        gaps = [s.gap for s in trace.steps]
        assert all(b <= a + 1e-9 for a, b in zip(tvs, tvs[1:]))
        assert all(b >= a - 1e-9 for a, b in zip(gaps, gaps[1:]))
        assert conditional_entropy(trace.final.q) <= 1e-9
        assert marginal(trace.final.q, "x")[0] == pytest.approx(1.0, abs=1e-9)
        # the final gap is the entropy of the final X-marginal of p
        assert trace.final_gap == pytest.approx(entropy(marginal(trace.final.p, "x")), abs=1e-12)
        if nx >= 2:
            assert trace.final_gap <= continuity_bound(trace.initial_tv, nx).value + 1e-9
        assert trace.final_gap >= trace.initial_gap - 1e-9


def test_walk_snapshot_modes():
    pair = DistributionPair(
        JointDistribution([[0.2, 0.3], [0.4, 0.1]]),
        JointDistribution([[0.4, 0.1], [0.1, 0.4]]),
    )
    phases = run_walk(pair, snapshots="phases")
    assert all(s.p is not None and s.q is not None for s in phases.steps)

    none = run_walk(pair, snapshots="none")
    assert all(s.p is None and s.q is None for s in none.steps)
    assert [s.label for s in none.steps] == [s.label for s in phases.steps]

    full = run_walk(pair, snapshots="all")
    sublabels = [s.label for s in full.steps if " i=" in s.label]
    assert sublabels, "per-move records expected in 'all' mode"
    assert all(s.transferred is not None for s in full.steps if " i=" in s.label)
    # phase records agree across modes
    assert [(s.label, s.tv, s.gap) for s in phases.steps] == [
        (s.label, s.tv, s.gap) for s in full.steps if " i=" not in s.label
    ]


def test_walk_rejects_unknown_snapshot_mode():
    pair = extremal_pair(0.3, 2, 1)
    with pytest.raises(ValidationError):
        run_walk(pair, snapshots="verbose")


def test_walk_single_outcome_alphabet():
    pair = _pair([[0.7, 0.3]], [[0.4, 0.6]])
    trace = run_walk(pair)
    assert trace.final_gap == 0.0
    assert conditional_entropy(trace.final.q) == 0.0


def test_walk_seeded_campaign_matches_verify_route():
    # same sub-seed derivation as verify_trials, exercised directly
    for t in range(50):
        rng = np.random.default_rng(900 + t)
        p = sample_joint(3, 3, rng)
        q = sample_joint(3, 3, rng)
        trace = run_walk(DistributionPair(p, q), snapshots="none")
        assert trace.final_gap >= abs(conditional_entropy(p) - conditional_entropy(q)) - 1e-9


# ---------------------------------------------------------------- trace types

def test_block_partition_validation():
    with pytest.raises(ValidationError):
        BlockPartition(j=1, in_set=(1, 2), out_set=(2,))
    with pytest.raises(ValidationError):
        BlockPartition(j=1, in_set=(2,), out_set=(1,))
    part = BlockPartition(j=1, in_set=(1,), out_set=(2, 3))
    assert part.in_set == (1,)
