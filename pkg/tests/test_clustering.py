import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.metrics import adjusted_rand_score

from rigsplit import (Clustering, SynthSpec, assign_controllers, cluster_mesh, cluster_model,
                      compress_controller, compute_offsets, generate_model, load_clustering,
                      merge_overlapping, save_clustering, whole_face)
from rigsplit.clustering import should_merge
from rigsplit.offsets import OffsetMatrix


def offsets_from(values):
    values = np.asarray(values, dtype=float)
    col_max = values.max(axis=0)
    return OffsetMatrix(values, col_max, frozenset(np.flatnonzero(col_max == 0).tolist()))


def family(ctrl_sets, K=None):
    n = len(ctrl_sets)
    return Clustering(mesh_clusters=tuple([k] for k in range(n)),
                      controller_clusters=tuple(ctrl_sets), K=K or n)


def sets(clustering):
    return [set(c.tolist()) for c in clustering.controller_clusters]


def fixpoint_violations(ctrl_sets, p):
    """Brute force: every qualifying pair left in a family."""
    return [(k, j) for k, j in itertools.combinations(range(len(ctrl_sets)), 2)
            if ctrl_sets[k] and ctrl_sets[j]
            and len(ctrl_sets[k] & ctrl_sets[j]) > p * min(len(ctrl_sets[k]), len(ctrl_sets[j]))]


# --- mesh clustering ---------------------------------------------------------------

def test_two_row_blocks():
    D = np.array([[1, 0]] * 4 + [[0, 1]] * 3, dtype=float)
    parts = cluster_mesh(offsets_from(D), 2, seed=0)
    assert sorted(p.tolist() for p in parts) == [[0, 1, 2, 3], [4, 5, 6]]


def test_single_mesh_cluster():
    D = np.random.default_rng(0).random((9, 3))
    assert [p.tolist() for p in cluster_mesh(offsets_from(D), 1)] == [list(range(9))]


def test_singleton_mesh_clusters():
    D = np.random.default_rng(1).random((6, 3))
    parts = cluster_mesh(offsets_from(D), 6)
    assert sorted(len(p) for p in parts) == [1] * 6


# --- controller compression and assignment -------------------------------------------

def test_compress_block_indicator():
    D = np.zeros((6, 1))
    D[:2, 0] = 1.0
    mesh = [np.array([0, 1]), np.array([2, 3]), np.array([4, 5])]
    assert compress_controller(offsets_from(D), mesh, 0).tolist() == [1.0, 0.0, 0.0]


def test_compress_uniform_column():
    D = np.full((6, 1), 0.3)
    mesh = [np.array([0, 4]), np.array([1, 2, 3]), np.array([5])]
    np.testing.assert_allclose(compress_controller(offsets_from(D), mesh, 0), [0.3] * 3,
                               atol=1e-15)


def test_compress_matches_group_mean_oracle():
    rng = np.random.default_rng(2)
    D = rng.random((8, 4))
    labels = np.array([0, 2, 1, 0, 2, 2, 1, 0])
    mesh = [np.flatnonzero(labels == k) for k in range(3)]
    off = offsets_from(D)
    for i in range(4):
        expected = []
        for k in range(3):
            total, count = 0.0, 0
            for l in range(8):
                if labels[l] == k:
                    total += D[l, i]
                    count += 1
            expected.append(total / count)
        np.testing.assert_allclose(compress_controller(off, mesh, i), expected, atol=1e-12)


def test_assign_peak_controller():
    # one vertex per mesh cluster so h equals the column itself
    D = np.array([[0.9], [0.01], [0.02]])
    mesh = [np.array([0]), np.array([1]), np.array([2])]
    ctrl = assign_controllers(offsets_from(D), mesh)
    assert [c.tolist() for c in ctrl] == [[0], [], []]


def test_assign_single_cluster_skips_null():
    D = np.array([[0.5, 0.0, 1.0], [1.0, 0.0, 0.2]])
    ctrl = assign_controllers(offsets_from(D), [np.array([0, 1])])
    assert [c.tolist() for c in ctrl] == [[0, 2]]


def test_assign_uniform_controller_everywhere():
    D = np.full((4, 1), 0.7)
    mesh = [np.array([0, 1]), np.array([2]), np.array([3])]
    with pytest.warns(UserWarning, match="uniformly"):
        ctrl = assign_controllers(offsets_from(D), mesh)
    assert [c.tolist() for c in ctrl] == [[0], [0], [0]]


def test_assign_parallel_matches_serial():
    model, _ = generate_model(SynthSpec(300, 20, 4, cross_talk=0.05, seed=3))
    off = compute_offsets(model)
    mesh = cluster_mesh(off, 6, seed=1)
    a = assign_controllers(off, mesh, threads=1)
    b = assign_controllers(off, mesh, threads=4)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


# --- merging -----------------------------------------------------------------------

def test_contained_pair_merges():
    out = merge_overlapping(family([{1, 2, 3}, {2, 3}]), 0.75)
    assert sets(out) == [{1, 2, 3}]
    assert out.mesh_clusters[0].tolist() == [0, 1]
    assert out.merged_from == ((0, 1),)


@pytest.mark.parametrize("p", [0.01, 0.5, 0.75, 1.0])
def test_disjoint_pair_untouched(p):
    out = merge_overlapping(family([{1, 2}, {3, 4}]), p)
    assert sets(out) == [{1, 2}, {3, 4}]


def test_chain_collapses():
    out = merge_overlapping(family([{1, 2}, {2, 3}, {3, 4}]), 0.4)
    assert sets(out) == [{1, 2, 3, 4}]
    assert out.merged_from == ((0, 1, 2),)
    assert fixpoint_violations(sets(out), 0.4) == []


def test_chain_stops_at_half_overlap_when_p_is_half():
    # 1/2 is not strictly greater than 0.5
    out = merge_overlapping(family([{1, 2}, {2, 3}, {3, 4}]), 0.5)
    assert sets(out) == [{1, 2}, {2, 3}, {3, 4}]


def test_largest_ratio_merges_first():
    # ratio(0,1) = 2/3, ratio(1,2) = 1.0: pair (1, 2) goes first
    out = merge_overlapping(family([{1, 2, 3, 9}, {2, 3, 4}, {3, 4}]), 0.6)
    assert sets(out) == [{1, 2, 3, 4, 9}]
    assert out.merged_from == ((0, 1, 2),)
    first = merge_overlapping(family([{1, 2, 3, 9}, {2, 3, 4}, {3, 4}]), 0.7)
    assert sets(first) == [{1, 2, 3, 9}, {2, 3, 4}]
    assert first.merged_from == ((0,), (1, 2))


def test_empty_sets_never_merge():
    out = merge_overlapping(family([set(), {1}, set()]), 0.01)
    assert len(out) == 3


def test_merge_condition_is_strict():
    assert should_merge({1, 2}, {2, 3}, 0.49)
    assert not should_merge({1, 2}, {2, 3}, 0.5)
    assert not should_merge({1, 2}, {1, 2}, 1.0)


random_families = st.lists(st.sets(st.integers(0, 12), max_size=8), min_size=1, max_size=8)


@settings(max_examples=100, deadline=None)
@given(random_families)
def test_p_one_never_merges(ctrl_sets):
    out = merge_overlapping(family(ctrl_sets), 1.0)
    assert sets(out) == [set(s) for s in ctrl_sets]


@settings(max_examples=100, deadline=None)
@given(random_families, st.sampled_from([0.1, 0.3, 0.5, 0.75, 0.9]))
def test_merge_reaches_fixpoint_and_keeps_everything(ctrl_sets, p):
    before = family(ctrl_sets)
    out = merge_overlapping(before, p)
    assert fixpoint_violations(sets(out), p) == []
    assert len(out) <= len(before)
    assert set().union(*sets(out)) == set().union(*map(set, ctrl_sets))
    labels = out.vertex_labels(len(ctrl_sets))
    assert np.all(labels >= 0)
    out.check_partition(len(ctrl_sets))


# --- full pipeline -----------------------------------------------------------------

@pytest.fixture(scope="module")
def planted3():
    return generate_model(SynthSpec(n=600, m=30, K_true=3, seed=5))


def test_recovers_planted_blocks(planted3):
    model, planted = planted3
    out = cluster_model(model, 3, 0.75, seed=0)
    assert adjusted_rand_score(planted.vertex_labels(600), out.vertex_labels(600)) == 1.0
    got = {tuple(r.tolist()): set(c.tolist()) for r, c in zip(out.mesh_clusters,
                                                               out.controller_clusters)}
    want = {tuple(r.tolist()): set(c.tolist()) for r, c in zip(planted.mesh_clusters,
                                                                planted.controller_clusters)}
    assert got == want


def test_k1_is_whole_face(planted3):
    model, _ = planted3
    out = cluster_model(model, 1, 0.75, seed=0)
    assert out == whole_face(model, p=0.75, seed=0)
    assert out.controller_clusters[0].tolist() == list(range(30))


def test_oversplit_refines_planted(planted3):
    model, planted = planted3
    out = cluster_model(model, 6, 0.75, seed=0)
    truth = planted.vertex_labels(600)
    for r, c in zip(out.mesh_clusters, out.controller_clusters):
        assert len(set(truth[r])) == 1
        block = truth[r][0]
        assert set(c.tolist()) <= set(planted.controller_clusters[block].tolist())


def test_pipeline_deterministic(planted3):
    model, _ = planted3
    assert cluster_model(model, 5, 0.6, seed=4) == cluster_model(model, 5, 0.6, seed=4)


def test_partition_invariant_for_many_k():
    model, _ = generate_model(SynthSpec(n=400, m=24, K_true=4, cross_talk=0.1,
                                        inactive_fraction=0.1, seed=8))
    for K in (2, 5, 9, 17):
        out = cluster_model(model, K, 0.75, seed=1)
        out.check_partition(400)
        assert len(out) <= K
        assert fixpoint_violations(sets(out), 0.75) == []


def test_json_round_trip(tmp_path, planted3):
    model, _ = planted3
    out = cluster_model(model, 4, 0.75, seed=0)
    save_clustering(out, tmp_path / "c.json")
    assert load_clustering(tmp_path / "c.json") == out
