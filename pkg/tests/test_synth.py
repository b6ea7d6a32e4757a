import numpy as np
import pytest

from rigsplit import SynthSpec, compute_offsets, generate_animation, generate_model, save_model
from rigsplit.errors import SpecError
from rigsplit.synth import DEFAULT_TEST_FRAMES, DEFAULT_TRAIN_FRAMES, generate_train_test


def test_zero_cross_talk_is_block_diagonal():
    model, planted = generate_model(SynthSpec(n=300, m=12, K_true=3, seed=1))
    D = compute_offsets(model).values
    for r, c in zip(planted.mesh_clusters, planted.controller_clusters):
        outside = np.setdiff1d(np.arange(300), r)
        assert np.all(D[np.ix_(outside, c)] == 0)
        assert np.all(D[np.ix_(r, c)] > 0)


def test_inactive_block_size():
    model, planted = generate_model(SynthSpec(n=1000, m=20, K_true=4, inactive_fraction=0.2,
                                              cross_talk=0.1, seed=2))
    D = compute_offsets(model).values
    assert int(np.sum(D.sum(axis=1) == 0)) == 200
    assert len(planted.mesh_clusters[-1]) == 200
    assert len(planted.controller_clusters[-1]) == 0


def test_cross_talk_leaks_only_to_active_blocks():
    model, planted = generate_model(SynthSpec(n=400, m=12, K_true=3, inactive_fraction=0.1,
                                              cross_talk=0.05, seed=3))
    D = compute_offsets(model).values
    r0, c0 = planted.mesh_clusters[0], planted.controller_clusters[0]
    other = planted.mesh_clusters[1]
    assert np.all(D[np.ix_(other, c0)] > 0)
    assert D[np.ix_(other, c0)].max() < D[np.ix_(r0, c0)].min()


def test_planted_partition_is_complete():
    _, planted = generate_model(SynthSpec(n=333, m=17, K_true=4, inactive_fraction=0.15, seed=0))
    planted.check_partition(333)
    assert sorted(np.concatenate(planted.controller_clusters).tolist()) == list(range(17))


def test_deterministic_bytes(tmp_path):
    spec = SynthSpec(n=200, m=10, K_true=2, cross_talk=0.03, seed=9)
    save_model(generate_model(spec)[0], tmp_path / "a.json")
    save_model(generate_model(spec)[0], tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


@pytest.mark.parametrize("kwargs", [dict(m=2, K_true=3), dict(inactive_fraction=1.0),
                                    dict(cross_talk=0.3), dict(n=5, K_true=5, inactive_fraction=0.4)])
def test_bad_specs(kwargs):
    base = dict(n=100, m=10, K_true=3)
    base.update(kwargs)
    with pytest.raises(SpecError):
        generate_model(SynthSpec(**base))


def test_animation_meshes_follow_rig():
    model, planted = generate_model(SynthSpec(n=150, m=9, K_true=3, seed=4))
    anim = generate_animation(model, planted, 20, sparsity=0.5, seed=1)
    for f in anim.frames:
        np.testing.assert_allclose(f.mesh, model.neutral + model.blendshapes @ f.weights,
                                   rtol=0, atol=1e-12)


def test_dense_frames():
    model, _ = generate_model(SynthSpec(n=60, m=6, K_true=2, seed=4))
    W = generate_animation(model, num_frames=10, sparsity=1.0, seed=0).weights
    assert np.all(W > 0) and np.all(W <= 1)


def test_default_frame_counts():
    model, planted = generate_model(SynthSpec(n=60, m=6, K_true=2, seed=4))
    tr, te = generate_train_test(model, planted)
    assert (len(tr), len(te)) == (DEFAULT_TRAIN_FRAMES, DEFAULT_TEST_FRAMES) == (231, 129)
