"""Synthetic blendshape rigs with planted vertex/controller blocks.

Vertices sit on a smooth height-field surface. A strip-shaped block of
vertices is owned by each group of controllers; a controller displaces only
its own block (plus optional weak leakage onto the other active blocks). An
optional "skull" block on top of the surface is never moved by anything.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clustering import Clustering
from .errors import SpecError
from .model_io import AnimationSet, BlendshapeModel, animation_from_arrays

DEFAULT_TRAIN_FRAMES = 231
DEFAULT_TEST_FRAMES = 129
DEFAULT_SPARSITY = 0.3


@dataclass(frozen=True)
class SynthSpec:
    n: int
    m: int
    K_true: int
    inactive_fraction: float = 0.0
    cross_talk: float = 0.0
    seed: int = 0

    @property
    def n_inactive(self) -> int:
        return int(round(self.inactive_fraction * self.n))

    def validate(self) -> None:
        if self.K_true < 1:
            raise SpecError("K_true must be >= 1")
        if self.m < self.K_true:
            raise SpecError(f"need m >= K_true, got m={self.m}, K_true={self.K_true}")
        if not 0 <= self.inactive_fraction < 1:
            raise SpecError("inactive_fraction must lie in [0, 1)")
        if not 0 <= self.cross_talk <= 0.2:
            raise SpecError("cross_talk must lie in [0, 0.2]")
        if self.n - self.n_inactive < self.K_true:
            raise SpecError(
                f"{self.n - self.n_inactive} active vertices cannot fill {self.K_true} blocks")


def _surface(rng, n):
    uv = rng.random((n, 2))
    a = rng.normal(size=4)
    z = 0.08 * (a[0] * np.sin(2 * np.pi * uv[:, 0]) + a[1] * np.cos(2 * np.pi * uv[:, 1])
                + a[2] * np.sin(np.pi * (uv[:, 0] + uv[:, 1])) + a[3] * uv[:, 0] * uv[:, 1])
    return 10.0 * np.column_stack([uv, z])


def _direction_field(rng, pos):
    base = rng.normal(size=3)
    base /= np.linalg.norm(base)
    freq = rng.uniform(0.1, 0.3, size=3)
    phase = rng.uniform(0, 2 * np.pi, size=3)
    wobble = 0.3 * np.sin(pos * freq + phase)
    d = base + wobble
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def generate_model(spec: SynthSpec) -> tuple[BlendshapeModel, Clustering]:
    """Build a rig and the ground-truth clustering it was planted with.

    The planted clustering lists the active blocks in order, followed by the
    inactive block (empty controller set) when ``inactive_fraction > 0``.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n, m = spec.n, spec.m
    pos = _surface(rng, n)

    by_height = np.argsort(pos[:, 1], kind="stable")
    inactive = np.sort(by_height[n - spec.n_inactive:]) if spec.n_inactive else np.array([], int)
    active = np.sort(by_height[:n - spec.n_inactive])
    strips = np.array_split(active[np.argsort(pos[active, 0], kind="stable")], spec.K_true)
    blocks = [np.sort(s) for s in strips]
    owners = np.array_split(np.arange(m), spec.K_true)

    B = np.zeros((n, 3, m))
    for b, (verts, ctrls) in enumerate(zip(blocks, owners)):
        others = np.setdiff1d(active, verts)
        spread = max(float(np.linalg.norm(pos[verts].std(axis=0))), 1e-3)
        for i in ctrls:
            center = pos[rng.choice(verts)]
            width = spread * rng.uniform(0.5, 1.0)
            scale = rng.uniform(0.5, 2.0)
            direction = _direction_field(rng, pos)
            d2 = np.sum((pos - center) ** 2, axis=1)
            bump = np.exp(-d2 / (2 * width ** 2))
            amp = np.zeros(n)
            amp[verts] = 0.5 + 0.5 * bump[verts]
            if spec.cross_talk > 0 and others.size:
                amp[others] = spec.cross_talk * (0.5 + 0.5 * np.exp(-d2[others] / (8 * width ** 2)))
            B[:, :, i] = scale * amp[:, None] * direction

    width = len(str(m - 1))
    names = tuple(f"ctrl_{i:0{width}d}" for i in range(m))
    model = BlendshapeModel(neutral=pos.ravel(), blendshapes=B.reshape(3 * n, m),
                            controller_names=names)

    mesh_clusters = list(blocks)
    ctrl_clusters = list(owners)
    if inactive.size:
        mesh_clusters.append(inactive)
        ctrl_clusters.append(np.array([], dtype=np.intp))
    planted = Clustering(mesh_clusters=tuple(mesh_clusters),
                         controller_clusters=tuple(ctrl_clusters),
                         K=len(mesh_clusters), p=1.0, seed=spec.seed)
    return model, planted


def generate_animation(model: BlendshapeModel, planted: Clustering | None = None,
                       num_frames: int = DEFAULT_TRAIN_FRAMES,
                       sparsity: float = DEFAULT_SPARSITY, seed: int = 0,
                       mesh_noise: float = 0.0) -> AnimationSet:
    """Random sparse expressions and the meshes the rig produces for them.

    Each controller is switched on with probability ``sparsity`` and given a
    weight uniform in [0, 1]. When ``planted`` is given, controllers outside
    every planted controller set stay at zero. ``mesh_noise`` adds i.i.d.
    Gaussian jitter (standard deviation in scene units) to the meshes.
    """
    if num_frames < 1:
        raise SpecError("num_frames must be >= 1")
    if not 0 < sparsity <= 1:
        raise SpecError("sparsity must lie in (0, 1]")
    if mesh_noise < 0:
        raise SpecError("mesh_noise must be nonnegative")
    rng = np.random.default_rng(seed)
    m = model.num_controllers
    on = rng.random((num_frames, m)) < sparsity
    W = np.where(on, rng.random((num_frames, m)), 0.0)
    if planted is not None:
        used = np.zeros(m, dtype=bool)
        for c in planted.controller_clusters:
            used[c] = True
        W[:, ~used] = 0.0
    meshes = model.neutral + W @ model.blendshapes.T
    if mesh_noise > 0:
        meshes = meshes + rng.normal(scale=mesh_noise, size=meshes.shape)
    return animation_from_arrays(W, meshes, model_ref=f"synth-{seed}")


def generate_train_test(model: BlendshapeModel, planted: Clustering | None = None,
                        n_train: int = DEFAULT_TRAIN_FRAMES, n_test: int = DEFAULT_TEST_FRAMES,
                        sparsity: float = DEFAULT_SPARSITY, seed: int = 0,
                        mesh_noise: float = 0.0) -> tuple[AnimationSet, AnimationSet]:
    """Independent train and test sets drawn from two child seeds of ``seed``."""
    s_train, s_test = np.random.SeedSequence(seed).generate_state(2)
    train = generate_animation(model, planted, n_train, sparsity, int(s_train), mesh_noise)
    test = generate_animation(model, planted, n_test, sparsity, int(s_test), mesh_noise)
    return train, test
