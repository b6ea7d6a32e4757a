"""Two-fold clustering of a blendshape model.

Vertices are grouped by K-means over the rows of the offset matrix. Each
controller then joins every mesh cluster where its mean offset lands in the
upper group of an exact 1-D two-means split. Finally, pairs of clusters whose
controller sets overlap by more than ``p`` times the smaller set are merged
until no such pair is left.
"""
from __future__ import annotations

import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ConstantInput, InvalidK, ParseError, ValidationError
from .kmeans import kmeans, two_means_1d
from .model_io import BlendshapeModel
from .offsets import OffsetMatrix, compute_offsets

DEFAULT_P = 0.75
DEFAULT_SEED = 42


def _index_array(idx) -> np.ndarray:
    arr = np.unique(np.asarray(list(idx), dtype=np.intp))
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Clustering:
    """Aligned lists of vertex sets and controller sets (0-based indices).

    ``merged_from[k]`` lists the ids of the pre-merge clusters that make up
    cluster ``k``.
    """

    mesh_clusters: tuple[np.ndarray, ...]
    controller_clusters: tuple[np.ndarray, ...]
    K: int
    p: float = DEFAULT_P
    seed: int = DEFAULT_SEED
    merged_from: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        mesh = tuple(_index_array(r) for r in self.mesh_clusters)
        ctrl = tuple(_index_array(c) for c in self.controller_clusters)
        if len(mesh) != len(ctrl):
            raise ValidationError("mesh and controller cluster lists differ in length")
        prov = tuple(tuple(int(j) for j in g) for g in self.merged_from) or \
            tuple((k,) for k in range(len(mesh)))
        if len(prov) != len(mesh):
            raise ValidationError("merged_from must have one entry per cluster")
        object.__setattr__(self, "mesh_clusters", mesh)
        object.__setattr__(self, "controller_clusters", ctrl)
        object.__setattr__(self, "merged_from", prov)

    def __len__(self):
        return len(self.mesh_clusters)

    def __eq__(self, other):
        if not isinstance(other, Clustering):
            return NotImplemented
        return (len(self) == len(other)
                and (self.K, self.p, self.seed, self.merged_from)
                == (other.K, other.p, other.seed, other.merged_from)
                and all(np.array_equal(a, b) for a, b in zip(self.mesh_clusters, other.mesh_clusters))
                and all(np.array_equal(a, b) for a, b in
                        zip(self.controller_clusters, other.controller_clusters)))

    __hash__ = None

    def vertex_labels(self, n: Optional[int] = None) -> np.ndarray:
        """Cluster label of every vertex (``-1`` for vertices not covered)."""
        if n is None:
            n = sum(len(r) for r in self.mesh_clusters)
        labels = np.full(n, -1, dtype=np.intp)
        for k, r in enumerate(self.mesh_clusters):
            labels[r] = k
        return labels

    def check_partition(self, n: int) -> None:
        labels = np.full(n, -1, dtype=np.intp)
        for k, r in enumerate(self.mesh_clusters):
            if r.size and (r[0] < 0 or r[-1] >= n):
                raise ValidationError(f"cluster {k} has vertex indices outside [0, {n})")
            if np.any(labels[r] >= 0):
                raise ValidationError(f"cluster {k} overlaps an earlier mesh cluster")
            labels[r] = k
        if np.any(labels < 0):
            raise ValidationError("mesh clusters do not cover every vertex")

    def to_dict(self) -> dict:
        return {
            "params": {"K": self.K, "p": self.p, "seed": self.seed},
            "clusters": [
                {"vertices": r.tolist(), "controllers": c.tolist(), "merged_from": list(g)}
                for r, c, g in zip(self.mesh_clusters, self.controller_clusters, self.merged_from)
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Clustering":
        try:
            params = doc["params"]
            clusters = doc["clusters"]
            return cls(
                mesh_clusters=tuple(c["vertices"] for c in clusters),
                controller_clusters=tuple(c["controllers"] for c in clusters),
                K=int(params["K"]), p=float(params["p"]), seed=int(params["seed"]),
                merged_from=tuple(c.get("merged_from", [k]) for k, c in enumerate(clusters)),
            )
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed clustering document: {exc}") from exc


def save_clustering(clustering: Clustering, path) -> None:
    Path(path).write_text(json.dumps(clustering.to_dict()), encoding="utf-8")


def load_clustering(path) -> Clustering:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return Clustering.from_dict(doc)


# --- pipeline stages -----------------------------------------------------------

def cluster_mesh(offsets: OffsetMatrix, K: int, seed: int = DEFAULT_SEED) -> list[np.ndarray]:
    """Partition the vertices by K-means over the rows of the offset matrix."""
    n = offsets.num_vertices
    if not 1 <= K <= n:
        raise InvalidK(f"K must lie in [1, {n}], got {K}")
    result = kmeans(offsets.values, K, seed=seed)
    return [np.flatnonzero(result.assignments == k) for k in range(K)]


def compress_controller(offsets: OffsetMatrix, mesh_clusters: Sequence[np.ndarray],
                        i: int) -> np.ndarray:
    """Mean normalized offset of controller ``i`` inside each mesh cluster."""
    col = offsets.values[:, i]
    return np.array([col[r].sum() / len(r) if len(r) else 0.0 for r in mesh_clusters])


def _relevant_clusters(offsets, mesh_clusters, i):
    h = compress_controller(offsets, mesh_clusters, i)
    if len(h) == 1:
        return [0], False
    try:
        return two_means_1d(h).high.tolist(), False
    except ConstantInput:
        return list(range(len(h))), True


def assign_controllers(offsets: OffsetMatrix, mesh_clusters: Sequence[np.ndarray],
                       seed: int = DEFAULT_SEED, threads: int = 1) -> list[np.ndarray]:
    """Attach every non-null controller to the mesh clusters it moves most.

    A controller whose cluster means are all equal cannot be split and is
    attached to every cluster (with a warning).
    """
    del seed  # the 1-D split is exact
    K = len(mesh_clusters)
    active = offsets.active_controllers.tolist()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            decisions = list(pool.map(
                lambda i: _relevant_clusters(offsets, mesh_clusters, i), active))
    else:
        decisions = [_relevant_clusters(offsets, mesh_clusters, i) for i in active]

    members: list[list[int]] = [[] for _ in range(K)]
    flat = []
    for i, (targets, constant) in zip(active, decisions):
        if constant:
            flat.append(i)
        for k in targets:
            members[k].append(i)
    if flat:
        warnings.warn(f"{len(flat)} controller(s) act uniformly on all mesh clusters and "
                      f"were assigned to every cluster: {flat[:10]}", stacklevel=2)
    return [np.array(c, dtype=np.intp) for c in members]


def overlap_ratio(a, b) -> float:
    """``|a & b| / min(|a|, |b|)``; zero when either set is empty."""
    a, b = set(a), set(b)
    smaller = min(len(a), len(b))
    if smaller == 0:
        return 0.0
    return len(a & b) / smaller


def should_merge(a, b, p: float) -> bool:
    a, b = set(a), set(b)
    if not a or not b:
        return False
    return len(a & b) > p * min(len(a), len(b))


def merge_overlapping(clustering: Clustering, p: float) -> Clustering:
    """Merge controller-overlapping cluster pairs until none qualifies.

    Each pass merges the qualifying pair with the largest overlap ratio
    (lowest ``(k, j)`` on ties) into the lower index.
    """
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    mesh = [set(r.tolist()) for r in clustering.mesh_clusters]
    ctrl = [set(c.tolist()) for c in clustering.controller_clusters]
    prov = [list(g) for g in clustering.merged_from]

    while True:
        best = None
        for k in range(len(ctrl)):
            for j in range(k + 1, len(ctrl)):
                if not should_merge(ctrl[k], ctrl[j], p):
                    continue
                # compare ratios as exact fractions to keep tie-breaking stable
                num = len(ctrl[k] & ctrl[j])
                den = min(len(ctrl[k]), len(ctrl[j]))
                if best is None or num * best[1] > best[0] * den:
                    best = (num, den, k, j)
        if best is None:
            break
        _, _, k, j = best
        mesh[k] |= mesh.pop(j)
        ctrl[k] |= ctrl.pop(j)
        prov[k] = sorted(prov[k] + prov.pop(j))

    return Clustering(mesh_clusters=tuple(mesh), controller_clusters=tuple(ctrl),
                      K=clustering.K, p=p, seed=clustering.seed, merged_from=tuple(prov))


def cluster_model(model: BlendshapeModel, K: int, p: float = DEFAULT_P,
                  seed: int = DEFAULT_SEED, threads: int = 1,
                  offsets: Optional[OffsetMatrix] = None) -> Clustering:
    """Run the full two-fold clustering and return the merged clusters."""
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    if offsets is None:
        offsets = compute_offsets(model)
    mesh = cluster_mesh(offsets, K, seed)
    ctrl = assign_controllers(offsets, mesh, seed, threads=threads)
    raw = Clustering(mesh_clusters=tuple(mesh), controller_clusters=tuple(ctrl),
                     K=K, p=p, seed=seed)
    return merge_overlapping(raw, p)


def whole_face(model: BlendshapeModel, p: float = DEFAULT_P, seed: int = DEFAULT_SEED,
               offsets: Optional[OffsetMatrix] = None) -> Clustering:
    """The single-cluster baseline: all vertices with all non-null controllers."""
    if offsets is None:
        offsets = compute_offsets(model)
    return Clustering(mesh_clusters=(np.arange(model.num_vertices),),
                      controller_clusters=(offsets.active_controllers,),
                      K=1, p=p, seed=seed)
