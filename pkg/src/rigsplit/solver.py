"""Per-cluster inverse rig via Gaussian-process regression with a dot-product kernel.

Each cluster with a nonempty controller set gets its own regressor. Inputs are
mesh offsets from the neutral restricted to the cluster's vertex coordinates,
outputs are the cluster's controller weights. All outputs of one cluster share
a single Cholesky factorization of ``X X^T + noise * I``.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .clustering import Clustering, whole_face
from .errors import DimensionError, EmptyTrainingSet, SingularGram, ValidationError
from .model_io import AnimationSet, BlendshapeModel

DEFAULT_NOISE = 1e-6


def coordinate_indices(vertices) -> np.ndarray:
    """Flat xyz coordinate indices of the given vertices."""
    v = np.asarray(vertices, dtype=np.intp)
    return (3 * v[:, None] + np.arange(3)).ravel()


@dataclass(frozen=True, eq=False)
class SubmodelGPR:
    cluster_index: int
    input_indices: np.ndarray
    output_indices: np.ndarray
    train_inputs: np.ndarray
    cholesky: tuple
    dual_coef: np.ndarray
    noise: float

    def predict(self, offsets: np.ndarray) -> np.ndarray:
        """Predict this cluster's weights from full-length mesh offsets.

        ``offsets`` is ``(3n,)`` or ``(F, 3n)``; only this cluster's
        coordinates are read.
        """
        x = np.asarray(offsets)[..., self.input_indices]
        k = x @ self.train_inputs.T
        return k @ self.dual_coef

    def to_dict(self) -> dict:
        return {
            "cluster_index": self.cluster_index,
            "input_indices": self.input_indices.tolist(),
            "output_indices": self.output_indices.tolist(),
            "noise": self.noise,
            "train_inputs": self.train_inputs.tolist(),
            "dual_coef": self.dual_coef.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SubmodelGPR":
        X = np.array(doc["train_inputs"], dtype=np.float64)
        noise = float(doc["noise"])
        return cls(
            cluster_index=int(doc["cluster_index"]),
            input_indices=np.array(doc["input_indices"], dtype=np.intp),
            output_indices=np.array(doc["output_indices"], dtype=np.intp),
            train_inputs=X,
            cholesky=_factor(X, noise),
            dual_coef=np.array(doc["dual_coef"], dtype=np.float64).reshape(X.shape[0], -1),
            noise=noise,
        )


@dataclass(frozen=True, eq=False)
class Prediction:
    """Aggregated weight estimate for one mesh.

    ``per_cluster`` maps cluster index to that submodel's output, in the
    order of its ``output_indices``.
    """

    weights: np.ndarray
    per_cluster: dict
    coverage_count: np.ndarray


def _factor(X: np.ndarray, noise: float):
    G = X @ X.T
    G[np.diag_indices_from(G)] += noise
    try:
        return cho_factor(G, lower=True, check_finite=True)
    except LinAlgError as exc:
        raise SingularGram(
            f"Gram matrix not positive definite with noise={noise:g}; increase the noise") from exc


def _project_targets(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    # Kernel vectors X @ x live in the column space of X, so target components
    # outside it never reach a prediction. With more frames than input dims
    # they would otherwise enter the dual coefficients scaled by 1/noise and
    # cancel only up to rounding.
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros_like(Y)
    rank = int(np.sum(s > s[0] * max(X.shape) * np.finfo(np.float64).eps))
    if rank == X.shape[0]:
        return Y
    U = U[:, :rank]
    return U @ (U.T @ Y)


def fit_submodel(cluster_index: int, vertices, controllers, offsets: np.ndarray,
                 weights: np.ndarray, noise: float) -> SubmodelGPR:
    """Fit one dot-kernel GPR on ``offsets`` (T, 3n) against ``weights`` (T, m)."""
    if noise <= 0:
        raise ValueError("noise must be positive")
    inputs = coordinate_indices(vertices)
    outputs = np.asarray(controllers, dtype=np.intp)
    X = np.ascontiguousarray(offsets[:, inputs])
    factor = _factor(X, noise)
    Y = _project_targets(X, weights[:, outputs])
    alpha = cho_solve(factor, Y)
    return SubmodelGPR(cluster_index, inputs, outputs, X, factor, alpha, float(noise))


def _training_arrays(model: BlendshapeModel, train_set: AnimationSet):
    if len(train_set) == 0:
        raise EmptyTrainingSet("training set has no frames")
    train_set.check_against(model)
    if any(f.mesh is None for f in train_set.frames):
        raise ValidationError("every training frame needs a mesh")
    return train_set.meshes - model.neutral, train_set.weights


def _map(fn, items, threads):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def train(model: BlendshapeModel, clustering: Clustering, train_set: AnimationSet,
          noise: float = DEFAULT_NOISE, threads: int = 1) -> list[SubmodelGPR]:
    """Fit one submodel per cluster that has controllers; empty ones are skipped."""
    if noise <= 0:
        raise ValueError("noise must be positive")
    X, Y = _training_arrays(model, train_set)
    jobs = [k for k, c in enumerate(clustering.controller_clusters) if len(c)]

    def fit(k):
        return fit_submodel(k, clustering.mesh_clusters[k], clustering.controller_clusters[k],
                            X, Y, noise)

    return _map(fit, jobs, threads)


def aggregate(submodels: Sequence[SubmodelGPR], outputs: Sequence[np.ndarray], m: int):
    """Average per-cluster outputs into full weight vectors.

    ``outputs[s]`` is submodel ``s``'s prediction, ``(|C|,)`` or ``(F, |C|)``.
    Uncovered controllers get zero.
    """
    lead = np.shape(outputs[0])[:-1] if outputs else ()
    total = np.zeros(lead + (m,))
    count = np.zeros(m, dtype=np.intp)
    for sm, out in zip(submodels, outputs):  # fixed order: deterministic sums
        total[..., sm.output_indices] += out
        count[sm.output_indices] += 1
    weights = np.divide(total, np.maximum(count, 1))
    return weights, count


def _offsets_for(model: BlendshapeModel, mesh) -> np.ndarray:
    x = np.asarray(mesh, dtype=np.float64)
    if x.shape[-1] != model.neutral.size or x.ndim not in (1, 2):
        raise DimensionError(f"mesh must have length {model.neutral.size}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DimensionError("mesh contains non-finite entries")
    return x - model.neutral


def predict(submodels: Sequence[SubmodelGPR], model: BlendshapeModel,
            clustering: Optional[Clustering], mesh, clamp: bool = False,
            threads: int = 1) -> Prediction:
    """Estimate controller weights for a single target mesh."""
    del clustering  # submodels carry their own index sets
    x = _offsets_for(model, mesh)
    if x.ndim != 1:
        raise DimensionError("predict takes one mesh; use predict_batch for several")
    outs = _map(lambda sm: sm.predict(x), list(submodels), threads)
    weights, count = aggregate(submodels, outs, model.num_controllers)
    if clamp:
        weights = np.clip(weights, 0.0, 1.0)
    return Prediction(weights, {sm.cluster_index: o for sm, o in zip(submodels, outs)}, count)


def predict_batch(submodels: Sequence[SubmodelGPR], model: BlendshapeModel, meshes,
                  clamp: bool = False, threads: int = 1) -> np.ndarray:
    """Aggregated ``(F, m)`` weight estimates for a stack of meshes."""
    X = _offsets_for(model, np.atleast_2d(meshes))
    outs = _map(lambda sm: sm.predict(X), list(submodels), threads)
    if not outs:
        return np.zeros((X.shape[0], model.num_controllers))
    weights, _ = aggregate(submodels, outs, model.num_controllers)
    return np.clip(weights, 0.0, 1.0) if clamp else weights


def solve_baseline(model: BlendshapeModel, train_set: AnimationSet, mesh,
                   noise: float = DEFAULT_NOISE) -> Prediction:
    """Whole-face inverse rig: one regressor over all vertices and controllers."""
    clustering = whole_face(model)
    return predict(train(model, clustering, train_set, noise), model, clustering, mesh)


def save_submodels(submodels: Sequence[SubmodelGPR], path) -> None:
    Path(path).write_text(json.dumps([sm.to_dict() for sm in submodels]), encoding="utf-8")


def load_submodels(path) -> list[SubmodelGPR]:
    return [SubmodelGPR.from_dict(d) for d in json.loads(Path(path).read_text(encoding="utf-8"))]
