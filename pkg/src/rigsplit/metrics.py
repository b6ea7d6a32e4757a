"""Accuracy and problem-size measures for an inverse rig solution."""
from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field

import numpy as np

from .clustering import Clustering
from .errors import AllClustersEmpty, DimensionError
from .model_io import BlendshapeModel


def _pair(c_hat, c):
    a = np.asarray(c_hat, dtype=np.float64)
    b = np.asarray(c, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionError(f"weight vectors differ in shape: {a.shape} vs {b.shape}")
    return a, b


def controller_error(c_hat, c, n: int) -> float:
    """``||c_hat - c|| / n`` where ``n`` is the vertex count (not the controller count)."""
    if n <= 0:
        raise ValueError("n must be positive")
    a, b = _pair(c_hat, c)
    return float(np.linalg.norm(a - b)) / n


def mesh_error(c_hat, c, model: BlendshapeModel) -> float:
    """``||f(c_hat) - f(c)|| / n`` for the linear rig, i.e. ``||B (c_hat - c)|| / n``."""
    a, b = _pair(c_hat, c)
    if a.size != model.num_controllers:
        raise DimensionError(f"expected {model.num_controllers} weights, got {a.size}")
    return float(np.linalg.norm(model.blendshapes @ (a - b))) / model.num_vertices


def structural_metrics(clustering: Clustering, n: int) -> tuple[int, int, int]:
    """Return ``(NCV, CpC, VpC)``.

    Only clusters with at least one controller count: NCV sums their vertex
    counts, CpC and VpC are their largest controller and vertex counts.
    """
    live = [(len(r), len(c)) for r, c in zip(clustering.mesh_clusters,
                                             clustering.controller_clusters) if len(c)]
    if not live:
        raise AllClustersEmpty("no cluster has any controller")
    ncv = sum(v for v, _ in live)
    if ncv > n:
        raise DimensionError(f"clusters cover {ncv} vertices but the model has {n}")
    return ncv, max(c for _, c in live), max(v for v, _ in live)


@dataclass
class SolveReport:
    per_frame: list = field(default_factory=list)  # [(CE, ME), ...]
    mean_CE: float = 0.0
    mean_ME: float = 0.0
    NCV: int = 0
    CpC: int = 0
    VpC: int = 0
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_frame"] = [{"CE": ce, "ME": me} for ce, me in self.per_frame]
        return d

    @classmethod
    def from_dict(cls, doc: dict) -> "SolveReport":
        doc = dict(doc)
        doc["per_frame"] = [(f["CE"], f["ME"]) for f in doc.get("per_frame", [])]
        return cls(**doc)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["frame", "CE", "ME"])
        for t, (ce, me) in enumerate(self.per_frame):
            w.writerow([t, repr(ce), repr(me)])
        w.writerow(["mean", repr(self.mean_CE), repr(self.mean_ME)])
        return buf.getvalue()


def evaluate(model: BlendshapeModel, clustering: Clustering, predicted: np.ndarray,
             truth: np.ndarray, config: dict | None = None) -> SolveReport:
    """Score ``(F, m)`` predicted weights against ground truth."""
    predicted = np.atleast_2d(predicted)
    truth = np.atleast_2d(truth)
    if predicted.shape != truth.shape:
        raise DimensionError(f"prediction shape {predicted.shape} != truth shape {truth.shape}")
    n = model.num_vertices
    per_frame = [(controller_error(a, b, n), mesh_error(a, b, model))
                 for a, b in zip(predicted, truth)]
    F = len(per_frame)
    mean_ce = sum(ce for ce, _ in per_frame) / F if F else 0.0
    mean_me = sum(me for _, me in per_frame) / F if F else 0.0
    ncv, cpc, vpc = structural_metrics(clustering, n)
    return SolveReport(per_frame=per_frame, mean_CE=mean_ce, mean_ME=mean_me,
                       NCV=ncv, CpC=cpc, VpC=vpc, config=dict(config or {}))
