"""End-to-end runs: cluster, train per cluster, predict the test set, score it."""
from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .clustering import DEFAULT_P, DEFAULT_SEED, Clustering, cluster_model, whole_face
from .metrics import evaluate
from .model_io import AnimationSet, BlendshapeModel
from .offsets import compute_offsets
from .solver import DEFAULT_NOISE, predict_batch, train

SWEEP_COLUMNS = ("K", "p", "mean_CE", "mean_ME", "NCV", "CpC", "VpC")


def solve_clustered(model: BlendshapeModel, clustering: Clustering, train_set: AnimationSet,
                    test_set: AnimationSet, noise: float = DEFAULT_NOISE,
                    clamp: bool = False, threads: int = 1):
    """Train on ``train_set``, predict every test mesh and score the result.

    Returns ``(predicted_weights, report)``.
    """
    test_set.check_against(model)
    submodels = train(model, clustering, train_set, noise, threads=threads)
    predicted = predict_batch(submodels, model, test_set.meshes, clamp=clamp, threads=threads)
    config = {"K": clustering.K, "p": clustering.p, "seed": clustering.seed, "noise": noise}
    return predicted, evaluate(model, clustering, predicted, test_set.weights, config)


def solve_whole_face(model, train_set, test_set, noise=DEFAULT_NOISE, p=DEFAULT_P,
                     seed=DEFAULT_SEED, clamp=False):
    """Baseline run with one cluster holding every vertex and controller."""
    return solve_clustered(model, whole_face(model, p=p, seed=seed), train_set, test_set,
                           noise=noise, clamp=clamp)


@dataclass
class SweepConfig:
    K_values: Sequence[int]
    p_values: Sequence[float] = (DEFAULT_P,)
    seed: int = DEFAULT_SEED
    noise: float = DEFAULT_NOISE
    clamp: bool = False
    cells: list = field(init=False, default_factory=list)

    def __post_init__(self):
        self.cells = [(int(K), float(p)) for K in self.K_values for p in self.p_values]


def sweep(model: BlendshapeModel, train_set: AnimationSet, test_set: AnimationSet,
          config: SweepConfig, threads: int = 1) -> list[dict]:
    """Evaluate every ``(K, p)`` cell; rows come back in ``K``-major input order.

    A failing cell yields a row whose metric fields hold ``"error: ..."``
    instead of aborting the sweep.
    """
    offsets = compute_offsets(model)

    def run(cell):
        K, p = cell
        row = {"K": K, "p": p}
        try:
            clustering = cluster_model(model, K, p, config.seed, offsets=offsets)
            _, report = solve_clustered(model, clustering, train_set, test_set,
                                        noise=config.noise, clamp=config.clamp)
        except Exception as exc:  # noqa: BLE001 - recorded in the row
            msg = f"error: {type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")
            row.update({c: msg for c in SWEEP_COLUMNS[2:]})
            return row
        row.update(mean_CE=report.mean_CE, mean_ME=report.mean_ME,
                   NCV=report.NCV, CpC=report.CpC, VpC=report.VpC)
        return row

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, config.cells))
    return [run(c) for c in config.cells]


def sweep_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in SWEEP_COLUMNS])
    return buf.getvalue()


def cluster_summary(clustering: Clustering) -> str:
    lines = [f"{'cluster':>7} {'vertices':>9} {'controllers':>12}"]
    for k, (r, c) in enumerate(zip(clustering.mesh_clusters, clustering.controller_clusters)):
        lines.append(f"{k:>7} {len(r):>9} {len(c):>12}")
    return "\n".join(lines)
