"""Cluster a synthetic rig and compare the result with the blocks it was built from."""
import numpy as np

from rigsplit import SynthSpec, cluster_model, generate_model
from rigsplit.pipeline import cluster_summary


def main():
    spec = SynthSpec(n=600, m=30, K_true=3, seed=7)
    model, planted = generate_model(spec)
    print(f"rig: {model.num_vertices} vertices, {model.num_controllers} controllers")

    found = cluster_model(model, K=3, p=0.75, seed=7)
    print(cluster_summary(found))

    # clusters come back in arbitrary order, so match them by vertex overlap
    truth = planted.vertex_labels(spec.n)
    guess = found.vertex_labels(spec.n)
    table = np.zeros((3, 3), dtype=int)
    np.add.at(table, (truth, guess), 1)
    print("planted block x found cluster:")
    print(table)


if __name__ == "__main__":
    main()
