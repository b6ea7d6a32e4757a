"""Sweep K and p on a noisy synthetic rig and print the CSV the sweep produces."""
from rigsplit import SynthSpec, generate_model, generate_train_test
from rigsplit.pipeline import SweepConfig, sweep, sweep_csv


def main():
    model, planted = generate_model(
        SynthSpec(n=1000, m=40, K_true=4, cross_talk=0.02, inactive_fraction=0.1, seed=1))
    train, test = generate_train_test(model, planted, 150, 60, seed=1, mesh_noise=0.2)

    config = SweepConfig(K_values=[1, 2, 4, 5, 8], p_values=[0.5, 0.75, 1.0])
    rows = sweep(model, train, test, config, threads=4)
    print(sweep_csv(rows), end="")

    best = min((r for r in rows if isinstance(r["mean_CE"], float)), key=lambda r: r["mean_CE"])
    print(f"\nlowest mean CE at K={best['K']}, p={best['p']}")


if __name__ == "__main__":
    main()
