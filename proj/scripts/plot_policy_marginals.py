"""Plot policy marginals from a simulate-mf or simulate-pop trajectory CSV.

    python3 scripts/plot_policy_marginals.py traj.csv marginals.png
"""
import argparse
import re

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def policy_marginals(frame):
    """Sum columns named <subpop>.<state>.<policy> over states."""
    marginals = {}
    for name in frame.columns[1:]:
        match = re.fullmatch(r"(.+)\.[^.]+\.(\d+)", name)
        if match is None:
            raise ValueError(f"unexpected column {name!r}")
        key = f"{match.group(1)} u{match.group(2)}"
        marginals[key] = marginals.get(key, 0.0) + frame[name]
    return pd.DataFrame(marginals)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("csv")
    parser.add_argument("out")
    args = parser.parse_args()

    frame = pd.read_csv(args.csv)
    marginals = policy_marginals(frame)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for name in marginals.columns:
        ax.plot(frame["t"], marginals[name], label=name, linewidth=2)
    ax.set_xlabel("t")
    ax.set_ylabel("policy mass")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)


if __name__ == "__main__":
    main()
