#!/usr/bin/env python3
"""Plot a higgslab diagnostics.jsonl file: energy, residual and constraint drift against time."""

import argparse
import json

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    with open(path) as f:
        rows = [json.loads(line) for line in f if line.strip()]
    return [r for r in rows if r["accepted"]]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("diagnostics", help="diagnostics.jsonl written by `higgslab flow`")
    ap.add_argument("-o", "--output", default="diagnostics.png")
    args = ap.parse_args()

    rows = load(args.diagnostics)
    t = [r["t"] for r in rows]
    fig, axes = plt.subplots(1, 3, figsize=(13, 3.8), constrained_layout=True)
    series = [
        ("ymh", ["ymh"]),
        ("residual", ["theta_sup_residual", "theta_l2_residual"]),
        ("constraint drift", ["dbar_drift", "wedge_drift"]),
    ]
    for ax, (title, keys) in zip(axes, series):
        for k in keys:
            ys = [max(r[k], 1e-300) for r in rows]
            ax.semilogy(t, ys, label=k)
        ax.set_title(title)
        ax.set_xlabel("t")
        ax.legend()
    fig.savefig(args.output, dpi=120)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
