#!/usr/bin/env python3
"""Plot qpaths CSV output: density grids, BDMC curves and AIS estimates."""
import argparse
import csv
import math
from collections import defaultdict

import matplotlib.pyplot as plt


def read(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def plot_density_grid(rows, out):
    by_q = defaultdict(lambda: defaultdict(list))
    for r in rows:
        by_q[float(r["q"])][float(r["beta"])].append((float(r["z"]), float(r["log_density"])))
    qs = sorted(by_q)
    fig, axes = plt.subplots(1, len(qs), figsize=(4 * len(qs), 3), sharey=True, squeeze=False)
    for ax, q in zip(axes[0], qs):
        for beta, pts in sorted(by_q[q].items()):
            pts.sort()
            ax.plot([z for z, _ in pts], [math.exp(l) for _, l in pts], color=plt.cm.viridis(beta), lw=1)
        ax.set_title(f"q = {q:g}")
        ax.set_xlabel("z")
    axes[0][0].set_ylabel("unnormalized density")
    fig.tight_layout()
    fig.savefig(out)


def plot_bdmc(rows, out):
    acc = defaultdict(lambda: [[], []])
    for r in rows:
        key = (float(r["q"]), int(r["T"]))
        acc[key][0].append(float(r["log_lower"]))
        acc[key][1].append(float(r["log_upper"]))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for q in sorted({k[0] for k in acc}):
        ts = sorted(t for qq, t in acc if qq == q)
        lo = [sum(acc[q, t][0]) / len(acc[q, t][0]) for t in ts]
        hi = [sum(acc[q, t][1]) / len(acc[q, t][1]) for t in ts]
        (line,) = ax.plot(ts, lo, marker="o", label=f"q = {q:g}")
        ax.plot(ts, hi, marker="o", ls="--", color=line.get_color())
    ax.set_xscale("log")
    ax.set_xlabel("T")
    ax.set_ylabel("log Z bound")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out)


def plot_ais(rows, out):
    by_q = defaultdict(list)
    for r in rows:
        by_q[float(r["q"])].append(float(r["z_estimate"]))
    qs = sorted(by_q)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.boxplot([by_q[q] for q in qs])
    ax.set_xticks(range(1, len(qs) + 1), [f"{q:g}" for q in qs])
    ax.set_xlabel("q")
    ax.set_ylabel("Z estimate")
    fig.tight_layout()
    fig.savefig(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv")
    ap.add_argument("--out", default="plot.png")
    args = ap.parse_args()
    rows = read(args.csv)
    if not rows:
        raise SystemExit("no rows")
    if "log_density" in rows[0]:
        plot_density_grid(rows, args.out)
    elif rows[0]["mode"] == "bdmc":
        plot_bdmc(rows, args.out)
    else:
        plot_ais(rows, args.out)


if __name__ == "__main__":
    main()
