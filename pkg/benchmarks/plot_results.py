"""Render figures from the CSV artifacts the CLI emits.

Three plot kinds, each optional:
  --scaling scaling.csv      node expansions vs. object count, decomposed
                             ("cg") vs. single-tree ("flat") search
  --residuals residuals.csv  per-category constraint residuals vs. ADMM
                             iteration, each category normalized by its own
                             maximum over the run
  --sequences sequences.csv  cumulative cost vs. action index for the
                             enumerated alternative plans

Requires matplotlib (the ``plot`` extra). Figures land in --out-dir as PNGs.
"""

from __future__ import annotations

import argparse
import csv
import os


def _read(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def plot_scaling(path, out_dir):
    import matplotlib.pyplot as plt
    rows = _read(path)
    P = [int(r["P"]) for r in rows]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(P, [int(r["expansions_cg"]) for r in rows], "o-",
            label="decomposed search")
    ax.plot(P, [int(r["expansions_flat"]) for r in rows], "s-",
            label="single search tree")
    ax.set_xlabel("objects P")
    ax.set_ylabel("node expansions")
    ax.set_yscale("log")
    ax.legend()
    ax.grid(True, alpha=0.3)
    out = os.path.join(out_dir, "scaling.png")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


def plot_residuals(path, out_dir):
    import matplotlib.pyplot as plt
    rows = _read(path)
    its = [int(r["iter"]) for r in rows]
    fig, ax = plt.subplots(figsize=(5, 4))
    labels = {"r_x": "state consensus", "r_u": "control consensus",
              "r_torque": "torque limit", "r_velocity": "velocity limit",
              "r_contact": "contact force"}
    for col, label in labels.items():
        vals = [float(r[col]) for r in rows]
        peak = max(vals)
        if peak <= 0:
            continue
        ax.plot(its, [v / peak for v in vals], label=label)
    ax.set_xlabel("ADMM iteration")
    ax.set_ylabel("residual / category max")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    out = os.path.join(out_dir, "residuals.png")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


def plot_sequences(path, out_dir):
    import matplotlib.pyplot as plt
    rows = _read(path)
    by_seq: dict[str, list] = {}
    for r in rows:
        by_seq.setdefault(r["seq"], []).append(r)
    fig, ax = plt.subplots(figsize=(5, 4))
    for seq, seq_rows in sorted(by_seq.items(), key=lambda kv: int(kv[0])):
        idx = [int(r["idx"]) for r in seq_rows]
        cum = [float(r["cumulative"]) for r in seq_rows]
        ax.plot(idx, cum, "o-", markersize=3,
                label=f"sequence {seq} ({cum[-1]:.1f})")
    ax.set_xlabel("action index")
    ax.set_ylabel("cumulative cost")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    out = os.path.join(out_dir, "sequences.png")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scaling", help="bench-scaling CSV")
    ap.add_argument("--residuals", help="residuals CSV")
    ap.add_argument("--sequences", help="enumerate sequences CSV")
    ap.add_argument("--out-dir", default=".")
    args = ap.parse_args()
    if not (args.scaling or args.residuals or args.sequences):
        ap.error("give at least one of --scaling/--residuals/--sequences")
    os.makedirs(args.out_dir, exist_ok=True)
    if args.scaling:
        plot_scaling(args.scaling, args.out_dir)
    if args.residuals:
        plot_residuals(args.residuals, args.out_dir)
    if args.sequences:
        plot_sequences(args.sequences, args.out_dir)


if __name__ == "__main__":
    main()
