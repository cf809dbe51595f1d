#!/usr/bin/env python
"""Plot series.csv / snapshots.csv produced by the command line tools.

Usage: python scripts/plot_series.py OUTDIR [--save FILE]

Left panel: sup norm and support radius over time.  Right panel: radial
profiles at the stored output times.
"""

import argparse
import csv
import os
import sys
from collections import defaultdict

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib is not installed; this script only makes plots", file=sys.stderr)
    sys.exit(1)


def read_series(path):
    t, sup, supp = [], [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            t.append(float(row["t"]))
            sup.append(float(row["sup_norm"]))
            supp.append(float(row["support_radius"]))
    return t, sup, supp


def read_snapshots(path):
    profiles = defaultdict(lambda: ([], []))
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            r_list, u_list = profiles[float(row["t"])]
            r_list.append(float(row["r"]))
            u_list.append(float(row["u"]))
    return dict(sorted(profiles.items()))


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir", help="directory holding series.csv and snapshots.csv")
    ap.add_argument("--save", default=None, help="output image (default OUTDIR/series.png)")
    args = ap.parse_args()

    series_path = os.path.join(args.outdir, "series.csv")
    snaps_path = os.path.join(args.outdir, "snapshots.csv")
    fig, (ax_l, ax_r) = plt.subplots(1, 2, figsize=(11, 4.2))

    t, sup, supp = read_series(series_path)
    ax_l.plot(t, sup, "o-", label="sup norm")
    ax_l.set_xlabel("t")
    ax_l.set_ylabel("sup norm")
    if max(sup) > 0 and max(sup) / max(min(s for s in sup if s > 0), 1e-300) > 50:
        ax_l.set_yscale("log")
    ax_twin = ax_l.twinx()
    ax_twin.plot(t, supp, "s--", color="tab:orange", label="support radius")
    ax_twin.set_ylabel("support radius")
    ax_l.legend(loc="upper left")
    ax_twin.legend(loc="lower right")

    if os.path.exists(snaps_path):
        for tt, (r, u) in read_snapshots(snaps_path).items():
            ax_r.plot(r, u, lw=1.0, label=f"t={tt:g}")
        ax_r.set_xlabel("r")
        ax_r.set_ylabel("u")
        if len(read_snapshots(snaps_path)) <= 8:
            ax_r.legend(fontsize=8)

    fig.tight_layout()
    target = args.save or os.path.join(args.outdir, "series.png")
    fig.savefig(target, dpi=140)
    print(f"wrote {target}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
