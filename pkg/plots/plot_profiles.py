"""Four-panel potential-profile figure from a model-scan CSV.

Panels: mixing angle, nonadiabatic coupling, the stationary coherence
estimate -sin(phi)/2, and the coherence force 2*omega*d*(-sin(phi)/2) that
drives momentum jumps near the crossing.

Usage: python3 plot_profiles.py SCAN_CSV OUT_IMAGE
"""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from common import load_columns

REQUIRED = ("q", "phi", "d", "omega")


def render_profiles(scan_csv, out_path) -> str:
    cols = load_columns(scan_csv, REQUIRED)
    q = cols["q"]
    phi = cols["phi"]
    d = cols["d"]
    omega = cols["omega"]
    alpha_loc = -0.5 * np.sin(phi)
    force = 2.0 * omega * d * alpha_loc

    fig, axes = plt.subplots(2, 2, figsize=(9, 7), sharex=True)
    panels = (
        (axes[0, 0], phi, r"mixing angle $\varphi(q)$", "rad"),
        (axes[0, 1], d, r"coupling $d(q)$", r"bohr$^{-1}$"),
        (axes[1, 0], alpha_loc, r"stationary coherence $-\sin\varphi/2$", ""),
        (axes[1, 1], force, r"coherence force $F^Q(q)$", "hartree/bohr"),
    )
    for ax, y, title, unit in panels:
        ax.plot(q, y, lw=1.5)
        ax.axvline(0.0, color="0.8", lw=0.8, zorder=0)
        ax.set_title(title, fontsize=10)
        if unit:
            ax.set_ylabel(unit, fontsize=9)
        ax.grid(alpha=0.25)
    for ax in axes[1]:
        ax.set_xlabel("q (bohr)")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return str(out_path)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("scan_csv", help="model-scan CSV from the simulator CLI")
    parser.add_argument("out_image", help="output image path (png/svg/pdf)")
    args = parser.parse_args(argv)
    render_profiles(args.scan_csv, args.out_image)
    return 0


if __name__ == "__main__":
    sys.exit(main())
