"""Population and coherence history figure from a run or comparison CSV.

Given a plain run CSV it draws the engine's P+/P- and coherence series; given
a comparison CSV (paired ``*_<engine>`` / ``*_exact`` columns) it overlays
the trajectory engine on the exact grid reference.

Usage: python3 plot_populations.py RUN_OR_COMPARE_CSV OUT_IMAGE
"""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from common import detect_engine_suffix, load_columns


def render_populations(csv_path, out_path) -> str:
    engine = detect_engine_suffix(csv_path)
    fig, (ax_pop, ax_coh) = plt.subplots(2, 1, figsize=(8, 7), sharex=True)

    if engine is None:
        cols = load_columns(csv_path, ("t", "p_plus", "p_minus", "alpha", "beta"))
        t = cols["t"]
        ax_pop.plot(t, cols["p_plus"], label="P+", lw=1.5)
        ax_pop.plot(t, cols["p_minus"], label="P-", lw=1.5)
        ax_coh.plot(t, cols["alpha"], label="Re coherence", lw=1.2)
        ax_coh.plot(t, cols["beta"], label="Im coherence", lw=1.2)
    else:
        names = tuple(
            f"{base}_{tag}"
            for base in ("p_plus", "p_minus", "alpha", "beta")
            for tag in (engine, "exact")
        )
        cols = load_columns(csv_path, ("t",) + names)
        t = cols["t"]
        ax_pop.plot(t, cols[f"p_plus_{engine}"], label=f"P+ ({engine})", lw=1.5)
        ax_pop.plot(t, cols["p_plus_exact"], "--", label="P+ (exact)", lw=1.5)
        ax_pop.plot(t, cols[f"p_minus_{engine}"], label=f"P- ({engine})", lw=1.5)
        ax_pop.plot(t, cols["p_minus_exact"], "--", label="P- (exact)", lw=1.5)
        ax_coh.plot(t, cols[f"alpha_{engine}"], label=f"Re coherence ({engine})", lw=1.2)
        ax_coh.plot(t, cols["alpha_exact"], "--", label="Re coherence (exact)", lw=1.2)
        ax_coh.plot(t, cols[f"beta_{engine}"], label=f"Im coherence ({engine})", lw=1.2)
        ax_coh.plot(t, cols["beta_exact"], "--", label="Im coherence (exact)", lw=1.2)

    ax_pop.set_ylabel("population")
    ax_pop.set_ylim(-0.05, 1.05)
    ax_pop.legend(fontsize=8)
    ax_pop.grid(alpha=0.25)
    ax_coh.set_ylabel("ensemble coherence")
    ax_coh.set_xlabel("t (a.u.)")
    ax_coh.legend(fontsize=8)
    ax_coh.grid(alpha=0.25)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return str(out_path)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv_path", help="run or comparison CSV from the simulator CLI")
    parser.add_argument("out_image", help="output image path (png/svg/pdf)")
    args = parser.parse_args(argv)
    render_populations(args.csv_path, args.out_image)
    return 0


if __name__ == "__main__":
    sys.exit(main())
