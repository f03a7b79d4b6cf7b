"""Overlay of repeated 90% two-sided bands for the linear design at n=5000.

    python scripts/figure_bands.py --out results/bands_linear.svg
"""

import argparse
from pathlib import Path

from bcqd.mc import band_ensemble
from bcqd.svg import render_bands


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/bands_linear.svg")
    ap.add_argument("--dist", default="linear")
    ap.add_argument("--n", type=int, default=5000)
    ap.add_argument("--level", type=float, default=0.9)
    ap.add_argument("--realizations", type=int, default=100)
    ap.add_argument("--n-sims", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    ens = band_ensemble(args.dist, args.n, args.level, args.realizations, args.seed,
                        n_sims=args.n_sims)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    title = f"{args.realizations} bands, {args.dist}, n={args.n}, level {args.level:g}"
    out.write_text(render_bands(ens.grid.points, ens.bands, truth=ens.truth, title=title))
    print(f"covering fraction {ens.covering_fraction():.3f}; wrote {out}")


if __name__ == "__main__":
    main()
