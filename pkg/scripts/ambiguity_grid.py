#!/usr/bin/env python3
"""Export the waveform ambiguity surface as a gnuplot-ready grid.

Equivalent to `moczsim af`, kept as a script for quick parameter play:

    python scripts/ambiguity_grid.py --k 511 --out af_511.dat
    gnuplot> plot "af_511.dat" matrix with image
"""

import argparse

import numpy as np

from moczsim import ModulationParams, ambiguity_function, encode
from moczsim.simulate import atomic_write_text


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=511)
    ap.add_argument("--max-lag", type=int, default=None)
    ap.add_argument("--doppler-bins", type=int, default=128)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="ambiguity.dat")
    args = ap.parse_args()

    params = ModulationParams(args.k)
    bits = np.random.default_rng(args.seed).integers(0, 2, args.k)
    surf = ambiguity_function(
        encode(bits, params),
        args.max_lag if args.max_lag is not None else args.k,
        args.doppler_bins,
    )
    rows = [" ".join(f"{v:.9g}" for v in row) for row in surf.values]
    atomic_write_text(args.out, "\n".join(rows) + "\n")

    cut = surf.values[:, np.where(surf.doppler_cycles == 0)[0][0]]
    lag0 = np.where(surf.lags == 0)[0][0]
    psl = np.max(np.delete(cut, lag0)) / cut[lag0]
    print(f"wrote {args.out} ({surf.values.shape[0]} lags x {surf.values.shape[1]} bins)")
    print(f"zero-Doppler peak-sidelobe level: {psl:.6f} (side peak {params.side_peak:.6f})")


if __name__ == "__main__":
    main()
