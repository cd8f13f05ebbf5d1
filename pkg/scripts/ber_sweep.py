#!/usr/bin/env python3
"""BER sweep of the noncoherent decoder against the coherent BPSK reference.

Writes ber.csv / ber_summary.json into --out and prints the table. The 511-bit
packet matches the headline configuration; it is noticeably slower than the
default 127, so start small when exploring.
"""

import argparse
from pathlib import Path

from moczsim import ModulationParams, SimConfig, run_ber
from moczsim.simulate import write_result


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=127, help="payload bits per packet")
    ap.add_argument("--channel", default="awgn",
                    choices=["awgn", "rayleigh_flat", "rician_selective"])
    ap.add_argument("--snr-db", type=float, nargs="+",
                    default=[0, 2, 4, 6, 8, 10, 12])
    ap.add_argument("--trials", type=int, default=20_000, help="packets per SNR point")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()

    cfg = SimConfig(
        modulation=ModulationParams(args.k),
        channel_model=args.channel,
        snr_grid_db=tuple(args.snr_db),
        trials=args.trials,
        seed=args.seed,
    )
    result = run_ber(cfg)
    write_result(result, args.out, "ber", cfg)

    print(f"K={args.k} over {args.channel}, {args.trials} packets per point")
    print(f"{'Eb/N0 [dB]':>11} {'BER':>12} {'BPSK ref':>12}")
    for rec in result.records:
        print(f"{rec['snr_db']:>11.2f} {rec['ber']:>12.3e} {rec['bpsk_ref']:>12.3e}")


if __name__ == "__main__":
    main()
