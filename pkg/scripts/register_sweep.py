"""Sweep register sizes, record z_max, the robust phase pair and K_max per n,
then fit K_max(n) = c0 + c1 ln(n + c2) and compare with the published law.

    python3 scripts/register_sweep.py --n-min 20 --n-max 775 --step 15 --workers 4
"""

import argparse
from pathlib import Path

import numpy as np

from multiphase_grover.config import write_csv, write_json
from multiphase_grover.core import RegisterShape, optimal_phase
from multiphase_grover.fitting import PLATEAU_WIDTH_LAW, log_law
from multiphase_grover.robustness import ScanSettings, kmax_law, register_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n-min", type=int, default=20)
    ap.add_argument("--n-max", type=int, default=775)
    ap.add_argument("--step", type=int, default=15)
    ap.add_argument("--grid", type=int, default=629)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out-dir", type=Path, default=Path("results/sweep"))
    args = ap.parse_args()

    ns = list(range(args.n_min, args.n_max + 1, args.step))
    records = register_sweep(ns, ScanSettings(z_grid_size=args.grid), workers=args.workers)
    published = log_law(PLATEAU_WIDTH_LAW, np.array(ns, dtype=float))
    rows = []
    for r, k_pub in zip(records, published):
        phi = optimal_phase(RegisterShape(r.n, 2))
        rows.append([r.n, phi, r.z_max, r.phi0_max, r.phi1_max, r.k_max_width, k_pub, bool(r.in_bracket)])
        print(f"n={r.n:4d} phi_max={phi:.4f} z_max={r.z_max:.4f} K_max={r.k_max_width:7.3f} "
              f"(law {k_pub:7.3f}) in_bracket={r.in_bracket}")
    write_csv(
        args.out_dir / "sweep.csv",
        ["n", "phi_max", "z_max", "phi0_max", "phi1_max", "k_max", "k_max_law", "in_bracket"],
        rows,
        {"grid": args.grid},
    )
    law = kmax_law(records)
    dev = law(np.array(ns, dtype=float)) / published - 1.0
    write_json(
        args.out_dir / "kmax_law.json",
        {"fitted": law.coeffs, "published": PLATEAU_WIDTH_LAW, "max_relative_deviation": float(np.abs(dev).max())},
    )
    print(f"fitted K_max law {law.coeffs}, published {PLATEAU_WIDTH_LAW}, max rel dev {np.abs(dev).max():.3f}")


if __name__ == "__main__":
    main()
