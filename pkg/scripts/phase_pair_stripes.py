"""Monte Carlo over oracle phase pairs (m = 2, diffusion phase = phi_max):
accepted-point counts, superellipse exponent of the upper stripe against the
published exponent law, and stripe thickness.

    python3 scripts/phase_pair_stripes.py --n 200 325 --samples 200000
"""

import argparse
from pathlib import Path

from multiphase_grover.config import write_csv, write_json
from multiphase_grover.core import RegisterShape, optimal_phase
from multiphase_grover.fitting import InsufficientDataError, fit_superellipse_exponent, law_exponent
from multiphase_grover.montecarlo import AcceptanceCriteria, run_campaign, stripe_spread, upper_stripe


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, nargs="+", default=[200, 325])
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--horizon-factor", type=int, default=4, help="P_max scan horizon in multiples of t_ref")
    ap.add_argument("--out-dir", type=Path, default=Path("results/stripes"))
    args = ap.parse_args()
    criteria = AcceptanceCriteria(scan_horizon_factor=args.horizon_factor)

    summary = {}
    for n in args.n:
        shape = RegisterShape(n, 2)
        phi = optimal_phase(shape)
        points = run_campaign(shape, phi, args.samples, args.seed, criteria)
        accepted = [p for p in points if p.accepted]
        write_csv(
            args.out_dir / f"accepted_n{n}.csv",
            ["phi0", "phi1", "p_max", "t_at_max"],
            ([p.phi0, p.phi1, p.p_max, p.t_at_max] for p in accepted),
            {"n": n, "phi_max": phi, "samples": args.samples, "seed": args.seed},
        )
        stripe = [(p.phi0, p.phi1) for p in upper_stripe(points)]
        entry = {"accepted": len(accepted), "stripe_points": len(stripe), "p_phi_law": law_exponent(n)}
        try:
            fit = fit_superellipse_exponent(stripe, phi)
            entry.update(p_phi=fit.p_phi, p_phi_rounded=fit.p_phi_rounded, spread=stripe_spread(stripe, fit))
        except InsufficientDataError as exc:
            entry["error"] = str(exc)
        summary[str(n)] = entry
        print(f"n={n}: {entry}")
    write_json(args.out_dir / "stripes_summary.json", summary)


if __name__ == "__main__":
    main()
