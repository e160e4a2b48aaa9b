"""Command-line entry point.

Exit status: 0 success, 1 usage error, 2 numerical or validation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, parse_phase, parse_phase_list, read_csv, write_csv, write_json
from .core import DomainError, RegisterShape, closed_form_probability, optimal_phase, required_iterations
from .fitting import (
    PLATEAU_WIDTH_LAW,
    InsufficientDataError,
    fit_superellipse_exponent,
    law_exponent,
    log_law,
)
from .montecarlo import run_campaign
from .robustness import ScanFailure, ScanSettings, kmax_law, register_sweep, robustness_record
from .simulator import (
    FULL_BASIS_MAX_N,
    PhaseAssignment,
    apply_iteration,
    full_basis_trace,
    grover_matrix,
    initial_state,
    recursion_step,
    run_trace,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
VALIDATE_TOL = 1e-10


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _phase_arg(text):
    try:
        return parse_phase(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _phase_list_arg(text):
    try:
        return parse_phase_list(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _omega_arg(text):
    if text.strip().lower() == "auto":
        return "auto"
    return _phase_arg(text)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mpgrover", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, *, phases=False, seed=False):
        sp.add_argument("--config", type=Path, help="JSON config file; flags override it")
        sp.add_argument("--n", type=int)
        sp.add_argument("--m", type=int)
        sp.add_argument("--out-dir", dest="out_dir")
        if phases:
            sp.add_argument("--omega", type=_omega_arg, help="diffusion phase or 'auto'")
            sp.add_argument("--phases", type=_phase_list_arg, help="comma-separated oracle phases")
        if seed:
            sp.add_argument("--seed", type=int)

    s = sub.add_parser("simulate", help="success-probability trace")
    common(s, phases=True)
    s.add_argument("--iters", type=int)
    s.add_argument("--out", type=Path, help="CSV path (default: stdout)")

    s = sub.add_parser("montecarlo", help="random phase pairs with acceptance flags")
    common(s, seed=True)
    s.add_argument("--omega", type=_omega_arg)
    s.add_argument("--samples", type=int)
    s.add_argument("--p-threshold", dest="p_threshold", type=float)
    s.add_argument("--extra-iterations", dest="extra_iterations", type=int)
    s.add_argument("--horizon-factor", dest="scan_horizon_factor", type=int)
    s.add_argument("--out", type=Path)

    s = sub.add_parser("fit-stripe", help="superellipse exponent from a montecarlo CSV")
    s.add_argument("points", type=Path)
    s.add_argument("--out", type=Path)

    for name, text in (("robustness", "omega scan over z for one register"), ("sweep", "robustness over many registers")):
        s = sub.add_parser(name, help=text)
        common(s)
        s.add_argument("--grid", dest="z_grid_size", type=int)
        s.add_argument("--fit-window", dest="fit_window_factor", type=int)
        s.add_argument("--p-phi", dest="p_phi", type=float, help="superellipse exponent (default: law)")
    sub.choices["robustness"].add_argument("--prefix", default=None)
    sw = sub.choices["sweep"]
    sw.add_argument("--n-min", type=int, default=20)
    sw.add_argument("--n-max", type=int, default=775)
    sw.add_argument("--step", type=int, default=15)
    sw.add_argument("--n-list", type=lambda t: [int(v) for v in t.split(",") if v.strip()])
    sw.add_argument("--workers", type=int, default=1)

    s = sub.add_parser("validate", help="reduced vs full-basis vs recursion cross-checks")
    common(s, seed=True)
    s.add_argument("--draws", type=int, default=20)
    s.add_argument("--iters", type=int, default=25)
    return p


def load_config(args) -> RunConfig:
    cfg = RunConfig.from_json(Path(args.config).read_text()) if getattr(args, "config", None) else RunConfig()
    for key in asdict(cfg):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    return cfg


def _meta(cfg: RunConfig) -> dict:
    return {"config": json.loads(cfg.to_json())}


def _out(cfg: RunConfig, explicit: Path | None, default_name: str) -> Path:
    if explicit is not None:
        return explicit
    return cfg.output_dir() / default_name


# -- commands ---------------------------------------------------------------


def cmd_simulate(args) -> int:
    cfg = load_config(args).resolve()
    shape = cfg.shape
    if len(cfg.phases) != shape.m:
        raise UsageError(f"--phases has {len(cfg.phases)} values for m={shape.m}")
    iters = cfg.iters if cfg.iters is not None else 4 * required_iterations(shape)
    if iters < 0:
        raise UsageError("--iters must be >= 0")
    cfg.iters = iters
    phases = PhaseAssignment(cfg.omega, tuple(cfg.phases))
    trace = run_trace(shape, phases, iters)
    header = ["t", "p_total"] + [f"p_sol_{j}" for j in range(shape.m)]
    rows = ([t, trace.probs[t], *trace.per_solution[t]] for t in range(iters + 1))
    meta = {"n": shape.n, "m": shape.m, "omega": cfg.omega, "phis": list(phases.phis), **_meta(cfg)}
    text = write_csv(args.out, header, rows, meta)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    cfg = load_config(args)
    cfg.m = 2
    cfg = cfg.resolve()
    if cfg.samples < 0:
        raise UsageError("--samples must be >= 0")
    points = run_campaign(cfg.shape, cfg.omega, cfg.samples, cfg.seed, cfg.criteria)
    rows = ([i, p.phi0, p.phi1, p.p_max, p.t_at_max, p.accepted] for i, p in enumerate(points))
    meta = {"n": cfg.n, "m": 2, "omega": cfg.omega, "phi_max": optimal_phase(cfg.shape), **_meta(cfg)}
    path = _out(cfg, args.out, f"montecarlo_n{cfg.n}_seed{cfg.seed}.csv")
    write_csv(path, ["index", "phi0", "phi1", "p_max", "t_at_max", "accepted"], rows, meta)
    n_acc = sum(p.accepted for p in points)
    n_up = sum(p.accepted and p.phi0 > p.phi1 for p in points)
    print(f"montecarlo n={cfg.n}: {len(points)} samples, {n_acc} accepted, {n_up} with phi0>phi1 -> {path}",
          file=sys.stderr)
    return EXIT_OK


def cmd_fit_stripe(args) -> int:
    if not args.points.exists():
        raise UsageError(f"no such file: {args.points}")
    meta, rows = read_csv(args.points)
    try:
        n = int(meta["n"])
    except (KeyError, ValueError):
        raise UsageError(f"{args.points} lacks an 'n' metadata line; was it written by montecarlo?")
    phi_max = float(meta.get("phi_max") or optimal_phase(RegisterShape(n, 2)))
    stripe = [
        (float(r["phi0"]), float(r["phi1"]))
        for r in rows
        if r["accepted"] == "1" and float(r["phi0"]) > float(r["phi1"])
    ]
    fit = fit_superellipse_exponent(stripe, phi_max)
    payload = {
        "n": n,
        "phi_max": phi_max,
        "s_phi0": fit.s_phi0,
        "a_phi0": fit.a_phi0,
        "a_phi1": fit.a_phi1,
        "p_phi": fit.p_phi_rounded,
        "p_phi_unrounded": fit.p_phi,
        "residual": fit.residual,
        "n_stripe_points": len(stripe),
        "n_used": fit.n_used,
        "n_dropped": fit.n_dropped,
        "p_phi_law": law_exponent(n),
        "source": str(args.points),
        "source_config": json.loads(meta.get("config", "{}")),
    }
    text = write_json(args.out, payload)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK


def _settings(cfg: RunConfig) -> ScanSettings:
    return ScanSettings(cfg.z_grid_size, cfg.fit_window_factor, cfg.p_phi)


def _bracket_dict(b):
    if b is None:
        return None
    return {"phi_minus": b.phi_minus, "phi_plus": b.phi_plus, "v_plus": b.v_plus, "v_minus": b.v_minus}


def record_dict(r) -> dict:
    d = asdict(r)
    d["bracket"] = _bracket_dict(r.bracket)
    d["in_bracket"] = r.in_bracket
    d["flags"] = list(r.flags)
    return d


def cmd_robustness(args) -> int:
    cfg = load_config(args)
    cfg.m = 2
    record, samples = robustness_record(cfg.n, _settings(cfg))
    prefix = args.prefix or f"robustness_n{cfg.n}"
    out = cfg.output_dir()
    meta = {"n": cfg.n, **_meta(cfg)}
    write_csv(
        out / f"{prefix}_scan.csv",
        ["z", "phi0", "phi1", "b", "k", "omega_q", "flagged"],
        ([s.z, s.phi0, s.phi1, s.b, s.k, s.omega_q, s.flagged] for s in samples),
        meta,
    )
    write_json(out / f"{prefix}_record.json", {"record": record_dict(record), "config": json.loads(cfg.to_json())})
    print(
        f"robustness n={cfg.n}: z_max={record.z_max:.4f} omega_max={record.omega_max:.4f} "
        f"K_max={record.k_max_width:.3f} in_bracket={record.in_bracket}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args)
    cfg.m = 2
    n_values = args.n_list or ([cfg.n] if args.n is not None else list(range(args.n_min, args.n_max + 1, args.step)))
    if not n_values or min(n_values) < 4:
        raise UsageError("register sizes must be >= 4")
    records = register_sweep(n_values, _settings(cfg), workers=args.workers)
    out = cfg.output_dir()
    meta = {"n_values": n_values, **_meta(cfg)}
    write_csv(
        out / "sweep.csv",
        ["n", "z_max", "omega_max", "phi0_max", "phi1_max", "k_max_width", "phi_minus", "phi_plus", "flags"],
        (
            [r.n, r.z_max, r.omega_max, r.phi0_max, r.phi1_max, r.k_max_width,
             r.bracket.phi_minus if r.bracket else math.nan, r.bracket.phi_plus if r.bracket else math.nan,
             ";".join(r.flags)]
            for r in records
        ),
        meta,
    )
    failed = [r.n for r in records if any(f.startswith("error") for f in r.flags)]
    law = None
    try:
        law = kmax_law(records)
    except ValueError as exc:
        print(f"sweep: no K_max law fitted ({exc})", file=sys.stderr)
    payload = {"published": dict(zip(("c0", "c1", "c2"), PLATEAU_WIDTH_LAW)), "failed_n": failed}
    if law is not None:
        ns = np.array([r.n for r in records], dtype=float)
        payload["fitted"] = {"c0": law.c0, "c1": law.c1, "c2": law.c2, "residual_norm": law.residual_norm,
                             "bounded": law.bounded}
        payload["relative_deviation_vs_published"] = [
            float(v) for v in law(ns) / log_law(PLATEAU_WIDTH_LAW, ns) - 1.0
        ]
    write_json(out / "sweep_law.json", payload)
    print(f"sweep: {len(records)} registers, {len(failed)} failed", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = load_config(args)
    if cfg.n > FULL_BASIS_MAX_N:
        raise UsageError(f"validate is limited to n <= {FULL_BASIS_MAX_N} (got {cfg.n})")
    shape = cfg.shape
    rng = np.random.default_rng(cfg.seed)
    worst_full = worst_rec = 0.0
    offending = None
    for _ in range(args.draws):
        omega, *phis = rng.uniform(0.0, 2 * math.pi, shape.m + 1)
        phases = PhaseAssignment(omega, tuple(phis))
        sols = sorted(rng.choice(shape.n, size=shape.m, replace=False).tolist())
        dev = float(np.max(np.abs(run_trace(shape, phases, args.iters).probs
                                  - full_basis_trace(shape, sols, phases, args.iters).probs)))
        g = grover_matrix(shape, phases)
        a = b = initial_state(shape)
        rec = 0.0
        for _ in range(args.iters):
            a, b = apply_iteration(a, g), recursion_step(b, shape, phases)
            rec = max(rec, float(np.max(np.abs(a.vector() - b.vector()))))
        if max(dev, rec) > max(worst_full, worst_rec) and max(dev, rec) > VALIDATE_TOL:
            offending = {"omega": omega, "phis": list(phis), "solutions": sols}
        worst_full, worst_rec = max(worst_full, dev), max(worst_rec, rec)
    standard = run_trace(shape, PhaseAssignment.uniform(math.pi, shape.m), args.iters).probs
    closed = np.array([closed_form_probability(shape, t) for t in range(args.iters + 1)])
    worst_closed = float(np.max(np.abs(standard - closed)))
    print(f"reduced vs full basis   max |dP| = {worst_full:.3e}")
    print(f"matrix vs recursion     max |da| = {worst_rec:.3e}")
    print(f"all-pi vs closed form   max |dP| = {worst_closed:.3e}")
    if max(worst_full, worst_rec, worst_closed) > VALIDATE_TOL:
        print(f"validation FAILED (tol {VALIDATE_TOL:g}) n={shape.n} m={shape.m} seed={cfg.seed} {offending}",
              file=sys.stderr)
        return EXIT_NUMERIC
    print("validation passed")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "montecarlo": cmd_montecarlo,
    "fit-stripe": cmd_fit_stripe,
    "robustness": cmd_robustness,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, DomainError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"mpgrover {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InsufficientDataError, ScanFailure, FloatingPointError) as exc:
        print(f"mpgrover {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"mpgrover {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
