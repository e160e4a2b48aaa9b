"""Robustness scan along the superellipse parameter z, the most robust
phase pair per register size, and the plateau-width extrapolation law."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import RegisterShape, ZBracket, optimal_phase, zmax_bracket
from .fitting import (
    HillFit,
    LogLawFit,
    SuperellipseFit,
    fit_hill,
    fit_log_law,
    law_exponent,
    plateau_width,
    superellipse_point,
)
from .montecarlo import reference_iteration
from .simulator import PhaseAssignment, run_trace

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
DEFAULT_GRID = 629
# Hill fits cover t = 0 .. FIT_WINDOW_FACTOR * t_ref: the first plateau and its decay
FIT_WINDOW_FACTOR = 3


class ScanFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class RobustnessSample:
    z: float
    phi0: float
    phi1: float
    b: float
    k: float
    omega_q: float = 0.0
    flagged: bool = False


@dataclass(frozen=True)
class RobustnessRecord:
    n: int
    z_max: float
    omega_max: float
    phi0_max: float
    phi1_max: float
    k_max_width: float
    bracket: ZBracket | None
    b_at_max: float = float("nan")
    k_equal_phase: float = float("nan")
    p_phi: float = float("nan")
    flags: tuple[str, ...] = field(default=())

    @property
    def in_bracket(self) -> bool | None:
        if self.bracket is None:
            return None
        return self.bracket.phi_minus <= self.z_max <= self.bracket.phi_plus


@dataclass(frozen=True)
class ScanSettings:
    z_grid_size: int = DEFAULT_GRID
    fit_window_factor: int = FIT_WINDOW_FACTOR
    p_phi: float | None = None  # None: take the exponent from the published law


def _fold(z: float) -> float:
    """Representative of z in [0, pi/2] under z -> pi - z and z -> z + pi."""
    r = math.fmod(z, math.pi)
    return math.pi - r if r > math.pi / 2 else r


def canonical_z(z: float) -> float:
    """Image of z in [pi/2, pi], the quadrant the boundary bracket lives in."""
    return math.pi - _fold(z)


def z_grid(size: int) -> np.ndarray:
    return np.linspace(0.0, TWO_PI, size)


def _curve(n: int, p_phi: float | None) -> SuperellipseFit:
    shape = RegisterShape(n, 2)
    return SuperellipseFit.through(optimal_phase(shape), law_exponent(n) if p_phi is None else p_phi)


def _fit_window(shape: RegisterShape, omega: float, factor: int) -> int:
    return factor * reference_iteration(shape, omega)


def scan_z(n: int, settings: ScanSettings = ScanSettings()) -> list[RobustnessSample]:
    """Hill-fit height b and plateau width k along the curve, one sample per
    grid point. Omega is filled in by :func:`normalize_omega`."""
    if settings.z_grid_size < 64:
        raise ValueError(f"z_grid_size must be >= 64, got {settings.z_grid_size}")
    shape = RegisterShape(n, 2)
    curve = _curve(n, settings.p_phi)
    omega = curve.phi_max
    t_fit = _fit_window(shape, omega, settings.fit_window_factor)

    # the curve has the same phases at z, pi - z and z + pi
    cache: dict[float, HillFit] = {}
    samples = []
    for z in z_grid(settings.z_grid_size):
        key = round(_fold(float(z)), 12)
        if key not in cache:
            pair = superellipse_point(curve, key)
            trace = run_trace(shape, PhaseAssignment(omega, pair), t_fit)
            cache[key] = fit_hill(trace, t_fit)
        fit = cache[key]
        phi0, phi1 = superellipse_point(curve, float(z))
        ok = fit.converged and not fit.flat and np.isfinite(fit.sigma)
        samples.append(RobustnessSample(float(z), phi0, phi1, fit.b, plateau_width(fit), flagged=not ok))
    return samples


def normalize_omega(samples: Sequence[RobustnessSample]) -> list[RobustnessSample]:
    good = [s for s in samples if not s.flagged]
    if not good:
        raise ScanFailure("every sample in the scan is flagged")
    b_max = max(s.b for s in good)
    k_max = max(s.k for s in good)
    scale = b_max * k_max
    out = []
    for s in samples:
        q = 0.0 if s.flagged or scale <= 0 else min(max(s.b * s.k / scale, 0.0), 1.0)
        out.append(RobustnessSample(s.z, s.phi0, s.phi1, s.b, s.k, q, s.flagged))
    return out


def find_zmax(samples: Sequence[RobustnessSample], canonical: bool = True) -> tuple[float, float]:
    """Grid argmax of omega (smallest z on ties).

    With ``canonical`` the winner is mapped to its equivalent z in
    [pi/2, pi]; the four images of a point on the curve are the same phases.
    """
    good = sorted((s for s in samples if not s.flagged), key=lambda s: s.z)
    if not good:
        raise ScanFailure("no usable samples")
    best = good[0]
    for s in good[1:]:
        if s.omega_q > best.omega_q:
            best = s
    z = canonical_z(best.z) if canonical else best.z
    return z, best.omega_q


def optimal_phase_pair(n: int, z_max: float, p_phi: float | None = None) -> tuple[float, float]:
    return superellipse_point(_curve(n, p_phi), z_max)


def equal_phase_fit(n: int, fit_window_factor: int = FIT_WINDOW_FACTOR) -> HillFit:
    """Hill fit of the deterministic run with every phase at phi_max."""
    shape = RegisterShape(n, 2)
    phi = optimal_phase(shape)
    t_fit = _fit_window(shape, phi, fit_window_factor)
    return fit_hill(run_trace(shape, PhaseAssignment.uniform(phi, 2), t_fit), t_fit)


def robustness_record(n: int, settings: ScanSettings = ScanSettings()) -> tuple[RobustnessRecord, list[RobustnessSample]]:
    samples = normalize_omega(scan_z(n, settings))
    z_max, omega_max = find_zmax(samples)
    phi0, phi1 = optimal_phase_pair(n, z_max, settings.p_phi)
    at_max = min((s for s in samples if not s.flagged), key=lambda s: abs(_fold(s.z) - _fold(z_max)))
    flags = []
    try:
        bracket = zmax_bracket(n, 2)
    except ValueError as exc:
        bracket = None
        flags.append(f"no-bracket: {exc}")
    if any(s.flagged for s in samples):
        flags.append(f"flagged-samples={sum(s.flagged for s in samples)}")
    record = RobustnessRecord(
        n=n,
        z_max=z_max,
        omega_max=omega_max,
        phi0_max=phi0,
        phi1_max=phi1,
        k_max_width=at_max.k,
        bracket=bracket,
        b_at_max=at_max.b,
        k_equal_phase=plateau_width(equal_phase_fit(n, settings.fit_window_factor)),
        p_phi=_curve(n, settings.p_phi).p_phi,
        flags=tuple(flags),
    )
    if bracket is not None and not record.in_bracket:
        log.info("n=%d: z_max=%.4f outside [%.4f, %.4f]", n, z_max, bracket.phi_minus, bracket.phi_plus)
    return record, samples


def _sweep_one(args) -> RobustnessRecord:
    n, settings = args
    try:
        return robustness_record(n, settings)[0]
    except Exception as exc:  # one bad n must not end the sweep
        nan = float("nan")
        return RobustnessRecord(n, nan, nan, nan, nan, nan, None, flags=(f"error: {exc}",))


def register_sweep(
    n_values: Sequence[int], settings: ScanSettings = ScanSettings(), workers: int = 1
) -> list[RobustnessRecord]:
    """One record per register size, in input order. Deterministic: nothing
    in the scan path is random."""
    jobs = [(int(n), settings) for n in n_values]
    if any(n < 4 for n, _ in jobs):
        raise ValueError("register sizes must be >= 4")
    if workers <= 1:
        return [_sweep_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_one, jobs))


def kmax_law(records: Sequence[RobustnessRecord]) -> LogLawFit:
    pts = [(r.n, r.k_max_width) for r in records if np.isfinite(r.k_max_width)]
    return fit_log_law(pts)
