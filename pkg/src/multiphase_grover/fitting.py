"""Superellipse stripe fits, asymmetric modified Hill fits and the
logarithmic extrapolation law ``y = c0 + c1 ln(n + c2)``."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares, minimize_scalar

TWO_PI = 2.0 * math.pi
HILL_PARAMS = 6

# published coefficients (c0, c1, c2)
SUPERELLIPSE_EXPONENT_LAW = (-65.7376, 12.5476, 252.0719)
PLATEAU_WIDTH_LAW = (-82.658, 15.978, 250.867)
_ROUNDING_ZERO = 1e-15


class InsufficientDataError(ValueError):
    pass


# -- superellipse -----------------------------------------------------------


@dataclass(frozen=True)
class SuperellipseFit:
    """Quadrant of a superellipse through ``(phi_max, 0)`` and ``(2pi, phi_max)``.

    ``p_phi`` keeps full precision; :attr:`p_phi_rounded` is the one-decimal
    value used for reporting.
    """

    s_phi0: float
    a_phi0: float
    a_phi1: float
    p_phi: float
    residual: float = 0.0
    n_used: int = 0
    n_dropped: int = 0

    @classmethod
    def through(cls, phi_max: float, p_phi: float, **kw) -> "SuperellipseFit":
        return cls(TWO_PI, phi_max - TWO_PI, phi_max, float(p_phi), **kw)

    @property
    def phi_max(self) -> float:
        return self.a_phi1

    @property
    def p_phi_rounded(self) -> float:
        return round(self.p_phi, 1)


def _unit_abs(x):
    # cos(pi/2), sin(pi) etc. come out as ~1e-16 rather than 0; a fractional
    # power would blow that up to ~1e-11, so snap rounding-level values.
    x = np.abs(x)
    return np.where(x < _ROUNDING_ZERO, 0.0, x)


def superellipse_point(fit: SuperellipseFit, z):
    """Phase pair on the curve at parameter ``z`` (scalar or array)."""
    e = 2.0 / fit.p_phi
    phi0 = fit.s_phi0 + fit.a_phi0 * _unit_abs(np.cos(z)) ** e
    phi1 = fit.a_phi1 * _unit_abs(np.sin(z)) ** e
    if np.ndim(z) == 0:
        return float(phi0), float(phi1)
    return phi0, phi1


def log_law(coeffs, n):
    c0, c1, c2 = coeffs
    return c0 + c1 * np.log(np.asarray(n, dtype=float) + c2)


def law_exponent(n: float) -> float:
    """Superellipse exponent from the published register-size law."""
    return float(log_law(SUPERELLIPSE_EXPONENT_LAW, n))


def _implicit_residuals(p, r0, r1):
    return r0**p + r1**p - 1.0


def fit_superellipse_exponent(
    stripe: Sequence[tuple[float, float]],
    phi_max: float,
    p_bounds: tuple[float, float] = (1.0, 40.0),
    min_points: int = 10,
) -> SuperellipseFit:
    """Fit the exponent by minimising ``sum (r0^p + r1^p - 1)^2`` on the
    normalised coordinates of the quadrant. Points outside the quadrant are
    dropped and counted."""
    pts = np.asarray(stripe, dtype=float).reshape(-1, 2)
    phi0, phi1 = pts[:, 0], pts[:, 1]
    inside = (phi0 >= phi_max) & (phi0 <= TWO_PI) & (phi1 >= 0.0) & (phi1 <= phi_max)
    used = pts[inside]
    if len(used) < min_points:
        raise InsufficientDataError(
            f"{len(used)} usable stripe points (need {min_points}; {int((~inside).sum())} outside quadrant)"
        )
    r0 = (TWO_PI - used[:, 0]) / (TWO_PI - phi_max)
    r1 = used[:, 1] / phi_max

    def cost(p):
        return float(np.sum(_implicit_residuals(p, r0, r1) ** 2))

    res = minimize_scalar(cost, bounds=p_bounds, method="bounded", options={"xatol": 1e-8})
    return SuperellipseFit.through(
        phi_max, float(res.x), residual=float(res.fun), n_used=int(len(used)), n_dropped=int((~inside).sum())
    )


# -- asymmetric modified Hill function --------------------------------------


@dataclass(frozen=True)
class HillFit:
    b: float
    k_l: float
    n_l: float
    k_r: float
    n_r: float
    w: float
    sigma: float = 0.0
    converged: bool = True
    flat: bool = False

    @property
    def params(self) -> np.ndarray:
        return np.array([self.b, self.k_l, self.n_l, self.k_r, self.n_r, self.w])


def _hill(t, b, k_l, n_l, k_r, n_r, w):
    d = np.asarray(t, dtype=float) - w
    ad = np.abs(d)
    # k^n / (|d|^n + k^n) rewritten to avoid overflowing k^n
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        right = 1.0 / (1.0 + (ad / abs(k_r)) ** n_r) if k_r != 0 else np.zeros_like(ad)
        left = 1.0 / (1.0 + (ad / abs(k_l)) ** n_l) if k_l != 0 else np.zeros_like(ad)
    sgn = np.sign(d)
    return 0.5 * b * ((sgn + 1.0) * right - (sgn - 1.0) * left)


def _hill_jacobian(t, b, k_l, n_l, k_r, n_r, w):
    """Columns d/d(b, k_l, n_l, k_r, n_r, w); widths enter through |k|."""
    d = t - w
    jac = np.zeros((len(t), HILL_PARAMS))
    jac[d == 0, 0] = 1.0
    for side, k_signed, n, col in ((d > 0, k_r, n_r, 3), (d < 0, k_l, n_l, 1)):
        ad = np.abs(d[side])
        k = abs(k_signed)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            v = 1.0 / (1.0 + (ad / k) ** n)
        # v (1 - v) = u / (1 + u)^2 stays finite when u overflows
        s = b * v * (1.0 - v)
        jac[side, 0] = v
        jac[side, col] = s * n / k * math.copysign(1.0, k_signed)
        jac[side, col + 1] = -s * np.log(ad / k)
        jac[side, 5] = s * n / ad if col == 3 else -s * n / ad
    return jac


def hill_value(fit: HillFit, t):
    """Evaluate the plateau function; ``sign(0) = 0`` so ``W(w) = b``."""
    out = _hill(t, fit.b, fit.k_l, fit.n_l, fit.k_r, fit.n_r, fit.w)
    return float(out) if np.ndim(t) == 0 else out


def plateau_width(fit: HillFit) -> float:
    return abs(fit.k_l) + abs(fit.k_r)


def fit_sigma(fit: HillFit, probs, t_fit_max: int | None = None) -> float:
    """Residual standard deviation with ``rho - 6`` degrees of freedom over
    t = 0 .. t_fit_max."""
    probs = np.asarray(getattr(probs, "probs", probs), dtype=float)
    if t_fit_max is None:
        t_fit_max = len(probs) - 1
    rho = t_fit_max + 1
    if rho <= HILL_PARAMS:
        raise ValueError(f"need more than {HILL_PARAMS} points, got {rho}")
    t = np.arange(rho)
    resid = hill_value(fit, t) - probs[:rho]
    return float(math.sqrt(np.sum(resid**2) / (rho - HILL_PARAMS)))


def _hill_starts(p: np.ndarray):
    w0 = int(np.argmax(p))
    b0 = float(p[w0])
    hi = p >= 0.9 * b0
    lo_i = w0
    while lo_i > 0 and hi[lo_i - 1]:
        lo_i -= 1
    hi_i = w0
    while hi_i < len(p) - 1 and hi[hi_i + 1]:
        hi_i += 1
    half = max((hi_i - lo_i) / 2.0, 1.0)
    for n_l in (2.0, 5.0, 10.0):
        for n_r in (2.0, 5.0, 10.0):
            yield np.array([b0, half, n_l, half, n_r, float(w0)])


def fit_hill(probs, t_fit_max: int | None = None, max_nfev: int = 3000) -> HillFit:
    """Least-squares fit of the six plateau parameters over t = 0 .. t_fit_max.

    Nine starts (left/right slopes from {2, 5, 10}); the best candidate by
    residual wins, earlier starts on ties. A trace with no variation is
    returned as a flat fit.
    """
    p = np.asarray(getattr(probs, "probs", probs), dtype=float)
    if t_fit_max is None:
        t_fit_max = len(p) - 1
    if t_fit_max + 1 > len(p):
        raise ValueError(f"trace has {len(p)} points, t_fit_max={t_fit_max}")
    if t_fit_max + 1 <= HILL_PARAMS:
        raise ValueError(f"need more than {HILL_PARAMS} points, got {t_fit_max + 1}")
    p = p[: t_fit_max + 1]
    t = np.arange(t_fit_max + 1, dtype=float)
    span = float(t_fit_max)

    if np.ptp(p) < 1e-12:
        flat = HillFit(float(p.mean()), 10 * span, 200.0, 10 * span, 200.0, 0.0, flat=True)
        return replace(flat, sigma=fit_sigma(flat, p, t_fit_max))

    lower = np.array([0.0, 1e-3, 0.5, 1e-3, 0.5, 0.0])
    upper = np.array([2.0, 10 * span, 200.0, 10 * span, 200.0, span])

    def resid(x):
        return _hill(t, *x) - p

    best = None
    for x0 in _hill_starts(p):
        x0 = np.clip(x0, lower, upper)
        r = least_squares(
            resid, x0, jac=lambda x: _hill_jacobian(t, *x), bounds=(lower, upper), method="trf", x_scale="jac",
            ftol=1e-12, xtol=1e-12, gtol=1e-12, max_nfev=max_nfev,
        )
        cost = float(np.sum(r.fun**2))
        if best is None or cost < best[0]:
            best = (cost, r)
    cost, r = best
    fit = HillFit(*map(float, r.x), converged=bool(r.status > 0 and np.isfinite(cost)))
    return replace(fit, sigma=fit_sigma(fit, p, t_fit_max))


# -- logarithmic law --------------------------------------------------------


@dataclass(frozen=True)
class LogLawFit:
    c0: float
    c1: float
    c2: float
    residual_norm: float = 0.0
    bounded: bool = False

    @property
    def coeffs(self) -> tuple[float, float, float]:
        return (self.c0, self.c1, self.c2)

    def __call__(self, n):
        return log_law(self.coeffs, n)


def _linear_part(n, y, c2):
    a = np.column_stack([np.ones_like(n), np.log(n + c2)])
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    return coef, float(np.sum((a @ coef - y) ** 2))


def fit_log_law(points: Sequence[tuple[float, float]], c2_max: float = 1e5) -> LogLawFit:
    """Least-squares ``y = c0 + c1 ln(n + c2)``.

    ``c2`` is profiled (c0, c1 solved linearly for each trial value), then all
    three are polished jointly. ``bounded`` flags a solution pinned to the
    edge of the search interval.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n, y = pts[:, 0], pts[:, 1]
    if len(np.unique(n)) < 4:
        raise InsufficientDataError(f"need at least 4 distinct n values, got {len(np.unique(n))}")
    c2_min = -float(n.min()) + 1e-6
    # log-spaced offsets from the admissible edge
    grid = c2_min + np.geomspace(1e-3, c2_max - c2_min, 400)
    costs = [_linear_part(n, y, c)[1] for c in grid]
    i = int(np.argmin(costs))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(lambda c: _linear_part(n, y, c)[1], bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10})
    c2 = float(res.x)
    (c0, c1), _ = _linear_part(n, y, c2)

    def resid(x):
        return x[0] + x[1] * np.log(n + x[2]) - y

    pol = least_squares(resid, [c0, c1, c2], bounds=([-np.inf, -np.inf, c2_min], [np.inf, np.inf, c2_max]),
                        method="trf", ftol=1e-15, xtol=1e-15, gtol=1e-15, x_scale="jac")
    c0, c1, c2 = map(float, pol.x)
    edge = c2 - c2_min < 1e-3 or c2_max - c2 < 1e-3 * c2_max
    return LogLawFit(c0, c1, c2, residual_norm=float(np.linalg.norm(pol.fun)), bounded=bool(edge))
