"""Closed-form Grover kinematics: rotation angle, iteration counts, the
phase-matching optimal phase and the boundary-register bracket."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# arcsin/arccos arguments within this distance of +-1 are clamped
_CLAMP_TOL = 1e-12
# ratios this close to an integer are treated as exact before ceil/floor
_INT_SNAP = 1e-9


class DomainError(ValueError):
    """Input outside the mathematical domain of a formula."""


@dataclass(frozen=True)
class RegisterShape:
    """Database size ``n`` with ``m`` marked solutions."""

    n: int
    m: int

    def __post_init__(self):
        if int(self.n) != self.n or int(self.m) != self.m:
            raise DomainError(f"n and m must be integers, got n={self.n}, m={self.m}")
        if not 1 <= self.m < self.n:
            raise DomainError(f"need 1 <= m < n, got n={self.n}, m={self.m}")

    @property
    def ratio(self) -> float:
        return self.m / self.n


@dataclass(frozen=True)
class ZBracket:
    """Interval expected to contain z_max for one register size."""

    phi_minus: float
    phi_plus: float
    v_plus: int
    v_minus: int


def _as_shape(shape_or_n, m=None) -> RegisterShape:
    if isinstance(shape_or_n, RegisterShape):
        return shape_or_n
    return RegisterShape(int(shape_or_n), int(m))


def _clamp_unit(x: float, what: str) -> float:
    if x > 1.0:
        if x - 1.0 <= _CLAMP_TOL:
            return 1.0
        raise DomainError(f"{what}: argument {x!r} > 1")
    if x < -1.0:
        if -1.0 - x <= _CLAMP_TOL:
            return -1.0
        raise DomainError(f"{what}: argument {x!r} < -1")
    return x


def _snap(x: float) -> float:
    r = round(x)
    return float(r) if abs(x - r) < _INT_SNAP else x


def rotation_angle(shape: RegisterShape) -> float:
    """Rotation per standard iteration, ``2 asin(sqrt(m/n))``."""
    shape = _as_shape(shape)
    return 2.0 * math.asin(_clamp_unit(math.sqrt(shape.ratio), "rotation_angle"))


def _iteration_ratio(m: int, n: int) -> float:
    x = _clamp_unit(math.sqrt(m / n), "required_iterations")
    return _snap(math.acos(x) / (2.0 * math.asin(x)))


def required_iterations(shape: RegisterShape) -> int:
    """Exact iteration count ``ceil(acos(sqrt(m/n)) / (2 asin(sqrt(m/n))))``."""
    shape = _as_shape(shape)
    return max(1, math.ceil(_iteration_ratio(shape.m, shape.n)))


def approx_required_iterations(shape: RegisterShape) -> int:
    """Large-register approximation ``ceil(pi/4 sqrt(n/m))``.

    Reference only; it can disagree with :func:`required_iterations` after
    the ceiling (n=200, m=3 gives 7 vs 6) and nothing in the pipeline uses it.
    """
    shape = _as_shape(shape)
    return math.ceil(_snap(math.pi / 4.0 * math.sqrt(shape.n / shape.m)))


def optimal_phase(shape: RegisterShape) -> float:
    """Equal oracle/diffusion phase that makes the search deterministic.

    The floor is applied verbatim, including at the exact-integer argument
    reached only by n/m = 4, where it selects a two-iteration schedule.
    """
    shape = _as_shape(shape)
    s = math.asin(_clamp_unit(math.sqrt(shape.ratio), "optimal_phase"))
    branch = math.floor(_snap(0.25 * (-2.0 + math.pi / s)))
    arg = math.sin(math.pi / (6 + 4 * branch)) * math.sqrt(shape.n / shape.m)
    try:
        arg = _clamp_unit(arg, "optimal_phase")
    except DomainError as exc:
        raise DomainError(f"{exc} for n={shape.n}, m={shape.m}") from None
    return 2.0 * math.asin(arg)


def closed_form_probability(shape: RegisterShape, t: int) -> float:
    """Success probability of the standard (sign-flip) search after ``t`` steps."""
    shape = _as_shape(shape)
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    theta = rotation_angle(shape)
    return math.sin((2 * t + 1) * theta / 2.0) ** 2


def _required_iterations_array(m: int, vs: np.ndarray) -> np.ndarray:
    x = np.sqrt(m / vs.astype(float))
    r = np.arccos(x) / (2.0 * np.arcsin(x))
    near = np.abs(r - np.round(r)) < _INT_SNAP
    r = np.where(near, np.round(r), r)
    return np.maximum(np.ceil(r), 1).astype(np.int64)


def boundary_registers(m: int, n_lo: int, n_hi: int) -> list[int]:
    """Register sizes V in ``[n_lo, n_hi]`` where the iteration count jumps
    by one between V and V + 1."""
    n_lo = max(int(n_lo), m + 1)
    if n_hi < n_lo:
        return []
    vs = np.arange(n_lo, int(n_hi) + 2)
    t = _required_iterations_array(m, vs)
    jumps = np.nonzero(np.diff(t) == 1)[0]
    return [int(vs[i]) for i in jumps]


def zmax_bracket(n: int, m: int, window: int | None = None) -> ZBracket:
    """Bracket ``[phi(V_- + 1), phi(V_+)]`` around the most robust z.

    ``V_+`` is the largest boundary register below ``n`` (``n`` itself when
    it is a boundary) and ``V_-`` the smallest one above ``n``.
    """
    shape = RegisterShape(n, m)
    if window is None:
        window = 2 * n + 20 * m + 100
    below = boundary_registers(m, m + 1, n)
    above = boundary_registers(m, n + 1, n + window)
    if not below or not above:
        raise DomainError(
            f"no boundary register {'below' if not below else 'above'} n={n} "
            f"(m={m}, window={window})"
        )
    v_plus, v_minus = below[-1], above[0]
    return ZBracket(
        phi_minus=optimal_phase(RegisterShape(v_minus + 1, m)),
        phi_plus=optimal_phase(RegisterShape(v_plus, m)),
        v_plus=v_plus,
        v_minus=v_minus,
    )
