"""Multiphase-oracle Grover evolution.

The production path works in the (m+1)-dimensional basis spanned by the
normalised non-solution superposition and the m solution states. A full
n-dimensional path and an element-wise recursion are kept as independent
cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import RegisterShape, _as_shape

TWO_PI = 2.0 * math.pi
FULL_BASIS_MAX_N = 4096
_TIE_ULPS = 8


class ContractError(ValueError):
    """Arguments violate an operation's preconditions."""


def _reduce(phase: float) -> float:
    r = math.fmod(float(phase), TWO_PI)
    if r < 0:
        r += TWO_PI
    # fmod can land exactly on 2pi after the sign fix
    return 0.0 if r >= TWO_PI else r


@dataclass(frozen=True)
class PhaseAssignment:
    """Diffusion phase ``omega`` and one oracle phase per solution, all
    stored reduced into [0, 2pi)."""

    omega: float
    phis: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "omega", _reduce(self.omega))
        object.__setattr__(self, "phis", tuple(_reduce(p) for p in self.phis))

    @classmethod
    def uniform(cls, phase: float, m: int) -> "PhaseAssignment":
        return cls(phase, (phase,) * m)

    def swapped(self, i: int = 0, j: int = 1) -> "PhaseAssignment":
        phis = list(self.phis)
        phis[i], phis[j] = phis[j], phis[i]
        return PhaseAssignment(self.omega, tuple(phis))


def _check_phases(shape: RegisterShape, phases: PhaseAssignment):
    if len(phases.phis) != shape.m:
        raise ContractError(f"{len(phases.phis)} oracle phases for m={shape.m} solutions")


@dataclass(frozen=True)
class ReducedState:
    """Amplitude ``a`` on the non-solution superposition plus the solution
    amplitudes ``betas``."""

    a: complex
    betas: np.ndarray

    def vector(self) -> np.ndarray:
        return np.concatenate(([self.a], self.betas)).astype(complex)

    @classmethod
    def from_vector(cls, v: np.ndarray) -> "ReducedState":
        return cls(complex(v[0]), np.array(v[1:], dtype=complex))

    def norm_defect(self) -> float:
        return abs(abs(self.a) ** 2 + float(np.sum(np.abs(self.betas) ** 2)) - 1.0)

    def solution_probabilities(self) -> np.ndarray:
        return np.abs(self.betas) ** 2


@dataclass(frozen=True)
class GroverMatrix:
    entries: np.ndarray

    def unitarity_defect(self) -> float:
        g = self.entries
        return float(np.max(np.abs(g.conj().T @ g - np.eye(g.shape[0]))))


@dataclass(frozen=True)
class RunTrace:
    """Success probability after each iteration, t = 0 .. len(probs) - 1."""

    shape: RegisterShape
    phases: PhaseAssignment
    probs: np.ndarray
    per_solution: np.ndarray = field(repr=False)

    def __post_init__(self):
        for arr in (self.probs, self.per_solution):
            arr.setflags(write=False)

    @property
    def t_max(self) -> int:
        return len(self.probs) - 1


def initial_state(shape: RegisterShape) -> ReducedState:
    shape = _as_shape(shape)
    a = math.sqrt((shape.n - shape.m) / shape.n)
    return ReducedState(complex(a), np.full(shape.m, 1.0 / math.sqrt(shape.n), dtype=complex))


def grover_matrix(shape: RegisterShape, phases: PhaseAssignment) -> GroverMatrix:
    """One iteration (oracle then generalised Householder diffusion) in the
    reduced basis ``{|A>, |m_0>, ..., |m_{M-1}>}``."""
    shape = _as_shape(shape)
    _check_phases(shape, phases)
    n, m = shape.n, shape.m
    e = np.exp(1j * np.asarray(phases.phis))
    c = 1.0 - np.exp(1j * phases.omega)
    r = math.sqrt(n - m) / n
    g = np.empty((m + 1, m + 1), dtype=complex)
    g[0, 0] = (m + np.exp(1j * phases.omega) * (n - m)) / n
    g[0, 1:] = -r * c * e
    g[1:, 0] = -r * c
    g[1:, 1:] = -(c / n) * e[None, :]
    g[1:, 1:] += np.diag(e)
    return GroverMatrix(g)


def apply_iteration(state: ReducedState, g: GroverMatrix) -> ReducedState:
    v = state.vector()
    if g.entries.shape != (v.size, v.size):
        raise ContractError(f"matrix {g.entries.shape} vs state of size {v.size}")
    return ReducedState.from_vector(g.entries @ v)


def recursion_step(state: ReducedState, shape: RegisterShape, phases: PhaseAssignment) -> ReducedState:
    """Same update as :func:`apply_iteration`, written amplitude by amplitude
    on the per-basis-state non-solution amplitude ``alpha = a / sqrt(n - m)``."""
    shape = _as_shape(shape)
    _check_phases(shape, phases)
    if len(state.betas) != shape.m:
        raise ContractError(f"state has {len(state.betas)} solution amplitudes, m={shape.m}")
    n, m = shape.n, shape.m
    c = 1.0 - np.exp(1j * phases.omega)
    alpha = state.a / math.sqrt(n - m)
    marked = sum(np.exp(1j * p) * b for p, b in zip(phases.phis, state.betas))
    alpha_next = alpha * (m + np.exp(1j * phases.omega) * (n - m)) / n - c * marked / n
    betas_next = np.array(
        [
            b * np.exp(1j * p) - alpha * c * (n - m) / n - c * marked / n
            for p, b in zip(phases.phis, state.betas)
        ],
        dtype=complex,
    )
    return ReducedState(complex(alpha_next * math.sqrt(n - m)), betas_next)


def success_probability(state: ReducedState) -> float:
    return float(np.sum(np.abs(state.betas) ** 2))


def run_trace(shape: RegisterShape, phases: PhaseAssignment, t_max: int) -> RunTrace:
    shape = _as_shape(shape)
    if t_max < 0:
        raise ContractError(f"t_max must be >= 0, got {t_max}")
    g = grover_matrix(shape, phases).entries
    v = initial_state(shape).vector()
    per = np.empty((t_max + 1, shape.m))
    per[0] = np.abs(v[1:]) ** 2
    for t in range(1, t_max + 1):
        v = g @ v
        per[t] = np.abs(v[1:]) ** 2
    return RunTrace(shape, phases, per.sum(axis=1), per)


def batch_probabilities(shape: RegisterShape, omega: float, phis: np.ndarray, t_max: int) -> np.ndarray:
    """Total success probabilities for many oracle-phase rows at once.

    ``phis`` has shape ``(k, m)``; returns ``(k, t_max + 1)``. Each row equals
    ``run_trace(...).probs`` for that phase assignment.
    """
    shape = _as_shape(shape)
    phis = np.mod(np.atleast_2d(np.asarray(phis, dtype=float)), TWO_PI)
    k, m = phis.shape
    if m != shape.m:
        raise ContractError(f"{m} phases per row for m={shape.m}")
    n = shape.n
    eo = np.exp(1j * _reduce(omega))
    c = 1.0 - eo
    e = np.exp(1j * phis)
    r = math.sqrt(n - m) / n
    g = np.empty((k, m + 1, m + 1), dtype=complex)
    g[:, 0, 0] = (m + eo * (n - m)) / n
    g[:, 0, 1:] = -r * c * e
    g[:, 1:, 0] = -r * c
    g[:, 1:, 1:] = -(c / n) * e[:, None, :]
    idx = np.arange(m)
    g[:, 1 + idx, 1 + idx] += e
    v = np.broadcast_to(initial_state(shape).vector(), (k, m + 1)).copy()
    out = np.empty((k, t_max + 1))
    out[:, 0] = np.sum(np.abs(v[:, 1:]) ** 2, axis=1)
    for t in range(1, t_max + 1):
        v = np.einsum("kij,kj->ki", g, v)
        out[:, t] = np.sum(np.abs(v[:, 1:]) ** 2, axis=1)
    return out


def full_basis_trace(
    shape: RegisterShape,
    solution_indices: Sequence[int],
    phases: PhaseAssignment,
    t_max: int,
) -> RunTrace:
    """Brute-force reference in the full n-dimensional register.

    The oracle is the product of single-solution reflections and the diffusion
    is ``I - (1 - e^{i omega}) |psi0><psi0|`` applied to the whole state.
    """
    shape = _as_shape(shape)
    n = shape.n
    if n > FULL_BASIS_MAX_N:
        raise ContractError(f"full-basis reference is capped at n={FULL_BASIS_MAX_N}, got {n}")
    _check_phases(shape, phases)
    idx = [int(i) for i in solution_indices]
    if len(idx) != shape.m or len(set(idx)) != shape.m or any(not 0 <= i < n for i in idx):
        raise ContractError(f"need {shape.m} distinct solution indices in [0, {n}), got {idx}")

    oracle = np.ones(n, dtype=complex)
    for i, phi in zip(idx, phases.phis):
        reflection = np.ones(n, dtype=complex)
        reflection[i] -= 1.0 - np.exp(1j * phi)
        oracle = oracle * reflection
    psi0 = np.full(n, 1.0 / math.sqrt(n), dtype=complex)
    c = 1.0 - np.exp(1j * phases.omega)

    psi = psi0.copy()
    per = np.empty((t_max + 1, shape.m))
    per[0] = np.abs(psi[idx]) ** 2
    for t in range(1, t_max + 1):
        psi = oracle * psi
        psi = psi - c * psi0 * np.vdot(psi0, psi)
        per[t] = np.abs(psi[idx]) ** 2
    return RunTrace(shape, phases, per.sum(axis=1), per)


def peak_probability(trace: RunTrace) -> tuple[float, int]:
    """Largest success probability on the trace and the first t reaching it."""
    if len(trace.probs) == 0:
        raise ContractError("empty trace")
    t = int(peak_indices(trace.probs[None, :])[0])
    return float(trace.probs[t]), t


def peak_indices(probs: np.ndarray) -> np.ndarray:
    """Row-wise first index of the maximum of a ``(k, T + 1)`` array.

    Values within a few ulps of the row maximum count as ties, so that a
    mathematically constant trace (omega = 0) peaks at t = 0.
    """
    best = np.max(probs, axis=1, keepdims=True)
    return np.argmax(probs >= best - _TIE_ULPS * np.spacing(best), axis=1)
