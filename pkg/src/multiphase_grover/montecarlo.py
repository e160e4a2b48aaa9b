"""Random oracle-phase pairs, acceptance filtering and the upper stripe."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import DomainError, RegisterShape, _as_shape, required_iterations
from .simulator import PhaseAssignment, batch_probabilities, peak_indices, peak_probability, run_trace

TWO_PI = 2.0 * math.pi
# pairs per evaluation batch; batching never changes the output
CHUNK = 8192
# peaks this close to the maximum count as the same height for t_ref
REFERENCE_PEAK_TOL = 1e-9


@dataclass(frozen=True)
class AcceptanceCriteria:
    p_threshold: float = 0.92
    extra_iterations: int = 1
    scan_horizon_factor: int = 4

    def __post_init__(self):
        if not 0.0 < self.p_threshold < 1.0:
            raise ValueError(f"p_threshold must lie in (0, 1), got {self.p_threshold}")
        if self.extra_iterations < 0:
            raise ValueError(f"extra_iterations must be >= 0, got {self.extra_iterations}")
        if self.scan_horizon_factor < 1:
            raise ValueError(f"scan_horizon_factor must be >= 1, got {self.scan_horizon_factor}")


@dataclass(frozen=True)
class SamplePoint:
    phi0: float
    phi1: float
    p_max: float
    t_at_max: int
    accepted: bool


def sample_pairs(count: int, seed: int, start: int = 0) -> np.ndarray:
    """Uniform pairs on [0, 2pi)^2 as a ``(count, 2)`` array.

    Pair ``i`` is a pure function of ``(seed, i)``: it is built from the
    Philox counter block holding uint64 words ``2i`` and ``2i + 1``, so any
    slice ``[start, start + count)`` equals the same slice of a single long
    draw.
    """
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    if count == 0:
        return np.empty((0, 2))
    # a Philox block holds 4 words = 2 pairs; start on the containing block
    first_block, offset = divmod(start, 2)
    bitgen = np.random.Philox(key=int(seed))
    bitgen.advance(first_block)
    words = np.random.Generator(bitgen).random(2 * (count + offset))
    return (words.reshape(-1, 2)[offset:] * TWO_PI).copy()


def reference_iteration(shape: RegisterShape, omega: float, criteria: AcceptanceCriteria = AcceptanceCriteria()) -> int:
    """Iteration at which the all-phases-equal-to-omega run peaks.

    The window searched is ``scan_horizon_factor`` times the exact iteration
    count, which always contains the first deterministic peak.
    """
    shape = _as_shape(shape)
    horizon = criteria.scan_horizon_factor * required_iterations(shape)
    probs = run_trace(shape, PhaseAssignment.uniform(omega, shape.m), horizon).probs
    # a phase-matched run hits P = 1 again on later revivals, equal to the
    # first peak up to rounding; the first one is the reference
    return int(np.argmax(probs >= probs.max() - REFERENCE_PEAK_TOL))


def _check_pair_shape(shape: RegisterShape):
    if shape.m != 2:
        raise DomainError(f"phase-pair sampling needs m=2, got m={shape.m}")


def _judge(probs: np.ndarray, t_ref: int, criteria: AcceptanceCriteria):
    t_at = peak_indices(probs)
    p_max = probs[np.arange(len(probs)), t_at]
    accepted = (p_max > criteria.p_threshold) & (t_at <= t_ref + criteria.extra_iterations)
    return p_max, t_at, accepted


def evaluate_pair(
    shape: RegisterShape,
    omega: float,
    phi0: float,
    phi1: float,
    criteria: AcceptanceCriteria = AcceptanceCriteria(),
    t_ref: int | None = None,
) -> SamplePoint:
    shape = _as_shape(shape)
    _check_pair_shape(shape)
    if t_ref is None:
        t_ref = reference_iteration(shape, omega, criteria)
    trace = run_trace(shape, PhaseAssignment(omega, (phi0, phi1)), criteria.scan_horizon_factor * t_ref)
    p_max, t_at = peak_probability(trace)
    ok = p_max > criteria.p_threshold and t_at <= t_ref + criteria.extra_iterations
    return SamplePoint(float(phi0), float(phi1), p_max, t_at, bool(ok))


def run_campaign(
    shape: RegisterShape,
    omega: float,
    count: int,
    seed: int,
    criteria: AcceptanceCriteria = AcceptanceCriteria(),
) -> list[SamplePoint]:
    """Evaluate ``count`` seeded random phase pairs, in sample-index order."""
    shape = _as_shape(shape)
    _check_pair_shape(shape)
    if count <= 0:
        return []
    t_ref = reference_iteration(shape, omega, criteria)
    horizon = criteria.scan_horizon_factor * t_ref
    points: list[SamplePoint] = []
    for start in range(0, count, CHUNK):
        pairs = sample_pairs(min(CHUNK, count - start), seed, start)
        probs = batch_probabilities(shape, omega, pairs, horizon)
        p_max, t_at, accepted = _judge(probs, t_ref, criteria)
        points.extend(
            SamplePoint(float(a), float(b), float(p), int(t), bool(ok))
            for (a, b), p, t, ok in zip(pairs, p_max, t_at, accepted)
        )
    return points


def upper_stripe(points: Iterable[SamplePoint]) -> list[SamplePoint]:
    """Accepted points below the diagonal (``phi0 > phi1``)."""
    return [p for p in points if p.accepted and p.phi0 > p.phi1]


def stripe_spread(stripe: Sequence[tuple[float, float]], fit) -> float:
    """Mean Euclidean distance from stripe points to the fitted curve quadrant."""
    from .fitting import superellipse_point

    if len(stripe) == 0:
        return float("nan")
    z = np.linspace(0.0, math.pi / 2, 4001)
    curve = np.column_stack(superellipse_point(fit, z))
    pts = np.asarray(stripe, dtype=float)
    d = np.empty(len(pts))
    for lo in range(0, len(pts), 512):
        blk = pts[lo : lo + 512]
        d[lo : lo + 512] = np.min(np.linalg.norm(blk[:, None, :] - curve[None, :, :], axis=2), axis=1)
    return float(d.mean())
