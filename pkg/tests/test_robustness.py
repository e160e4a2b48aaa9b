import math

import numpy as np
import pytest

from multiphase_grover.core import RegisterShape, boundary_registers, optimal_phase, zmax_bracket
from multiphase_grover.fitting import (
    PLATEAU_WIDTH_LAW,
    InsufficientDataError,
    SuperellipseFit,
    log_law,
    superellipse_point,
)
from multiphase_grover.robustness import (
    RobustnessRecord,
    RobustnessSample,
    ScanFailure,
    ScanSettings,
    canonical_z,
    find_zmax,
    kmax_law,
    normalize_omega,
    optimal_phase_pair,
    register_sweep,
    robustness_record,
    scan_z,
    z_grid,
)
from multiphase_grover.simulator import PhaseAssignment, run_trace

from conftest import SWEEP_N

STEP = 2 * math.pi / (629 - 1)


def _sample(z, b, k, flagged=False):
    return RobustnessSample(z, 0.0, 0.0, b, k, flagged=flagged)


# -- unit behaviour on synthetic samples ------------------------------------


def test_normalize_bounds_and_unit_peak():
    s = normalize_omega([_sample(0.1, 0.5, 2.0), _sample(0.2, 1.0, 4.0), _sample(0.3, 0.9, 1.0)])
    assert [x.omega_q for x in s] == pytest.approx([0.25, 1.0, 0.225])


def test_normalize_ignores_flagged():
    s = normalize_omega([_sample(0.1, 5.0, 50.0, flagged=True), _sample(0.2, 1.0, 4.0)])
    assert s[0].omega_q == 0.0 and s[1].omega_q == 1.0
    with pytest.raises(ScanFailure):
        normalize_omega([_sample(0.1, 1.0, 1.0, flagged=True)])


def test_find_zmax_single_spike_and_ties():
    zs = np.linspace(0.5, 1.5, 11)
    samples = [RobustnessSample(z, 0, 0, 1, 1, omega_q=0.1) for z in zs]
    samples[7] = RobustnessSample(zs[7], 0, 0, 1, 1, omega_q=0.9)
    assert find_zmax(samples, canonical=False) == (pytest.approx(zs[7]), 0.9)
    ties = [RobustnessSample(z, 0, 0, 1, 1, omega_q=0.5) for z in zs[::-1]]
    assert find_zmax(ties, canonical=False)[0] == pytest.approx(zs[0])
    with pytest.raises(ScanFailure):
        find_zmax([])


@pytest.mark.parametrize("z", [0.3, 1.2, math.pi - 0.3, math.pi + 0.7, 2 * math.pi - 0.1])
def test_canonical_z_is_same_point_on_curve(z):
    c = canonical_z(z)
    assert math.pi / 2 <= c <= math.pi
    curve = SuperellipseFit.through(2.3, 11.0)
    assert superellipse_point(curve, c) == pytest.approx(superellipse_point(curve, z), abs=1e-12)


def test_optimal_phase_pair_degenerate_endpoint():
    phi = optimal_phase(RegisterShape(200, 2))
    assert optimal_phase_pair(200, 0.0) == pytest.approx((phi, 0.0), abs=1e-12)


def test_scan_rejects_small_grid():
    with pytest.raises(ValueError):
        scan_z(200, ScanSettings(z_grid_size=32))


def test_sweep_rejects_tiny_register():
    with pytest.raises(ValueError):
        register_sweep([3])


def test_kmax_law_round_trip_and_insufficient():
    nan = float("nan")
    recs = [
        RobustnessRecord(n, nan, nan, nan, nan, float(log_law(PLATEAU_WIDTH_LAW, n)), None)
        for n in range(50, 800, 50)
    ]
    fit = kmax_law(recs)
    assert np.allclose(fit.coeffs, PLATEAU_WIDTH_LAW, rtol=1e-6)
    with pytest.raises(InsufficientDataError):
        kmax_law(recs[:2])


def test_failed_n_is_recorded_and_sweep_continues(monkeypatch):
    import multiphase_grover.robustness as rb

    real = rb.robustness_record

    def flaky(n, settings=ScanSettings()):
        if n == 31:
            raise ScanFailure("boom")
        return real(n, settings)

    monkeypatch.setattr(rb, "robustness_record", flaky)
    recs = register_sweep([31, 40], ScanSettings(z_grid_size=65))
    assert [r.n for r in recs] == [31, 40]
    assert math.isnan(recs[0].z_max) and "boom" in recs[0].flags[0]
    assert np.isfinite(recs[1].z_max)


# -- full scans -------------------------------------------------------------


def test_scan_endpoint_is_single_solution_like(record_200):
    _, samples = record_200
    assert samples[0].z == 0.0 and samples[0].phi1 == 0.0
    assert len(samples) == 629 and np.allclose([s.z for s in samples], z_grid(629))


@pytest.mark.parametrize("fixture", ["record_200", "record_325"])
def test_scan_profile_properties(fixture, request):
    record, samples = request.getfixturevalue(fixture)
    q = np.array([s.omega_q for s in samples])
    assert np.all((q >= 0) & (q <= 1))
    assert record.omega_max == pytest.approx(q.max())
    i = int(np.argmax(q))
    assert 0 < i < len(q) - 1
    assert q[i] > q[0] and q[i] > q[-1]
    # high plateau at the optimum, and the plateau width peaks there too
    b = np.array([s.b for s in samples])
    k = np.array([s.k for s in samples])
    assert b[i] >= 0.95 and b[i] >= np.median(b)
    assert k[i] >= 0.95 * k.max()


@pytest.mark.parametrize("fixture", ["record_200", "record_325"])
def test_record_phases_on_curve_and_near_phi_max(fixture, request):
    record, _ = request.getfixturevalue(fixture)
    phi = optimal_phase(RegisterShape(record.n, 2))
    curve = SuperellipseFit.through(phi, record.p_phi)
    assert (record.phi0_max, record.phi1_max) == pytest.approx(superellipse_point(curve, record.z_max), abs=1e-12)
    assert phi < record.phi0_max < 2 * math.pi and 0 < record.phi1_max < phi
    assert abs(record.phi0_max - phi) < 0.5 and abs(record.phi1_max - phi) < 0.5


@pytest.mark.parametrize("fixture", ["record_200", "record_325"])
def test_optimal_pair_swap_gives_same_trace(fixture, request):
    record, _ = request.getfixturevalue(fixture)
    shape = RegisterShape(record.n, 2)
    omega = optimal_phase(shape)
    a = run_trace(shape, PhaseAssignment(omega, (record.phi0_max, record.phi1_max)), 40).probs
    b = run_trace(shape, PhaseAssignment(omega, (record.phi1_max, record.phi0_max)), 40).probs
    assert np.max(np.abs(a - b)) <= 1e-12


@pytest.mark.parametrize("fixture", ["record_200", "record_325"])
def test_robust_pair_widens_plateau(fixture, request):
    record, _ = request.getfixturevalue(fixture)
    assert record.k_max_width > record.k_equal_phase


def test_record_325_near_phi_max(record_325):
    record, _ = record_325
    assert record.bracket == zmax_bracket(325, 2)
    assert abs(record.z_max - optimal_phase(RegisterShape(325, 2))) < 0.1


@pytest.mark.parametrize("n", [150, 200, 250, 325])
def test_zmax_inside_bracket(n, record_200, record_325):
    record = {200: record_200, 325: record_325}.get(n, None)
    record = record[0] if record else robustness_record(n)[0]
    br = record.bracket
    assert br.phi_minus - STEP <= record.z_max <= br.phi_plus + STEP


@pytest.mark.slow
@pytest.mark.parametrize("n", [100, 200, 325])
def test_grid_refinement_stability(n, record_200, record_325):
    coarse = {200: record_200, 325: record_325}.get(n)
    coarse = coarse[0] if coarse else robustness_record(n)[0]
    fine = robustness_record(n, ScanSettings(z_grid_size=2 * 628 + 1))[0]
    assert abs(fine.z_max - coarse.z_max) <= STEP + 1e-12


def test_halved_grid_stability(record_200):
    half = robustness_record(200, ScanSettings(z_grid_size=315))[0]
    assert abs(half.z_max - record_200[0].z_max) <= 2 * math.pi / 314 + 1e-12


# -- register sweep ---------------------------------------------------------


@pytest.mark.slow
def test_sweep_is_complete_and_clean(sweep_records):
    assert [r.n for r in sweep_records] == SWEEP_N
    assert all(np.isfinite(r.z_max) and np.isfinite(r.k_max_width) for r in sweep_records)
    assert not any(f.startswith("error") for r in sweep_records for f in r.flags)


@pytest.mark.slow
def test_sweep_kmax_nondecreasing_within_segments(sweep_records):
    jumps = set(boundary_registers(2, SWEEP_N[0], SWEEP_N[-1]))
    for a, b in zip(sweep_records, sweep_records[1:]):
        if not any(a.n <= v < b.n for v in jumps):
            assert b.k_max_width >= a.k_max_width, (a.n, b.n)


@pytest.mark.slow
def test_sweep_kmax_increasing_trend(sweep_records):
    by_n = {r.n: r.k_max_width for r in sweep_records}
    for lo, hi in [(110, 200), (200, 320), (320, 500), (500, 770)]:
        assert by_n[hi] > by_n[lo]


@pytest.mark.slow
def test_sweep_zmax_jumps_at_boundaries(sweep_records):
    """Upward z_max jumps happen exactly where phi_max jumps (n >= 35; the
    first step from n=20 is a small-register transient)."""
    recs = [r for r in sweep_records if r.n >= 35]
    jumps = set(boundary_registers(2, SWEEP_N[0], SWEEP_N[-1]))
    for a, b in zip(recs, recs[1:]):
        crossed = any(a.n <= v < b.n for v in jumps)
        assert (b.z_max > a.z_max) == crossed, (a.n, b.n, a.z_max, b.z_max)
        phi_reset = optimal_phase(RegisterShape(b.n, 2)) < optimal_phase(RegisterShape(a.n, 2))
        assert phi_reset == crossed
