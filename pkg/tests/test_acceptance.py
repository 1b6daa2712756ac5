"""Acceptance suite: every criterion runs at its stated tolerance and
reports one PASS/FAIL line in the terminal summary (see conftest).

Scenario runs use the dimensionless units of the runner: the enhanced
coupling (or the squeezing strength) is the frequency unit, and the
quoted experimental rates enter as multiples of the bare coupling g
scaled by 1/|alpha| (or by the inverse squeezing enhancement).
"""

import math
import time

import numpy as np
import pytest

from conftest import record_criterion
from oracles import damped_qubit_exact, euler_mean_field
from spinphonon.dynamics import (EvolutionSpec, LindbladTerm, evolve_master,
                                 evolve_pure)
from spinphonon.hilbert import (DensityMatrix, HilbertSpace,
                                basis_product_state, boson, embed, qubit,
                                qubit_ops, tensor_density, thermal_state)
from spinphonon.models import (ModelParams, build_H_displaced_classical_pump,
                               build_H_squeeze_eff, collective_mode_ops,
                               steady_state_amplitudes)
from spinphonon.observables import d1_sq_lossless
from spinphonon.runner import build_config, run_scenario, run_sweep

LOSSLESS = {"gamma2_over_g": 0, "dephasing_over_g": 0, "n_bath": 0,
            "n_init": 0}
DISSIPATIVE = {"gamma2_over_g": 5, "dephasing_over_g": 50, "n_bath": 20}


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def lossless_exchange():
    cfg = build_config("entangle", None, dict(
        LOSSLESS, n_max=20, dt=1e-3, t_final=math.pi, record_every=2,
        positivity_every=200))
    return timed(run_scenario, "entangle", cfg)


def test_c01_analytic_jc_negativity(lossless_exchange):
    result, runtime = lossless_exchange
    traj = result.trajectory
    dt_eff = traj.meta["dt_eff"]
    expected = np.abs(np.sin(2.0 * traj.times)) / 2.0
    neg = traj.records["negativity"]
    max_err = float(np.max(np.abs(neg - expected)))
    imax = int(np.argmax(neg))
    peak = float(neg[imax])
    t_peak = float(traj.times[imax])
    ok = (max_err <= 1e-6 and abs(peak - 0.5) <= 1e-6
          and abs(t_peak - math.pi / 4) <= 2 * dt_eff and runtime < 5.0)
    record_criterion(
        1, "lossless negativity follows |sin(2 g|a| t)|/2", ok,
        f"max_err={max_err:.2e} peak={peak:.7f} t={t_peak:.4f} "
        f"runtime={runtime:.2f}s")
    assert max_err <= 1e-6
    assert abs(peak - 0.5) <= 1e-6
    assert abs(t_peak - math.pi / 4) <= 2 * dt_eff
    assert runtime < 5.0


def test_c02_lossless_state_transfer(lossless_exchange):
    result, runtime = lossless_exchange
    traj = result.trajectory
    idx = int(np.argmin(np.abs(traj.times - math.pi / 2)))
    assert abs(traj.times[idx] - math.pi / 2) < 1e-12  # exact grid point
    fid = float(traj.records["fidelity"][idx])
    ok = fid >= 1.0 - 1e-6 and runtime < 5.0
    record_criterion(2, "lossless transfer fidelity at tau = pi/2", ok,
                     f"F={fid:.9f} runtime={runtime:.2f}s")
    assert fid >= 1.0 - 1e-6
    assert runtime < 5.0


def test_c03_steady_state_amplitude():
    p = ModelParams(Omega1=2 * math.pi * 1.25e6, gamma1=2 * math.pi * 25.0)
    ss = steady_state_amplitudes(p)
    exact_ok = abs(abs(ss.alpha) - 50000.0) < 1e-9
    ode = euler_mean_field(p.Omega1, p.gamma1)
    ode_rel = abs(ode - ss.alpha) / abs(ss.alpha)
    ok = exact_ok and ode_rel <= 1e-6
    record_criterion(3, "steady amplitude |alpha| = 50000, ODE oracle agrees",
                     ok, f"|alpha|={abs(ss.alpha):.6f} ode_rel={ode_rel:.2e}")
    assert exact_ok
    assert ode_rel <= 1e-6


@pytest.fixture(scope="module")
def thermal_family():
    results = {}
    t0 = time.perf_counter()
    for n_init in (0.0, 0.05, 0.1, 0.2):
        cfg = build_config("entangle", None, dict(
            DISSIPATIVE, n_init=n_init, n_max=20, dt=1e-3, t_final=math.pi,
            record_every=4, positivity_every=50))
        results[n_init] = run_scenario("entangle", cfg)
    return results, time.perf_counter() - t0


def test_c04_thermal_degradation_monotonic(thermal_family):
    results, runtime = thermal_family
    n_values = sorted(results)
    max_negs = [results[n].summary["max_negativity"] for n in n_values]
    fidelities = []
    for n in n_values:
        traj = results[n].trajectory
        idx = int(np.argmin(np.abs(traj.times - math.pi / 2)))
        fidelities.append(float(traj.records["fidelity"][idx]))
    neg_decreasing = all(a > b for a, b in zip(max_negs, max_negs[1:]))
    fid_decreasing = all(a > b for a, b in zip(fidelities, fidelities[1:]))
    ok = neg_decreasing and fid_decreasing and runtime < 120.0
    record_criterion(
        4, "max negativity and transfer fidelity strictly decrease with "
           "initial occupation", ok,
        f"neg={['%.4f' % v for v in max_negs]} "
        f"fid={['%.4f' % v for v in fidelities]} runtime={runtime:.0f}s")
    assert neg_decreasing, max_negs
    assert fid_decreasing, fidelities
    assert runtime < 120.0


@pytest.fixture(scope="module")
def ensemble_family():
    cfg = build_config("ensemble", None, dict(
        N_list=[1, 2, 3, 4], dt=1e-3, n_max=8, record_every=5,
        positivity_every=10))
    return timed(run_scenario, "ensemble", cfg)


def test_c05_ensemble_sqrt_n_law(ensemble_family):
    result, runtime = ensemble_family
    points = result.summary["points"]
    period_errs = [abs(pt["rabi_period"] - pt["rabi_period_expected"])
                   / pt["rabi_period_expected"] for pt in points]
    fidelities = [pt["fidelity_transfer"] for pt in points]
    periods_ok = all(err <= 0.01 for err in period_errs)
    monotone_ok = all(b >= a for a, b in zip(fidelities, fidelities[1:]))
    ok = periods_ok and monotone_ok and runtime < 300.0
    record_criterion(
        5, "collective oscillation period scales as 1/sqrt(N); dissipative "
           "transfer fidelity non-decreasing", ok,
        f"period_err={['%.2e' % e for e in period_errs]} "
        f"fid={['%.5f' % f for f in fidelities]} runtime={runtime:.0f}s")
    assert periods_ok, period_errs
    assert monotone_ok, fidelities
    assert runtime < 300.0


@pytest.fixture(scope="module")
def lossless_squeeze():
    n_max = 12
    space = HilbertSpace([boson(n_max, "b"), boson(n_max, "c")])
    p = ModelParams(Omega1=1.0, gamma1=1.0, g=1.0, omega=1.0, gamma2=0.0,
                    gamma3=0.0, dephasing_rate=0.0,
                    n_bath=0.0).with_derived_alpha()
    h = build_H_squeeze_eff(p, space)
    vac = thermal_state(0.0, n_max).matrix
    rho0 = tensor_density(space, [vac, vac])
    deltas = {"quarter": math.pi / 4, "half": math.pi / 2,
              "three_quarter": 3 * math.pi / 4}
    observables = {}
    for name, delta in deltas.items():
        ops = collective_mode_ops(space, delta)
        observables[name] = np.ascontiguousarray(ops.d1 @ ops.d1)
    spec = EvolutionSpec(h, [], t_final=0.75, dt=1e-3, record_every=1,
                         positivity_every=100, observables=observables)
    (traj, elapsed) = timed(evolve_master, rho0, spec)
    return traj, deltas, elapsed


def test_c06_squeezing_analytic_curve(lossless_squeeze):
    traj, deltas, runtime = lossless_squeeze
    xi = traj.times
    errs = {}
    for name, delta in deltas.items():
        measured = np.real(traj.records[name])
        expected = np.array([d1_sq_lossless(x, delta) for x in xi])
        errs[name] = float(np.max(np.abs(measured - expected)))
    half = np.real(traj.records["half"])
    imin = int(np.argmin(half))
    min_val, xi_min = float(half[imin]), float(xi[imin])
    dt_eff = traj.meta["dt_eff"]
    curve_ok = all(err <= 1e-4 for err in errs.values())
    min_ok = (abs(min_val - 0.125) <= 1e-3
              and abs(xi_min - 0.5) <= 2 * dt_eff)
    ok = curve_ok and min_ok and runtime < 120.0
    record_criterion(
        6, "lossless <d1^2>(xi) matches the closed-form curve; minimum 1/8 "
           "at xi = 1/2", ok,
        f"errs={['%.1e' % errs[k] for k in sorted(errs)]} "
        f"min={min_val:.6f}@{xi_min:.3f} runtime={runtime:.0f}s")
    assert curve_ok, errs
    assert min_ok, (min_val, xi_min)
    assert runtime < 120.0


def _slope_sweep(gamma_over_g):
    cfg = build_config("sweep", {
        "mode": "squeeze", "axis": "n_init",
        "values": [0.0, 0.1, 0.2, 0.3],
        "gamma2_over_g": gamma_over_g, "gamma3_over_g": gamma_over_g,
        "omega_over_g": 1e6, "n_max": "auto", "t_final": 0.6, "dt": 1e-3,
        "record_every": 2, "positivity_every": 100}, None)
    return run_sweep(cfg)


@pytest.fixture(scope="module")
def slope_sweeps():
    t0 = time.perf_counter()
    table5 = _slope_sweep(5)
    table50 = _slope_sweep(50)
    return table5, table50, time.perf_counter() - t0


def test_c07_minimum_variance_slope(slope_sweeps):
    table5, table50, runtime = slope_sweeps
    k5 = table5.summary["slope_k"]
    k50 = table50.summary["slope_k"]
    slope_ok = abs(k5 - 0.25) <= 0.05
    invariant_ok = abs(k50 - k5) <= 0.05
    ok = slope_ok and invariant_ok and runtime < 600.0
    record_criterion(
        7, "min <d1^2> grows with slope ~0.25 in the thermal occupation, "
           "independent of damping", ok,
        f"k(5g)={k5:.4f} k(50g)={k50:.4f} runtime={runtime:.0f}s")
    assert slope_ok, k5
    assert invariant_ok, (k5, k50)
    assert runtime < 600.0


def test_c08_squeezing_extinction():
    cfg = build_config("squeeze", None, dict(
        gamma2_over_g=5, gamma3_over_g=5, n_init=0.5, n_max="auto",
        t_final=0.55, dt=1e-3, record_every=2, positivity_every=100))
    result, runtime = timed(run_scenario, "squeeze", cfg)
    min_val = result.summary["min_d1_sq"]
    ok = 0.24 <= min_val <= 0.27
    record_criterion(
        8, "squeezing vanishes at initial occupation 0.5", ok,
        f"min_d1sq={min_val:.5f} runtime={runtime:.0f}s")
    assert 0.24 <= min_val <= 0.27, min_val


def test_c09_rwa_validation_scaled():
    """Displaced-frame dynamics versus the exchange reduction at scaled
    parameters (detuning 100x the effective coupling), pump mode held at
    its classical amplitude, beta at its exact steady value."""
    omega_z = delta = 100.0  # in units of g|alpha|
    alpha_abs = 2.0
    g = 1.0 / alpha_abs
    p = ModelParams(omega_z=omega_z, delta=delta, Omega1=1e-8 * alpha_abs,
                    gamma1=1e-8, Omega2=10.0, gamma2=0.5, g=g, gamma3=0.0,
                    dephasing_rate=0.0, n_bath=0.0, alpha=-1j * alpha_abs)
    space = HilbertSpace([qubit(), boson(6, "b")])
    sz = embed(qubit_ops().sigma_z, 0, space)
    from spinphonon.hilbert import annihilation
    b = embed(annihilation(6), 1, space)
    h_free = 0.5 * omega_z * sz + delta * (b.conj().T @ b)
    h_full = h_free + build_H_displaced_classical_pump(p, space)
    psi0 = basis_product_state(space, ["e", 0])
    pe_op = embed(np.diag([1.0, 0.0]).astype(complex), 0, space)
    (traj, runtime) = timed(
        evolve_pure, psi0, h_full, 2 * math.pi, 1e-4, 50, {"pe": pe_op})
    populations = np.real(traj.records["pe"])
    reference = np.cos(traj.times) ** 2  # exchange-reduction populations
    rms = float(np.sqrt(np.mean((populations - reference) ** 2)))
    ok = rms <= 0.02
    record_criterion(
        9, "displaced-frame populations match the exchange reduction to "
           "2% RMS at scaled detuning", ok,
        f"rms={rms:.4f} runtime={runtime:.0f}s")
    assert rms <= 0.02, rms


def test_c10_integrator_structure(lossless_exchange, thermal_family,
                                  lossless_squeeze):
    # structural guarantees across the runs above
    trajs = [lossless_exchange[0].trajectory]
    trajs += [res.trajectory for res in thermal_family[0].values()]
    trajs.append(lossless_squeeze[0])
    trace_ok = all(t.meta["max_trace_dev"] <= 1e-6 for t in trajs)
    herm_ok = all(t.meta["hermiticity_defect"] <= 1e-12 for t in trajs)
    psd_ok = all(t.meta["positivity_ok"] for t in trajs)

    # RK4 order on the damped-qubit analytic case
    omega0, rate = 6.0, 0.8
    space = HilbertSpace([qubit()])
    h = 0.5 * omega0 * qubit_ops().sigma_z
    plus = np.full((2, 2), 0.5, dtype=complex)
    term = LindbladTerm(qubit_ops().sigma_minus, rate)
    errors = []
    for dt in (0.02, 0.01):
        spec = EvolutionSpec(h, [term], t_final=1.0, dt=dt,
                             record_every=10 ** 9)
        traj = evolve_master(DensityMatrix(space, plus), spec)
        exact = damped_qubit_exact(omega0, rate, 1.0, plus)
        errors.append(np.max(np.abs(traj.final_state.matrix - exact)))
    ratio = float(errors[0] / errors[1])
    ratio_ok = 12.0 <= ratio <= 20.0
    ok = trace_ok and herm_ok and psd_ok and ratio_ok
    record_criterion(
        10, "trace/Hermiticity/positivity bounds hold; RK4 dt-halving "
            "factor in [12, 20]", ok,
        f"ratio={ratio:.1f} trace_ok={trace_ok} herm_ok={herm_ok} "
        f"psd_ok={psd_ok}")
    assert trace_ok
    assert herm_ok
    assert psd_ok
    assert ratio_ok, ratio
