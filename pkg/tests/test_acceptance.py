"""Acceptance criteria, each at its stated tolerance; one PASS/FAIL line per criterion."""
import time
from functools import lru_cache

import numpy as np
import pytest

from igrlab.dg1d import DgField, Mesh1D, project, sipg_solve
from igrlab.diagnostics import (
    conserved_totals, entropy_production_integrand, entropy_production_rate, spike_metric,
    window_deviation,
)
from igrlab.linwave import (
    acoustic_energy_rate_avg, acoustic_energy_rate_avg_quadrature, acoustic_initial_state,
    measure_phase_speed,
)
from igrlab.models import (
    ModelKind, ModelParams, PositivityError, constant_state, initial_condition_sod,
    recover_primitives,
)
from igrlab.opcheck import run_suite
from igrlab.quadrature import GAUSS_WEIGHTS
from igrlab.timestep import NumericalFailure, RunConfig, cfl_dt, model_operator, run, ssprk3_step

pytestmark = pytest.mark.slow

DEFAULT_TIMES = (0.0, 0.125, 0.25, 0.375, 0.5)


@lru_cache(maxsize=None)
def default_run(kind, n=512, t_end=0.5, times=DEFAULT_TIMES):
    """Default smoothed-Sod run; snapshots at ``times`` and the failure, if any."""
    mesh = Mesh1D(n)
    model = ModelParams.default_for(kind, mesh)
    snaps = {}
    start = time.perf_counter()
    error = None
    try:
        run(initial_condition_sod(mesh, model), model, RunConfig(t_end, output_times=times),
            on_output=lambda s, r: snaps.__setitem__(round(s.time, 9), s.copy()), diagnostics=False)
    except (PositivityError, NumericalFailure) as exc:
        error = exc
    return model, snaps, error, time.perf_counter() - start


def _drift(x, x0):
    return abs(x - x0) / max(abs(x0), 1.0)


# 1 -------------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["IGR", "HRE", "HIGR", "HIGRAblated"])
def test_criterion_1_conservation(kind, criterion):
    model, snaps, error, elapsed = default_run(kind)
    t0 = conserved_totals(snaps[0.0])
    worst = max(_drift(x, x0) for s in snaps.values() for x, x0 in zip(conserved_totals(s), t0))
    ok = error is None and worst < 1e-10 and elapsed < 60.0
    detail = f"{kind} max relative drift {worst:.2e} (< 1e-10), {elapsed:.1f} s (< 60 s)"
    if error is not None:
        detail += f"; run stopped: {type(error).__name__}: {error}"
    criterion(f"1 [{kind}]", ok, detail)
    assert ok, detail


# 2 -------------------------------------------------------------------------

@pytest.mark.parametrize("kind", [k.value for k in ModelKind])
def test_criterion_2_equilibrium_and_boost(kind, criterion):
    mesh = Mesh1D(16)
    model = ModelParams.default_for(kind, mesh)
    op = model_operator(model)
    worst = 0.0
    for u0 in (0.0, 0.75):
        s0 = constant_state(mesh, 1.3, u0, 2.0, model)
        s = s0
        dt = cfl_dt(s, model) / 3
        for _ in range(1000):
            s = ssprk3_step(s, dt, op)
        worst = max(worst, float(np.max(np.abs(s.q - s0.q)) / np.max(np.abs(s0.q))))
    ok = worst <= 1e-12
    criterion(f"2 [{kind}]", ok, f"max deviation after 1000 steps {worst:.2e} (<= 1e-12)")
    assert ok


# 3 -------------------------------------------------------------------------

def test_criterion_3_operator_suite(criterion):
    start = time.perf_counter()
    rows = run_suite(seed=0, n_max_principle=500, n_strain=10_000, n_1d=64, n_2d=16)
    elapsed = time.perf_counter() - start
    ok = all(r.passed for r in rows) and elapsed < 30.0
    detail = "; ".join(f"{r.name} {r.value:.2e}" for r in rows) + f"; {elapsed:.1f} s (< 30 s)"
    criterion("3", ok, detail)
    assert ok, detail


# 4 -------------------------------------------------------------------------

def test_criterion_4_dispersion(criterion):
    mesh = Mesh1D(256)
    k_max = 2 * np.pi * 4
    alpha = 1.0 / k_max**2  # alpha k^2 = 1 at the largest mode
    limits = {"HRE": 0.01, "HRENoCapillary": 0.01, "Euler": 0.005}
    start = time.perf_counter()
    errs = {}
    for kind, tol in limits.items():
        model = ModelParams(kind=kind, alpha=0.0 if kind == "Euler" else alpha)
        for mode in (1, 2, 4):
            k = 2 * np.pi * mode
            target = 1.0 / np.sqrt(1 + alpha * k**2) if kind == "HRENoCapillary" else 1.0
            c = measure_phase_speed(model, mode, amplitude=1e-6, mesh=mesh)
            errs[kind, mode] = abs(c - target) / target
    elapsed = time.perf_counter() - start
    ok = all(errs[k, m] < limits[k] for k, m in errs) and elapsed < 120.0
    detail = ", ".join(f"{k}@{m} {e:.1e}" for (k, m), e in errs.items()) + f"; {elapsed:.0f} s (< 120 s)"
    criterion("4", ok, detail)
    assert ok, detail


# 5 -------------------------------------------------------------------------

def test_criterion_5_acoustic_energy_average(criterion):
    worst = 0.0
    odd_exact = True
    for n in range(2, 9):
        a = acoustic_energy_rate_avg(n, 2.3, 1.1, 0.35)
        b = acoustic_energy_rate_avg_quadrature(n, 2.3, 1.1, 0.35)
        worst = max(worst, abs(a - b) / max(abs(b), 1.0))
        if n % 2:
            odd_exact &= a == 0.0
    ok = worst < 1e-10 and odd_exact
    criterion("5", ok, f"closed form vs quadrature {worst:.1e} (< 1e-10); odd n exactly zero: {odd_exact}")
    assert ok


# 6 -------------------------------------------------------------------------

SPIKE_WINDOW = (-0.02, 0.02)  # the two shocks meet at x = 0 (periodic) at t ~ 0.14


def test_criterion_6_spike_trend(criterion):
    spikes = {}
    pre = post = None
    for n in (250, 500, 1000):
        model, snaps, error, _ = default_run("IGR", n, 0.25, (0.1, 0.25))
        assert error is None
        spikes[n] = spike_metric(snaps[0.25], model, SPIKE_WINDOW)
        if n == 250:
            def devs(s):
                prim = recover_primitives(s, model)
                p = (model.gamma - 1) * s.rho.at_centers() * prim.eps.at_centers()
                return window_deviation(p, s.mesh, SPIKE_WINDOW), spike_metric(s, model, SPIKE_WINDOW, prim)
            pre, post = devs(snaps[0.1]), devs(snaps[0.25])
    monotone = spikes[250] > spikes[500] > spikes[1000]
    p_ok = post[0] < 3 * pre[0]
    eps_ok = post[1] > 10 * pre[1]
    ok = monotone and p_ok and eps_ok
    detail = (f"eps spike at t=0.25: N=250 {spikes[250]:.4f}, N=500 {spikes[500]:.4f}, N=1000 {spikes[1000]:.4f} "
              f"(strictly decreasing: {monotone}); N=250 pressure deviation {post[0]:.2e} vs 3x pre {3 * pre[0]:.2e} "
              f"({p_ok}); eps spike {post[1]:.2e} vs 10x pre {10 * pre[1]:.2e} ({eps_ok})")
    criterion("6", ok, detail)
    assert ok, detail


# 7 -------------------------------------------------------------------------

def test_criterion_7_entropy_production_signs(criterion):
    model, snaps, error, _ = default_run("HIGR")
    mismatches = 0
    for s in snaps.values():
        prim = recover_primitives(s, model)
        dens = entropy_production_integrand(s, model, prim)
        mismatches += int(np.sum(np.sign(dens) != -np.sign(prim.aux.q_u.at_quad())))
    zero = []
    for kind in ("Euler", "HRE"):
        m2, snaps2, _, _ = default_run(kind, 512, 0.125, (0.0, 0.125))
        zero += [entropy_production_rate(s, m2) for s in snaps2.values()]
    exact_zero = all(z == 0.0 for z in zero) and len(zero) == 4
    ok = error is None and mismatches == 0 and exact_zero
    criterion("7", ok, f"HIGR sign mismatches over {len(snaps)} snapshots: {mismatches}; "
                       f"Euler/HRE production exactly zero: {exact_zero}")
    assert ok


# 8 -------------------------------------------------------------------------

def shock_fronts(state, model, compressive_only):
    """Cell centres of max |rho_x| left and right of x = 0.5."""
    x = state.mesh.cell_centers
    grad = np.abs(state.rho.coeffs[:, 1]) * 2 / state.mesh.h
    if compressive_only:
        qu = recover_primitives(state, model).aux.q_u.at_centers()
        grad = np.where(qu < -0.1 * np.max(-qu), grad, -1.0)
    left, right = x < 0.5, x >= 0.5
    return x[left][np.argmax(grad[left])], x[right][np.argmax(grad[right])]


def test_criterion_8_igr_vs_higr_fronts(criterion):
    results = {kind: default_run(kind) for kind in ("IGR", "HIGR")}
    complete = all(r[2] is None and 0.5 in r[1] for r in results.values())
    h = 1.0 / 512
    parts, ok = [], complete
    for t, compressive in ((0.125, False), (0.25, True)):
        fronts = {k: shock_fronts(r[1][t], r[0], compressive) for k, r in results.items()}
        diff = max(abs(a - b) for a, b in zip(fronts["IGR"], fronts["HIGR"]))
        ok &= diff <= 2 * h
        parts.append(f"t={t}: IGR {fronts['IGR'][0]:.4f}/{fronts['IGR'][1]:.4f}, "
                     f"HIGR {fronts['HIGR'][0]:.4f}/{fronts['HIGR'][1]:.4f}, max gap {diff / h:.2f}h")
    detail = "; ".join(parts) + f"; both runs complete: {complete}"
    criterion("8", ok, detail)
    assert ok, detail


# 9 -------------------------------------------------------------------------

def _l2_error(field, exact):
    x = field.mesh.quad_points
    return np.sqrt(0.5 * field.mesh.h * np.sum(((field.at_quad() - exact(x)) ** 2) @ GAUSS_WEIGHTS))


def _orders(errs):
    return np.log2(np.asarray(errs[:-1]) / np.asarray(errs[1:]))


def test_criterion_9_convergence_orders(criterion):
    k = 2 * np.pi
    alpha = 1e-2
    sipg = []
    for n in (32, 64, 128, 256):
        m = Mesh1D(n)
        rhs = project(m, lambda x: np.cos(k * x) / (2 + np.sin(k * x)) - alpha * (
            -k**2 * np.cos(k * x) / (2 + np.sin(k * x))
            + k**2 * np.sin(k * x) * np.cos(k * x) / (2 + np.sin(k * x)) ** 2))
        sol = sipg_solve(project(m, lambda x: 2 + np.sin(k * x)), alpha, rhs)
        sipg.append(_l2_error(sol, lambda x: np.cos(k * x)))

    euler = ModelParams(kind="Euler")
    amp, t_end = 1e-6, 0.25
    spatial = []
    for n in (16, 32, 64):
        m = Mesh1D(n)
        final, _ = run(acoustic_initial_state(m, euler, 1, amp), euler, RunConfig(t_end, cfl=0.2),
                       diagnostics=False)
        spatial.append(_l2_error(DgField(m, final.rho.coeffs - np.array([1.0, 0.0])),
                                 lambda x: amp * np.cos(k * (x - t_end))))

    m = Mesh1D(32)
    s0 = acoustic_initial_state(m, euler, 1, 1e-3)
    op = model_operator(euler)

    def advance(steps):
        s = s0
        for _ in range(steps):
            s = ssprk3_step(s, t_end / steps, op)
        return s.q

    ref = advance(1600)
    temporal = [np.abs(advance(n) - ref).max() for n in (100, 200)]

    o_sipg, o_space, o_time = _orders(sipg).min(), _orders(spatial).min(), _orders(temporal).min()
    ok = o_sipg >= 1.8 and o_space >= 1.8 and o_time >= 2.7
    criterion("9", ok, f"SIPG spatial order {o_sipg:.2f}, Euler acoustic spatial order {o_space:.2f} "
                       f"(>= 1.8); temporal order {o_time:.2f} (>= 2.7)")
    assert ok
