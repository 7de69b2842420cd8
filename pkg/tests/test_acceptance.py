"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected into a terminal summary section.
"""

import time

import numpy as np
from scipy.interpolate import PchipInterpolator

from thermolength import fock, models
from thermolength.cli import main
from thermolength.cycle import convergence_study, run_cycle
from thermolength.gaussian import thermal_covariance
from thermolength.lindblad import drift_diffusion, open_metrics, steady_covariance, thermal_damping
from thermolength.metrics import metric_pair, min_eigenvalue_ratio
from thermolength.numerics import solve_lyapunov
from thermolength.optimizer import (
    CycleGeometry,
    Schedule,
    coefficient_of_variation,
    objective_value,
    optimal_schedule,
    pareto_sweep,
    speed_profile,
)

EPS5 = (0.0, 0.25, 0.5, 0.75, 1.0)


def test_c1_fock_equivalence(acceptance):
    start = time.perf_counter()
    single = models.single_oscillator()
    worst = 0.0
    for w in (0.5, 1.0, 2.0, 5.0):
        for b in (0.5, 1.0, 2.0, 5.0):
            p = np.array([b, w])
            F = fock.adapted(single, p, 120)
            mf, gf = fock.metric_m_fock(F, p), fock.metric_g_fock(F, p)
            m, g = metric_pair(single, p)
            for a, ref in ((m, mf), (g, gf)):
                zero = ref == 0
                assert np.all(a[zero] == 0)
                worst = max(worst, float(np.max(np.abs(a[~zero] - ref[~zero]) / np.abs(ref[~zero]))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 30
    acceptance(1, ok, f"max relative deviation {worst:.2e} (tol 1e-6), {elapsed:.1f} s (< 30 s)")
    assert ok


def test_c2_entropy_identity(acceptance, fig1_model, fig1_curve):
    start = time.perf_counter()
    gaps = []
    for N in (10, 50, 200):
        gap, scale = run_cycle(fig1_model, fig1_curve, N).identity_gap()
        gaps.append(gap / scale)
    elapsed = time.perf_counter() - start
    ok = max(gaps) <= 1e-10 and elapsed < 10
    acceptance(2, ok, f"scaled gaps {', '.join(f'{g:.1e}' for g in gaps)} (tol 1e-10), {elapsed:.1f} s")
    assert ok


def test_c3_geometric_convergence(acceptance, fig1_model, fig1_curve):
    start = time.perf_counter()
    geo = CycleGeometry.build(fig1_model, fig1_curve)
    tab = convergence_study(fig1_model, geo, Schedule.identity(), [50, 100, 200, 400, 800])
    last = tab.rows[-1]
    rv = last.scaled_var / last.var_limit
    rd = last.scaled_deta / last.deta_limit
    elapsed = time.perf_counter() - start
    ok = (abs(tab.var_exponent - 1) <= 0.3 and abs(tab.deta_exponent - 1) <= 0.3
          and 0.99 <= rv <= 1.01 and 0.99 <= rd <= 1.01 and elapsed < 120)
    acceptance(3, ok, f"exponents var {tab.var_exponent:.3f}, deta {tab.deta_exponent:.3f} (1 +- 0.3); "
               f"N=800 ratios {rv:.5f}, {rd:.5f}; {elapsed:.1f} s")
    assert ok


def random_schedule(rng):
    knots = np.linspace(0, 1, 12)
    inc = rng.dirichlet(np.full(11, 2.0))
    vals = np.concatenate([[0.0], np.cumsum(inc)])
    vals[-1] = 1.0
    return Schedule.from_function(PchipInterpolator(knots, vals))


def test_c4_cauchy_schwarz(acceptance, fig1_geometry, rng):
    N = 50
    schedules = [random_schedule(rng) for _ in range(50)]
    worst_id, worst_cv, worst_margin = 0.0, 0.0, np.inf
    for eps in EPS5:
        opt = optimal_schedule(fig1_geometry, eps)
        val = objective_value(fig1_geometry, opt, N).objective
        target = opt.length**2 / N
        worst_id = max(worst_id, abs(val / target - 1))
        worst_cv = max(worst_cv, coefficient_of_variation(speed_profile(fig1_geometry, opt)))
        for s in schedules:
            other = objective_value(fig1_geometry, s, N, eps=eps).objective
            worst_margin = min(worst_margin, other / val - 1)
    ok = worst_id <= 1e-6 and worst_margin >= 0 and worst_cv < 1e-3
    acceptance(4, ok, f"max |I N / L^2 - 1| {worst_id:.1e} (tol 1e-6); min random excess {worst_margin:.3f} "
               f"over 250 trials; max CV {worst_cv:.1e} (< 1e-3)")
    assert ok


def test_c5_fluctuation_bound(acceptance, fig1_model, fig1_geometry):
    N = 500
    bc = fig1_geometry.curve.beta_c
    opt = optimal_schedule(fig1_geometry, 1.0)
    L1 = opt.length
    var_opt = run_cycle(fig1_model, fig1_geometry.curve.reparameterized(opt), N).var_W
    var_lin = run_cycle(fig1_model, fig1_geometry.curve, N).var_W
    lhs = var_opt * N * bc**2
    bound = L1**2 * (1 - 5 / N)
    ok = lhs >= bound and var_lin > var_opt
    acceptance(5, ok, f"N Var(W)/T_c^2 = {lhs:.3f} >= {bound:.3f}; linear {var_lin * N * bc**2:.3f} > optimal")
    assert ok


def front_checks(points):
    """Convexity slack and dominance flag of one front (non-singular points only)."""
    pts = [p for p in points if not p.singular]
    x = np.array([p.delta_w for p in pts])
    y = np.array([p.delta_eta for p in pts])
    order = np.argsort(x)
    x, y = x[order], y[order]
    slopes = np.diff(y) / np.diff(x)
    d2 = np.diff(slopes)
    dominated = any(
        (x[j] <= x[i] and y[j] <= y[i]) and (x[j] < x[i] or y[j] < y[i])
        for i in range(len(x)) for j in range(len(x)) if i != j
    )
    return float(np.min(d2)), dominated


def test_c6_pareto_fronts(acceptance):
    grid = np.linspace(0, 1, 21)
    min_d2, any_dominated, n_fronts = np.inf, False, 0
    for name in ("fig2-left", "fig2-right"):
        for _, model, curve in models.get_preset(name).cells():
            pts = pareto_sweep(CycleGeometry.build(model, curve), grid, N=50)
            d2, dom = front_checks(pts)
            min_d2, any_dominated = min(min_d2, d2), any_dominated or dom
            n_fronts += 1
    rel_dw, deta = [], []
    for _, model, curve in models.get_preset("classical-ho").cells():
        geo = CycleGeometry.build(model, curve)
        pts = pareto_sweep(geo, grid, N=50)
        d2, dom = front_checks(pts)
        min_d2, any_dominated = min(min_d2, d2), any_dominated or dom
        rel_dw.append(pts[0].delta_w / (geo.curve.beta_c * abs(geo.work)))
        deta.append(pts[0].delta_eta)
    # computed ordering at eps = 0: both relative fluctuation and deficit grow with T_c
    ordered = bool(np.all(np.diff(rel_dw) > 0) and np.all(np.diff(deta) > 0))
    ok = min_d2 >= -1e-9 and not any_dominated and ordered
    acceptance(6, ok, f"{n_fronts} quantum + 3 classical fronts; min second difference {min_d2:.2e}; "
               f"dominated points: {any_dominated}; classical T_c ordering {ordered} "
               f"(rel dW {', '.join(f'{v:.2f}' for v in rel_dw)})")
    assert ok


def test_c7_commuting_reduction(acceptance):
    model = models.scaling_oscillator(1.3)
    lm = thermal_damping(model, 0.25)
    worst = 0.0
    for beta in (0.3, 1.0, 2.5, 6.0):
        for c in (0.5, 1.0, 1.7):
            p = np.array([beta, c])
            for m, g in (metric_pair(model, p), open_metrics(lm, p)):
                worst = max(worst, abs(g[1, 1] - beta**2 * m[1, 1]) / g[1, 1])
    ok = worst <= 1e-9
    acceptance(7, ok, f"max |g_cc - beta^2 m_cc| / g_cc = {worst:.1e} (closed and open, tol 1e-9)")
    assert ok


def test_c8_lindblad_gates(acceptance, fig1_curve):
    dho = models.damped_ho_lindblad(1.0, 0.1)
    coupled = thermal_damping(models.coupled_oscillators(1.0, 0.4), 0.1)
    worst_res, worst_bal, worst_asym, worst_psd = 0.0, 0.0, 0.0, np.inf
    for beta in np.linspace(0.8, 4.0, 9):
        for w in (1.0, 1.5, 2.0):
            p = np.array([beta, w])
            sig = steady_covariance(dho, p)
            ref = thermal_covariance(dho.model, p).sigma
            worst_bal = max(worst_bal, float(np.max(np.abs(sig - ref))))
    for p in fig1_curve.point(np.linspace(0, 1, 21)):
        A, D = drift_diffusion(coupled, p)
        for X in coupled.model.forces(p):
            Y = solve_lyapunov(A, X)
            worst_res = max(worst_res, float(np.max(np.abs(A.T @ Y + Y @ A + X))))
        m, g = open_metrics(coupled, p)
        for M in (m, g):
            worst_asym = max(worst_asym, float(np.max(np.abs(M - M.T))))
            worst_psd = min(worst_psd, min_eigenvalue_ratio(M))
    ok = worst_res < 1e-10 and worst_bal <= 1e-8 and worst_asym <= 1e-10 and worst_psd >= -1e-9
    acceptance(8, ok, f"Lyapunov residual {worst_res:.1e} (< 1e-10); steady vs thermal {worst_bal:.1e} (tol 1e-8); "
               f"asymmetry {worst_asym:.1e}; min eigen ratio {worst_psd:.2e}")
    assert ok


def test_c9_determinism(acceptance, tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text("[run]\neps_points = 11\nN = 50\n")
    outs = []
    for k in range(2):
        out = tmp_path / f"front{k}.csv"
        assert main(["pareto", "--preset", "fig1", "--config", str(cfg), "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    acceptance(9, ok, f"two pareto runs byte-identical: {ok} ({len(outs[0])} bytes)")
    assert ok
