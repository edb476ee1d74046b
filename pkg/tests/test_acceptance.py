"""End-to-end acceptance suite.

One test per criterion; each prints a single [PASS]/[FAIL] line (visible with
pytest -s). Long trajectories are computed once and shared across criteria via
a module-level cache, so the mass/positivity and entropy-monotonicity criteria
audit the same runs the rate criteria fit.
"""

import math

import numpy as np

from aggdiff import (
    KernelSpec,
    RadialGrid,
    derive_params,
    fit_power_law,
    from_selfsim,
    ground_state,
    initial_data,
    l1_distance,
    run,
    t_of_tau,
    tau_of_t,
    verify,
)
from aggdiff.grid import RadialGridFunction
from aggdiff.solver import (
    CartesianState2D,
    cartesian_grid_2d,
    radial_average_2d,
    step_cartesian_2d,
)

_cache = {}


def _report(num, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}"
    print(line, flush=True)
    assert ok, line


def _cached(key, build):
    if key not in _cache:
        _cache[key] = build()
    return _cache[key]


# ---------------------------------------------------------------------------
# shared trajectories
# ---------------------------------------------------------------------------


def _heat_run():
    p = derive_params(2, 1.0, 1.0)
    g = RadialGrid(8.0, 400, 2)
    init = initial_data("gaussian_offcenter_radialized", p, g)
    return p, g, run(p, g, init, tau_max=8.0, snapshot_dtau=0.1)


def _pme_run():
    p = derive_params(3, 4 / 3, 1.0)
    g = RadialGrid(6.0, 600, 3)
    init = initial_data("gaussian_offcenter_radialized", p, g)
    return p, g, run(p, g, init, tau_max=5.0, snapshot_dtau=0.1, keep_snapshots=True)


def _annulus_run():
    p = derive_params(3, 4 / 3, 1.0)
    g = RadialGrid(6.0, 400, 3)
    init = initial_data("annulus", p, g, r0=1.0, r1=2.0)
    return p, g, run(p, g, init, tau_max=3.5, snapshot_dtau=0.1)


def _powertail_run():
    p = derive_params(3, 1.0, 0.1)
    g = RadialGrid(6.0, 200, 3)
    init = initial_data("gaussian_offcenter_radialized", p, g)
    k = KernelSpec("power_tail", gamma=2.0)
    return p, g, run(p, g, init, kernel=k, tau_max=3.0, snapshot_dtau=0.1)


def _smooth_run():
    p = derive_params(3, 4 / 3, 0.1)
    g = RadialGrid(6.0, 300, 3)
    init = initial_data("gaussian_offcenter_radialized", p, g)
    k = KernelSpec("smooth_compact")
    return p, g, run(p, g, init, kernel=k, tau_max=4.0, snapshot_dtau=0.1)


def _stationarity_runs():
    out = {}
    for label, (d, m, R) in (("pme", (3, 4 / 3, 3.2)), ("heat", (2, 1.0, 6.0))):
        p = derive_params(d, m, 1.0)
        for N in (400, 800):
            g = RadialGrid(R, N, d)
            init = initial_data("barenblatt", p, g)
            traj = run(p, g, init, tau_max=1.0, snapshot_dtau=0.5, keep_snapshots=True)
            out[(label, N)] = (init, traj)
    return out


def _entropy_run():
    p = derive_params(2, 1.0, 1.0)
    g = RadialGrid(8.0, 800, 2)
    init = initial_data("gaussian_offcenter_radialized", p, g)
    return p, g, run(p, g, init, tau_max=3.0, snapshot_dtau=0.1)


def _cross_solver_run():
    p = derive_params(2, 1.0, 1.0)
    spec = KernelSpec("gaussian")
    L, n = 12.0, 192
    X, Y, h = cartesian_grid_2d(L, n)
    u0 = np.exp(-0.5 * (X**2 + Y**2))
    u0 /= u0.sum() * h * h
    state = CartesianState2D(u=u0, h=h, t=0.0, kernel=spec)

    grid = RadialGrid(8.0, 200, 2)
    theta0 = RadialGridFunction(grid, np.exp(-0.5 * grid.centers**2))
    theta0.values /= theta0.mass()
    checkpoints = [2.5, 5.0, 10.0]
    traj = run(
        p, grid, theta0, kernel=spec,
        tau_max=tau_of_t(p, checkpoints[-1]),
        snapshot_dtau=0.05, keep_snapshots=True,
    )

    out_grid = RadialGrid(L, 240, 2)
    mass0 = state.u.sum() * h * h
    errs, mass_drift_2d, nsteps_2d = [], 0.0, 0
    i = 0
    while state.t < checkpoints[-1] and i < len(checkpoints):
        state = step_cartesian_2d(state)
        nsteps_2d += 1
        mass_drift_2d = max(
            mass_drift_2d, abs(state.u.sum() * h * h - mass0) / mass0
        )
        if state.t >= checkpoints[i]:
            tau, theta = min(
                traj.snapshots, key=lambda s: abs(s[0] - tau_of_t(p, state.t))
            )
            _, u_rad = from_selfsim(p, tau, theta, out_grid=out_grid)
            errs.append((state.t, l1_distance(u_rad, radial_average_2d(state.u, h, out_grid))))
            i += 1
    return traj, errs, mass_drift_2d, nsteps_2d


_DIFFUSION_ONLY = ("heat", "pme", "annulus", "entropy")
_BUILDERS = {
    "heat": _heat_run,
    "pme": _pme_run,
    "annulus": _annulus_run,
    "powertail": _powertail_run,
    "smooth": _smooth_run,
    "entropy": _entropy_run,
}


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------


def test_criterion_1_heat_decay():
    p, g, traj = _cached("heat", _heat_run)
    taus = np.array([r.tau for r in traj.rows])
    ts = np.array([r.t for r in traj.rows])
    linf_u = np.array([math.exp(-p.d * r.tau) * r.linf for r in traj.rows])
    rep = fit_power_law(
        ts, linf_u, (t_of_tau(p, 2.0), t_of_tau(p, 8.0)), frame="t"
    )
    err = abs(rep.fitted_exponent - (-1.0))
    _report(
        1, err <= 0.05,
        f"heat L-inf decay exponent {rep.fitted_exponent:.4f} vs -1 "
        f"(d*beta), deviation {err:.3f} <= 0.05",
    )


def test_criterion_2_pme_decay_and_support():
    p, g, traj = _cached("pme", _pme_run)
    ts = np.array([r.t for r in traj.rows])
    taus = np.array([r.tau for r in traj.rows])
    linf_u = np.array([math.exp(-p.d * r.tau) * r.linf for r in traj.rows])
    rep = fit_power_law(ts, linf_u, (ts[taus >= 2.0][0], ts[-1]), frame="t")
    err = abs(rep.fitted_exponent - (-1.0))
    # front detector: relative threshold 1e-4 of the peak; the first-order
    # smearing skirt sits below it and the exact profile crosses it within
    # ~0.05 of its edge, so it localizes the front to grid accuracy
    support = traj.snapshots[-1][1].support_radius(threshold_frac=1e-4)
    exact = ground_state(p).support_radius
    sup_err = abs(support - exact)
    ok = err <= 0.10 and sup_err <= 2.0 * g.dr
    _report(
        2, ok,
        f"pme L-inf exponent {rep.fitted_exponent:.4f} vs -1 (dev {err:.3f} "
        f"<= 0.10); support {support:.4f} vs {exact:.4f} "
        f"({sup_err / g.dr:.2f} cells <= 2)",
    )


def test_criterion_3_diffusion_convergence_rate():
    p, g, traj = _cached("annulus", _annulus_run)
    taus = np.array([r.tau for r in traj.rows])
    l1 = np.array([r.l1_to_ground for r in traj.rows])
    # window ends before the series reaches the discrete steady-state floor
    rep = fit_power_law(taus, l1, (0.5, 3.5), frame="tau")
    rate = -rep.fitted_exponent
    note = " (exceeds prediction 1.0, recorded)" if rate > 1.0 else ""
    _report(
        3, rate >= 0.7,
        f"annulus L1 convergence tau-rate {rate:.3f} >= 0.7 "
        f"(prediction 1.0){note}",
    )


def test_criterion_4_power_tail_rate():
    p, g, traj = _cached("powertail", _powertail_run)
    taus = np.array([r.tau for r in traj.rows])
    l1 = np.array([r.l1_to_ground for r in traj.rows])
    peak = max(r.linf for r in traj.rows)
    peak_ok = peak < 2.0 * ground_state(p).peak()
    rep = fit_power_law(taus, l1, (0.5, 2.5), frame="tau")
    rate = -rep.fitted_exponent
    ok = peak_ok and 0.7 <= rate <= 1.5
    _report(
        4, ok,
        f"power-tail (gamma=2) L1 tau-rate {rate:.3f} in [0.7, 1.5] "
        f"(prediction min(1, 1+gamma-1/beta) = 1); "
        f"peak/ground-peak {peak / ground_state(p).peak():.2f} < 2",
    )


def test_criterion_5_smooth_compact_rate():
    p, g, traj = _cached("smooth", _smooth_run)
    taus = np.array([r.tau for r in traj.rows])
    l1 = np.array([r.l1_to_ground for r in traj.rows])
    rep = fit_power_law(taus, l1, (1.0, 4.0), frame="tau")
    rate = -rep.fitted_exponent
    floor = 0.7 * (1.0 - 0.05)
    _report(
        5, rate >= floor,
        f"smooth-compact critical L1 tau-rate {rate:.3f} >= "
        f"0.7*(1-0.05) = {floor:.3f}",
    )


def test_criterion_6_ground_state_stationarity():
    runs = _cached("stationarity", _stationarity_runs)
    details, ok = [], True
    for label in ("pme", "heat"):
        drifts = {}
        for N in (400, 800):
            init, traj = runs[(label, N)]
            drifts[N] = l1_distance(traj.snapshots[-1][1], init)
        ratio = drifts[400] / drifts[800]
        ok = ok and drifts[400] <= 1e-2 and ratio >= 1.7
        details.append(
            f"{label}: drift(N=400) {drifts[400]:.2e} <= 1e-2*M, "
            f"halving-dr ratio {ratio:.2f} >= 1.7"
        )
    _report(6, ok, "; ".join(details))


def test_criterion_7_entropy_dissipation():
    # H nonincreasing on every diffusion-only acceptance run
    mono_ok, mono_details = True, []
    for key in _DIFFUSION_ONLY:
        p, g, traj = _cached(key, _BUILDERS[key])
        H = np.array([r.H for r in traj.rows])
        worst = float(np.diff(H).max())
        mono_ok = mono_ok and worst <= 1e-10
        mono_details.append(f"{key} max dH {worst:.1e}")
    # quantitative identity |dH/dtau + I| <= 5% of I on the fine grid
    p, g, traj = _cached("entropy", _entropy_run)
    taus = np.array([r.tau for r in traj.rows])
    H = np.array([r.H for r in traj.rows])
    prod = np.array([r.I for r in traj.rows])
    dH = (H[2:] - H[:-2]) / (taus[2:] - taus[:-2])
    mid = slice(1, -1)
    mask = (taus[mid] >= 0.5) & (taus[mid] <= 3.0)
    resid = np.abs(dH + prod[mid])[mask].mean()
    rel = resid / prod[mid][mask].mean()
    ok = mono_ok and rel <= 0.05
    _report(
        7, ok,
        f"H nonincreasing ({'; '.join(mono_details)}); identity residual "
        f"{100 * rel:.1f}% of I <= 5% (N=800)",
    )


def test_criterion_8_log_sobolev_suite():
    ok, detail = verify.suite_log_sobolev(quick=False)
    _report(8, ok, f"log-Sobolev H_rel/I <= 0.55: {detail}")


def test_criterion_9_csiszar_kullback_suite():
    ok, detail = verify.suite_csiszar_kullback(quick=False)
    _report(9, ok, f"Csiszar-Kullback: {detail}")


def test_criterion_10_kernel_growth_suite():
    ok, detail = verify.suite_kernel_growth(quick=False)
    _report(10, ok, f"kernel growth exponents: {detail}")


def test_criterion_11_mass_and_positivity():
    details, ok = [], True
    for key, build in _BUILDERS.items():
        p, g, traj = _cached(key, build)
        mass = np.array([r.mass for r in traj.rows])
        drift = float(np.abs(mass - mass[0]).max() / mass[0])
        tol = 1e-9 * max(1.0, traj.steps / 1e4)
        run_ok = drift <= tol and traj.min_value >= 0.0
        ok = ok and run_ok
        details.append(f"{key} drift {drift:.1e} min {traj.min_value:.1e}")
    for (label, N), (init, traj) in _cached("stationarity", _stationarity_runs).items():
        mass = np.array([r.mass for r in traj.rows])
        drift = float(np.abs(mass - mass[0]).max() / mass[0])
        ok = ok and drift <= 1e-9 * max(1.0, traj.steps / 1e4) and traj.min_value >= 0.0
    traj, errs, drift2d, nsteps = _cached("cross", _cross_solver_run)
    ok = ok and drift2d <= 1e-9 * max(1.0, nsteps / 1e4) and traj.min_value >= 0.0
    details.append(f"2d drift {drift2d:.1e}")
    _report(
        11, ok,
        "mass conserved to 1e-9/1e4 steps, no negative cells: "
        + "; ".join(details),
    )


def test_criterion_12_cross_solver_oracle():
    traj, errs, _, _ = _cached("cross", _cross_solver_run)
    worst = max(e for _, e in errs)
    ok = traj.status == "completed" and worst <= 5e-2
    _report(
        12, ok,
        "2d cartesian vs radial rescaled L1 "
        + ", ".join(f"{e:.3f}@t={t:.3g}" for t, e in errs)
        + f"; max {worst:.3f} <= 0.05",
    )
