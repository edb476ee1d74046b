"""Explicit finite-volume solver for the rescaled drift-diffusion-aggregation
equation, plus a small 2D Cartesian physical-frame solver used as a cross-check.

The rescaled equation on a radial grid reads

    d(theta)/dtau = div(eta theta) + Lap(theta^m) - c(tau) div(theta V),

with c(tau) = e^{(1-alpha-beta) tau / beta} and V the rescaled nonlocal
velocity.  Fluxes are assembled at cell interfaces: first-order upwinding of
the combined drift, centered differencing of theta^m, no-flux at both ends.
Mass is conserved to rounding and cell values stay nonnegative under the CFL
condition enforced by the adaptive step size.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import special

from . import kernels
from .barenblatt import ground_state
from .errors import BlowUpDetected, ParameterDomainError, SchemeError
from .grid import RadialGrid, RadialGridFunction

CFL_SAFETY = 0.4
#: blow-up thresholds: peak relative to the ground-state peak, and dt underflow
BLOWUP_PEAK_FACTOR = 1e6
BLOWUP_DT_FACTOR = 1e-12

INITIAL_KINDS = (
    "barenblatt",
    "gaussian_offcenter_radialized",
    "annulus",
    "double_bump_radial",
    "custom_table",
)


@dataclass
class SolverState:
    theta: RadialGridFunction
    tau: float
    params: object
    kernel: kernels.KernelSpec | None = None
    step_count: int = 0
    dt_last: float = 0.0
    velocity_op: object = field(default=None, repr=False)
    ground_peak: float = field(default=None, repr=False)

    def __post_init__(self):
        if self.ground_peak is None:
            self.ground_peak = ground_state(self.params).peak()
        if self.kernel is not None and self.velocity_op is None:
            self.velocity_op = kernels.RadialVelocityOperator(
                self.kernel, self.theta.grid, targets="interfaces"
            )


def drift_prefactor(params, tau):
    """c(tau) = e^{(1 - alpha - beta) tau / beta} weighting the nonlocal term."""
    return math.exp((1.0 - params.alpha - params.beta) * tau / params.beta)


def _interface_velocity(state):
    """Combined outward drift w = c(tau) V - eta at interior interfaces."""
    g = state.theta.grid
    r_int = g.interfaces[1:-1]
    if state.kernel is None:
        return -r_int
    V = state.velocity_op(state.tau, state.theta)
    return drift_prefactor(state.params, state.tau) * V - r_int


def _stable_dt(state, w):
    g = state.theta.grid
    m = state.params.m
    theta = state.theta.values
    peak = theta.max()
    if m == 1.0:
        diffusivity = 1.0
    else:
        diffusivity = peak ** (m - 1.0) if peak > 0 else 0.0
    dt_diff = g.dr**2 / (2.0 * g.d * m * max(diffusivity, 1e-300))
    # per-cell positivity bound on the upwinded advective outflow
    areas = g.areas[1:-1]
    out_right = np.zeros(g.N)
    out_left = np.zeros(g.N)
    out_right[:-1] = areas * np.maximum(w, 0.0)
    out_left[1:] = areas * np.maximum(-w, 0.0)
    outflow = out_right + out_left
    with np.errstate(divide="ignore"):
        dt_adv = float(np.min(np.where(outflow > 0, g.volumes / outflow, np.inf)))
    return CFL_SAFETY * min(dt_diff, dt_adv)


def step(state, dt_max=np.inf):
    """Advance one explicit step; returns a new state (input left untouched)."""
    g = state.theta.grid
    theta = state.theta.values
    m = state.params.m

    w = _interface_velocity(state)
    dt = _stable_dt(state, w)
    if dt < BLOWUP_DT_FACTOR * g.dr**2:
        raise BlowUpDetected(state.tau, theta.max(), "time step underflow")
    if theta.max() > BLOWUP_PEAK_FACTOR * state.ground_peak:
        raise BlowUpDetected(state.tau, theta.max(), "peak exceeded blow-up threshold")
    dt = min(dt, dt_max)

    # outward flux at interior interfaces: upwinded advection + centered diffusion
    upwind = np.where(w > 0, theta[:-1], theta[1:])
    theta_m = theta if m == 1.0 else theta**m
    flux = w * upwind - (theta_m[1:] - theta_m[:-1]) / g.dr
    flux_full = np.zeros(g.N + 1)
    flux_full[1:-1] = g.areas[1:-1] * flux

    new_vals = theta - dt * np.diff(flux_full) / g.volumes
    neg = new_vals < 0
    if np.any(neg):
        worst = float(new_vals.min())
        if worst < -1e-12 * max(theta.max(), 1.0):
            raise SchemeError(
                f"negative cell value {worst:.3e} after step at tau={state.tau:.6g}"
            )
        new_vals = np.where(neg, 0.0, new_vals)  # clip rounding-level negatives

    return replace(
        state,
        theta=RadialGridFunction(g, new_vals, _validate=False),
        tau=state.tau + dt,
        step_count=state.step_count + 1,
        dt_last=dt,
    )


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------


def _radialized_gaussian(r, center, width, d):
    """Spherical average over directions of a unit-mass Gaussian at |x0| = center."""
    s2 = width**2
    if center == 0.0:
        return np.exp(-0.5 * r**2 / s2)
    z = r * center / s2
    if d == 2:
        # exp(-(r^2+c^2)/2s^2) I0(z), stabilized through the scaled Bessel function
        return np.exp(-0.5 * (r - center) ** 2 / s2) * special.i0e(z)
    if d == 3:
        near = np.exp(-0.5 * (r - center) ** 2 / s2)
        far = np.exp(-0.5 * (r + center) ** 2 / s2)
        return np.where(z > 1e-8, (near - far) / np.maximum(2.0 * z, 1e-300), near)
    raise ParameterDomainError("off-center radialization implemented for d in {2, 3}")


def initial_data(kind, params, grid, **opts):
    """Nonnegative initial profile with mass params.M and finite second moment."""
    r = grid.centers
    if kind == "barenblatt":
        vals = ground_state(params).on_grid(grid).values
    elif kind == "gaussian_offcenter_radialized":
        center = opts.pop("center", 0.25 * grid.R)
        width = opts.pop("width", 1.0)
        vals = _radialized_gaussian(r, center, width, params.d)
    elif kind == "annulus":
        r0 = opts.pop("r0", 1.0)
        r1 = opts.pop("r1", 2.0)
        if not 0 <= r0 < r1:
            raise ParameterDomainError(f"annulus requires 0 <= r0 < r1, got [{r0}, {r1}]")
        vals = ((r >= r0) & (r <= r1)).astype(float)
    elif kind == "double_bump_radial":
        r0 = opts.pop("r0", 0.3 * grid.R)
        r1 = opts.pop("r1", 0.6 * grid.R)
        width = opts.pop("width", 0.05 * grid.R)
        vals = np.exp(-0.5 * ((r - r0) / width) ** 2) + np.exp(
            -0.5 * ((r - r1) / width) ** 2
        )
    elif kind == "custom_table":
        table = opts.pop("values", None)
        if table is None:
            raise ParameterDomainError("custom_table initial data requires values")
        vals = np.asarray(table, dtype=float)
        if vals.shape != r.shape:
            vals = np.interp(r, np.linspace(0, grid.R, len(vals)), vals)
        if np.any(vals < 0):
            raise ParameterDomainError("custom_table values must be nonnegative")
    else:
        raise ParameterDomainError(
            f"unknown initial data kind {kind!r}; expected one of {INITIAL_KINDS}"
        )
    if opts:
        raise ParameterDomainError(f"unknown initial-data options {sorted(opts)}")
    out = RadialGridFunction(grid, vals)
    total = out.mass()
    if total <= 0:
        raise ParameterDomainError(f"initial data {kind!r} has zero mass on this grid")
    out.values *= params.M / total
    return out


# ---------------------------------------------------------------------------
# trajectory driver
# ---------------------------------------------------------------------------


@dataclass
class Trajectory:
    params: object
    kernel: kernels.KernelSpec | None
    snapshots: list  # (tau, RadialGridFunction)
    rows: list       # DiagnosticsRow
    status: str      # "completed" or "blow-up"
    blowup: BlowUpDetected | None
    min_value: float
    dt_stats: dict
    steps: int


def run(
    params,
    grid,
    initial,
    kernel=None,
    tau_max=8.0,
    snapshot_dtau=0.1,
    p_list=(2.0, 4.0),
    k_levels=(),
    keep_snapshots=True,
):
    """Evolve to tau_max recording diagnostics at the snapshot cadence.

    Deterministic for fixed inputs: fixed iteration order, no time-based state.
    Blow-up terminates the trajectory with status "blow-up" rather than raising.
    """
    from .diagnostics import diagnostics_row  # local import to avoid a cycle

    if tau_max < 0:
        raise ParameterDomainError("tau_max must be nonnegative")
    if kernel is not None:
        kernels.check_regime_compatibility(kernel, params)
    profile = ground_state(params)
    theta_ref = profile.on_grid(grid)
    state = SolverState(
        theta=initial.copy(), tau=0.0, params=params, kernel=kernel,
        ground_peak=profile.peak(),
    )

    snapshots = []
    rows = []
    min_value = float(initial.values.min())
    dt_min, dt_max_seen, dt_sum = math.inf, 0.0, 0.0
    status, event = "completed", None

    def record(st):
        if keep_snapshots:
            snapshots.append((st.tau, st.theta.copy()))
        rows.append(
            diagnostics_row(params, st.theta, st.tau, theta_ref, p_list, k_levels)
        )

    record(state)
    next_snap = snapshot_dtau
    try:
        while state.tau < tau_max - 1e-13:
            target = min(next_snap, tau_max)
            state = step(state, dt_max=target - state.tau)
            min_value = min(min_value, float(state.theta.values.min()))
            dt_min = min(dt_min, state.dt_last)
            dt_max_seen = max(dt_max_seen, state.dt_last)
            dt_sum += state.dt_last
            if state.tau >= target - 1e-13:
                record(state)
                if state.tau >= next_snap - 1e-13:
                    next_snap += snapshot_dtau
    except BlowUpDetected as exc:
        status = "blow-up"
        event = exc
        record(state)

    return Trajectory(
        params=params,
        kernel=kernel,
        snapshots=snapshots,
        rows=rows,
        status=status,
        blowup=event,
        min_value=min_value,
        dt_stats={
            "dt_min": dt_min if math.isfinite(dt_min) else 0.0,
            "dt_max": dt_max_seen,
            "dt_mean": dt_sum / state.step_count if state.step_count else 0.0,
        },
        steps=state.step_count,
    )


# ---------------------------------------------------------------------------
# 2D Cartesian physical-frame solver (m = 1 oracle)
# ---------------------------------------------------------------------------


@dataclass
class CartesianState2D:
    u: np.ndarray       # (n, n) nonnegative density
    h: float            # grid spacing; cell centers at (i+1/2)h - L on [-L, L]
    t: float
    kernel: kernels.KernelSpec | None = None
    step_count: int = 0
    dt_last: float = 0.0

    @property
    def extent(self):
        return 0.5 * self.u.shape[0] * self.h


def cartesian_grid_2d(L, n):
    """Cell-center coordinate arrays for the square [-L, L]^2 with n cells/side."""
    h = 2.0 * L / n
    c = -L + (np.arange(n) + 0.5) * h
    return c[:, None] * np.ones((1, n)), np.ones((n, 1)) * c[None, :], h


def step_cartesian_2d(state):
    """One explicit step of u_t + div(u grad K * u) = Lap u (linear diffusion)."""
    u = state.u
    h = state.h
    n = u.shape[0]

    if state.kernel is not None:
        vx, vy = kernels.velocity_cartesian_2d(state.kernel, u, h)
    else:
        vx = vy = np.zeros_like(u)

    # face velocities by averaging; upwind flux per axis; no-flux at the box edge
    fx = np.zeros((n + 1, n))
    fy = np.zeros((n, n + 1))
    wx = 0.5 * (vx[:-1, :] + vx[1:, :])
    wy = 0.5 * (vy[:, :-1] + vy[:, 1:])
    fx[1:-1, :] = np.where(wx > 0, u[:-1, :], u[1:, :]) * wx
    fy[:, 1:-1] = np.where(wy > 0, u[:, :-1], u[:, 1:]) * wy
    fx[1:-1, :] -= (u[1:, :] - u[:-1, :]) / h
    fy[:, 1:-1] -= (u[:, 1:] - u[:, :-1]) / h

    vmax = float(max(np.max(np.abs(wx)) if wx.size else 0.0,
                     np.max(np.abs(wy)) if wy.size else 0.0))
    dt = CFL_SAFETY * min(h**2 / 4.0, h / vmax if vmax > 0 else np.inf)
    if not np.isfinite(dt) or dt <= 0:
        raise SchemeError("non-finite time step in 2D solver")
    if dt < BLOWUP_DT_FACTOR * h**2:
        raise BlowUpDetected(state.t, float(u.max()), "time step underflow (2D)")

    du = (np.diff(fx, axis=0) + np.diff(fy, axis=1)) / h
    u_new = u - dt * du
    neg = u_new < 0
    if np.any(u_new < -1e-12 * max(u.max(), 1.0)):
        raise SchemeError("negative cell value in 2D step")
    u_new = np.where(neg, 0.0, u_new)

    return replace(
        state, u=u_new, t=state.t + dt, step_count=state.step_count + 1, dt_last=dt
    )


def radial_average_2d(u, h, radial_grid):
    """Bin a 2D field onto radial cells by cell-area-weighted averaging."""
    n = u.shape[0]
    L = 0.5 * n * h
    c = -L + (np.arange(n) + 0.5) * h
    R = np.hypot(c[:, None], c[None, :]).ravel()
    vals = u.ravel()
    edges = radial_grid.interfaces
    idx = np.clip(np.searchsorted(edges, R, side="right") - 1, 0, radial_grid.N)
    inside = idx < radial_grid.N
    sums = np.bincount(idx[inside], weights=vals[inside], minlength=radial_grid.N)
    counts = np.bincount(idx[inside], minlength=radial_grid.N)
    out = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    # fill empty innermost bins (possible when dr << h) from the nearest filled bin
    if np.any(counts == 0):
        filled = np.nonzero(counts > 0)[0]
        out = np.interp(np.arange(radial_grid.N), filled, out[filled])
    return RadialGridFunction(radial_grid, np.maximum(out, 0.0), _validate=False)
