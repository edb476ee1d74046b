"""Trajectory diagnostics: norm tracking, rate fitting, and predicted exponents."""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .entropy import entropy_H, production_I, relative_entropy
from .errors import ParameterDomainError
from .grid import l1_distance
from .scaling import t_of_tau

DEFAULT_DELTA_SLACK = 0.05
DEFAULT_FIT_TOL = 0.30
MIN_FIT_SAMPLES = 8


@dataclass(frozen=True)
class DiagnosticsRow:
    tau: float
    t: float
    mass: float
    linf: float
    l1_to_ground: float
    H: float
    I: float
    H_rel: float
    E_k: dict = field(default_factory=dict)
    lp: dict = field(default_factory=dict)


def equi_integrability(theta, k_levels):
    """E_k = int (theta - k)_+ per level; nonincreasing in k."""
    k_levels = np.asarray(k_levels, dtype=float)
    if np.any(k_levels <= 0) or np.any(np.diff(k_levels) <= 0):
        raise ParameterDomainError("k levels must be positive and strictly ascending")
    excess = np.maximum(theta.values[None, :] - k_levels[:, None], 0.0)
    return excess @ theta.grid.volumes


def diagnostics_row(params, theta, tau, theta_ref, p_list=(), k_levels=()):
    """One row of the per-snapshot diagnostics table."""
    ek = {}
    if len(k_levels):
        vals = equi_integrability(theta, k_levels)
        ek = {float(k): float(v) for k, v in zip(k_levels, vals)}
    return DiagnosticsRow(
        tau=tau,
        t=t_of_tau(params, tau),
        mass=theta.mass(),
        linf=theta.lp_norm(np.inf),
        l1_to_ground=l1_distance(theta, theta_ref),
        H=entropy_H(params, theta),
        I=production_I(params, theta),
        H_rel=relative_entropy(params, theta, theta_ref=theta_ref),
        E_k=ek,
        lp={float(p): theta.lp_norm(p) for p in p_list},
    )


# ---------------------------------------------------------------------------
# predicted exponents
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PredictedRates:
    """Predicted decay/convergence exponents for a (params, kernel) pair.

    linf_decay_t: exponent of (1+t)^{-x} for the sup norm.
    l1_conv_t / l1_conv_tau: L^1 distance-to-profile exponent in each frame.
    applicable False marks the long-range-critical combination that has no
    predicted rate toward the pure-diffusion profile.
    """

    linf_decay_t: float
    l1_conv_t: float | None
    l1_conv_tau: float | None
    hrel_conv_tau: float | None
    delta: float
    applicable: bool = True
    reason: str = ""


def predicted_rates(params, kernel=None, delta=DEFAULT_DELTA_SLACK):
    """Rate predictions as functions of (d, m) and the kernel tail exponent."""
    beta = params.beta
    linf = params.d * beta
    if kernel is None:
        # pure diffusion: optimal profile-convergence rate (1+t)^{-2 beta min(1/2, 1/m)}
        tau_rate = 2.0 * min(0.5, 1.0 / params.m)
    elif kernels.grad_in_l1(kernel):
        tau_rate = (1.0 - delta) if params.critical else 1.0
    else:
        g = kernels.effective_gamma(kernel, params.d)
        if params.critical and g <= params.d - 1 + 1e-12:
            return PredictedRates(
                linf_decay_t=linf,
                l1_conv_t=None,
                l1_conv_tau=None,
                hrel_conv_tau=None,
                delta=delta,
                applicable=False,
                reason=(
                    "Newtonian-range tail with critical diffusion: convergence to "
                    "the pure-diffusion profile is not predicted"
                ),
            )
        tau_rate = min(1.0, 1.0 + g - 1.0 / beta - delta)
    return PredictedRates(
        linf_decay_t=linf,
        l1_conv_t=beta * tau_rate,
        l1_conv_tau=tau_rate,
        hrel_conv_tau=2.0 * tau_rate,
        delta=delta,
    )


# ---------------------------------------------------------------------------
# rate fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RateReport:
    name: str
    fitted_exponent: float | None
    predicted_exponent: float | None
    window: tuple
    residual: float
    verdict: str  # "pass" | "fail" | "exceeds" | "blow-up" | "not-applicable"
    frame: str = "tau"

    def as_dict(self):
        return {
            "name": self.name,
            "fitted_exponent": self.fitted_exponent,
            "predicted_exponent": self.predicted_exponent,
            "window": list(self.window),
            "residual": self.residual,
            "verdict": self.verdict,
            "frame": self.frame,
        }


def fit_power_law(times, values, window, frame="t", name="series", predicted=None):
    """Least-squares slope of log(value) against log(1+t) (t frame) or tau.

    Returns a RateReport with the fitted slope and the RMS fit residual.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    lo, hi = window
    mask = (times >= lo) & (times <= hi)
    if mask.sum() < MIN_FIT_SAMPLES:
        raise ParameterDomainError(
            f"need at least {MIN_FIT_SAMPLES} samples in window [{lo}, {hi}], "
            f"got {int(mask.sum())}"
        )
    v = values[mask]
    if np.any(v <= 0):
        raise ParameterDomainError("fit requires positive values inside the window")
    x = np.log1p(times[mask]) if frame == "t" else times[mask]
    y = np.log(v)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return RateReport(
        name=name,
        fitted_exponent=float(slope),
        predicted_exponent=predicted,
        window=(float(lo), float(hi)),
        residual=resid,
        verdict="",
        frame=frame,
    )


def _verdict(fitted, predicted, tol):
    """Pass/fail at relative tolerance; faster-than-predicted is recorded, not failed."""
    if predicted is None:
        return "not-applicable"
    if fitted is None:
        return "fail"
    # both exponents are decay rates expressed as negative slopes
    if abs(fitted - predicted) <= tol * abs(predicted):
        return "pass"
    if abs(fitted) > abs(predicted):
        return "exceeds"
    return "fail"


def convergence_report(
    trajectory,
    window=None,
    tol=DEFAULT_FIT_TOL,
    delta=DEFAULT_DELTA_SLACK,
):
    """Fit the decay/convergence series of a trajectory against the predictions."""
    params = trajectory.params
    pred = predicted_rates(params, trajectory.kernel, delta=delta)
    if trajectory.status == "blow-up":
        return [
            RateReport(
                name=name,
                fitted_exponent=None,
                predicted_exponent=None,
                window=(0.0, 0.0),
                residual=0.0,
                verdict="blow-up",
            )
            for name in ("linf_decay", "l1_convergence", "entropy_convergence")
        ]
    taus = np.array([row.tau for row in trajectory.rows])
    if window is None:
        window = (2.0, float(taus.max()))
    if window[1] < window[0] + 2.0:
        raise ParameterDomainError(
            f"fit window [{window[0]}, {window[1]}] shorter than the 2-unit minimum"
        )
    ts = np.array([row.t for row in trajectory.rows])
    t_window = (t_of_tau(params, window[0]), t_of_tau(params, window[1]))

    reports = []
    # physical-frame sup norm ||u(t)||_inf = e^{-d tau} ||theta||_inf
    linf_u = np.array([math.exp(-params.d * row.tau) * row.linf for row in trajectory.rows])
    rep = fit_power_law(
        ts, linf_u, t_window, frame="t", name="linf_decay",
        predicted=-pred.linf_decay_t,
    )
    reports.append(
        _with_verdict(rep, _verdict(rep.fitted_exponent, rep.predicted_exponent, tol))
    )

    l1 = np.array([row.l1_to_ground for row in trajectory.rows])
    predicted = None if pred.l1_conv_tau is None else -pred.l1_conv_tau
    rep = _fit_or_na(taus, l1, window, "l1_convergence", predicted)
    reports.append(_with_verdict(rep, _verdict(rep.fitted_exponent, predicted, tol)))

    hrel = np.array([row.H_rel for row in trajectory.rows])
    predicted = None if pred.hrel_conv_tau is None else -pred.hrel_conv_tau
    rep = _fit_or_na(taus, hrel, window, "entropy_convergence", predicted)
    reports.append(_with_verdict(rep, _verdict(rep.fitted_exponent, predicted, tol)))
    return reports


def _fit_or_na(taus, values, window, name, predicted):
    try:
        return fit_power_law(
            taus, values, window, frame="tau", name=name, predicted=predicted
        )
    except ParameterDomainError:
        return RateReport(
            name=name,
            fitted_exponent=None,
            predicted_exponent=predicted,
            window=(float(window[0]), float(window[1])),
            residual=0.0,
            verdict="",
        )


def _with_verdict(report, verdict):
    return RateReport(
        name=report.name,
        fitted_exponent=report.fitted_exponent,
        predicted_exponent=report.predicted_exponent,
        window=report.window,
        residual=report.residual,
        verdict=verdict,
        frame=report.frame,
    )
