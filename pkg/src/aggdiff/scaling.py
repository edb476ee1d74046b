"""Problem parameters and the change of variables to the self-similar frame.

Physical variables (t, x, u) are mapped to rescaled variables (tau, eta, theta)
by theta(tau, eta) = e^{d tau} u(t, e^{tau} eta) with t = beta e^{tau/beta} - beta.
In the rescaled frame the spreading self-similar profile is a fixed point, so
long-time decay questions become convergence-to-steady-state questions on a
bounded domain.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterDomainError
from .grid import RadialGridFunction

#: absolute tolerance used when testing m against the critical value 2 - 2/d
CRITICAL_M_TOL = 1e-12


@dataclass(frozen=True)
class ProblemParams:
    d: int
    m: float
    M: float
    beta: float
    alpha: float
    qbar: float
    regime: str  # "critical" or "supercritical"

    @property
    def critical(self):
        return self.regime == "critical"


def derive_params(d, m, M):
    """Validate (d, m, M) and fill in the derived scaling constants.

    beta = 1/(d(m-1)+2), alpha = d*beta, qbar = (2-m)d/2.
    """
    d = int(d)
    m = float(m)
    M = float(M)
    if d < 2:
        raise ParameterDomainError(f"dimension must satisfy d >= 2, got d={d}")
    m_crit = 2.0 - 2.0 / d
    if m < 1.0 - CRITICAL_M_TOL:
        raise ParameterDomainError(f"diffusion exponent must satisfy m >= 1, got m={m}")
    if m > m_crit + CRITICAL_M_TOL:
        raise ParameterDomainError(
            f"diffusion exponent must satisfy m <= 2 - 2/d = {m_crit:.12g}, got m={m}"
        )
    m = max(m, 1.0)
    if M <= 0:
        raise ParameterDomainError(f"mass must be positive, got M={M}")
    beta = 1.0 / (d * (m - 1.0) + 2.0)
    alpha = d * beta
    qbar = (2.0 - m) * d / 2.0
    regime = "critical" if abs(m - m_crit) <= CRITICAL_M_TOL else "supercritical"
    return ProblemParams(d=d, m=m, M=M, beta=beta, alpha=alpha, qbar=qbar, regime=regime)


@dataclass(frozen=True)
class FramePoint:
    """A single instant expressed in both time frames."""

    t: float
    tau: float


def tau_of_t(params, t):
    """Rescaled time tau = beta * ln(1 + t/beta); monotone, tau(0) = 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ParameterDomainError("physical time must be nonnegative")
    out = params.beta * np.log1p(t / params.beta)
    return float(out) if out.ndim == 0 else out


def t_of_tau(params, tau):
    """Inverse map t = beta * (e^{tau/beta} - 1)."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ParameterDomainError("rescaled time must be nonnegative")
    out = params.beta * np.expm1(tau / params.beta)
    return float(out) if out.ndim == 0 else out


def frame_point(params, t=None, tau=None):
    if (t is None) == (tau is None):
        raise ValueError("specify exactly one of t, tau")
    if t is not None:
        return FramePoint(t=float(t), tau=tau_of_t(params, t))
    return FramePoint(t=t_of_tau(params, tau), tau=float(tau))


def _rescale(values_src, src_grid, out_grid, scale_radii, amplitude, target_mass):
    """Sample a radial profile at scaled radii and renormalize to target mass."""
    sampled = amplitude * np.interp(scale_radii, src_grid.centers, values_src, right=0.0)
    out = RadialGridFunction(out_grid, sampled, _validate=False)
    m = out.mass()
    if m > 0 and target_mass > 0:
        out.values *= target_mass / m
    return out


def to_selfsim(params, t, u):
    """Map a physical-frame density u(t, .) to the rescaled frame.

    theta(eta) = e^{d tau} u(e^{tau} eta) on the same radial grid; mass is
    preserved exactly by renormalizing after linear resampling.
    """
    tau = tau_of_t(params, t)
    lam = math.exp(tau)
    theta = _rescale(
        u.values, u.grid, u.grid, lam * u.grid.centers, lam**params.d, u.mass()
    )
    return tau, theta


def from_selfsim(params, tau, theta, out_grid=None):
    """Inverse of to_selfsim: u(x) = e^{-d tau} theta(e^{-tau} x).

    By default the physical density is sampled on the same grid as theta; pass
    out_grid to resample onto a wider physical-frame grid (the support expands
    by a factor e^{tau}, so a same-size grid truncates the tail at large tau).
    """
    if tau < 0:
        raise ParameterDomainError("rescaled time must be nonnegative")
    t = t_of_tau(params, tau)
    lam = math.exp(-tau)
    grid = theta.grid if out_grid is None else out_grid
    u = _rescale(
        theta.values, theta.grid, grid, lam * grid.centers, lam**params.d, theta.mass()
    )
    return t, u
