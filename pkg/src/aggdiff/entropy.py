"""Entropy, entropy production, relative entropy, and functional-inequality checks.

All functionals share the solver's volume-weighted midpoint quadrature so that
the discrete dissipation identity dH/dtau = -I holds to scheme order.
"""

import math
from dataclasses import dataclass

import numpy as np

from .barenblatt import ground_state
from .errors import ParameterDomainError
from .grid import l1_distance
from .scaling import derive_params

#: support floor for gradient evaluation, relative to the peak value
SUPPORT_FLOOR_FRAC = 1e-12
#: production values below this (times M R^2) are flagged inconclusive
PRODUCTION_FLOOR_FRAC = 1e-12


def entropy_H(params, theta):
    """H = int theta log theta + |eta|^2 theta / 2 (m=1) or
    int theta^m/(m-1) + |eta|^2 theta / 2 (m>1), with 0 log 0 = 0."""
    vals = theta.values
    vol = theta.grid.volumes
    r2 = theta.grid.centers**2
    moment = 0.5 * float(np.dot(r2 * vals, vol))
    if params.m == 1.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            xlogx = np.where(vals > 0, vals * np.log(np.maximum(vals, 1e-300)), 0.0)
        internal = float(np.dot(xlogx, vol))
    else:
        internal = float(np.dot(vals**params.m, vol)) / (params.m - 1.0)
    return internal + moment


def _support_gradient(f, support, dr):
    """Centered differences of f on the contiguous support, with a symmetric
    ghost at the origin and one-sided closure at the outer support edge."""
    g = np.zeros_like(f)
    idx = np.nonzero(support)[0]
    if len(idx) == 0:
        return g
    i0, i1 = idx[0], idx[-1]
    seg = f[i0 : i1 + 1]
    n = len(seg)
    gs = np.zeros(n)
    if n >= 2:
        gs[1:-1] = (seg[2:] - seg[:-2]) / (2.0 * dr)
        if i0 == 0:
            # even symmetry: secant from the mirrored first cell (exact for quadratics)
            gs[0] = (seg[1] - seg[0]) / (2.0 * dr) if n >= 2 else 0.0
        else:
            gs[0] = (seg[1] - seg[0]) / dr
        gs[-1] = (seg[-1] - seg[-2]) / dr
    g[i0 : i1 + 1] = gs
    return g


def production_I(params, theta, form="gradient"):
    """Entropy production I = int theta |flux/theta|^2 with
    flux/theta = grad(log theta) + eta (m=1) or m/(m-1) grad(theta^{m-1}) + eta.

    form="flux" evaluates the same quantity from interface fluxes instead of
    cell-centered gradients (consistency cross-check).
    """
    vals = theta.values
    g = theta.grid
    peak = vals.max()
    if peak <= 0:
        return 0.0
    support = vals > SUPPORT_FLOOR_FRAC * peak
    if form == "flux":
        return _production_from_flux(params, theta, support)
    if params.m == 1.0:
        # clamp below the support floor so interior dips give large-but-finite
        # log-gradients instead of artifacts of the mask
        f = np.log(np.maximum(vals, SUPPORT_FLOOR_FRAC * peak))
        coef = 1.0
    else:
        f = vals ** (params.m - 1.0)
        coef = params.m / (params.m - 1.0)
    grad = _support_gradient(f, support, g.dr)
    expr = coef * grad + g.centers
    integrand = np.where(support, vals * expr**2, 0.0)
    return float(np.dot(integrand, g.volumes))


def _production_from_flux(params, theta, support):
    vals = theta.values
    g = theta.grid
    m = params.m
    theta_m = vals if m == 1.0 else vals**m
    r_int = g.interfaces[1:-1]
    flux = r_int * 0.5 * (vals[:-1] + vals[1:]) + (theta_m[1:] - theta_m[:-1]) / g.dr
    tbar = 0.5 * (vals[:-1] + vals[1:])
    both = support[:-1] & support[1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = np.where(both & (tbar > 0), flux**2 / np.maximum(tbar, 1e-300), 0.0)
    # interface quadrature weight: area times spacing
    return float(np.dot(dens, g.areas[1:-1] * g.dr))


def relative_entropy(params, theta, theta_ref=None):
    """H(theta | theta_M) = H(theta) - H(theta_M) with theta_M at mass(theta)."""
    mass = theta.mass()
    if mass <= 0:
        raise ParameterDomainError("relative entropy requires positive mass")
    if theta_ref is None:
        p_at_mass = derive_params(params.d, params.m, mass)
        theta_ref = ground_state(p_at_mass).on_grid(theta.grid)
    return entropy_H(params, theta) - entropy_H(params, theta_ref)


@dataclass(frozen=True)
class EntropyReport:
    tau: float
    H: float
    I: float
    H_rel: float
    quadrature_residual: float


def entropy_report(params, theta, tau=0.0):
    """Bundle H, I, H_rel for one snapshot with a crude quadrature-error estimate."""
    H = entropy_H(params, theta)
    I = production_I(params, theta)
    H_rel = relative_entropy(params, theta)
    # discretization scale: O(dr^2) relative to the moment scale of the state
    resid = theta.grid.dr**2 * max(abs(H), theta.mass() * theta.grid.R**2)
    return EntropyReport(tau=tau, H=H, I=I, H_rel=H_rel, quadrature_residual=resid)


# ---------------------------------------------------------------------------
# inequality checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RatioCheck:
    ratio: float | None
    conclusive: bool
    detail: dict


def lsi_check(params, theta):
    """Ratio H(theta|theta_M) / I(theta); the log-Sobolev bound is ratio <= 1/2."""
    I = production_I(params, theta)
    H_rel = relative_entropy(params, theta)
    floor = PRODUCTION_FLOOR_FRAC * theta.mass() * theta.grid.R**2
    if I <= floor:
        return RatioCheck(None, False, {"H_rel": H_rel, "I": I, "reason": "I at floor"})
    return RatioCheck(H_rel / I, True, {"H_rel": H_rel, "I": I})


def ck_check(params, theta):
    """(||theta - theta_M||_1, H_rel^{1/2}) and their ratio.

    The applied exponent is min(1/2, 1/m) = 1/2 throughout the supported range
    m <= 2 - 2/d <= 2.
    """
    mass = theta.mass()
    p_at_mass = derive_params(params.d, params.m, mass)
    theta_ref = ground_state(p_at_mass).on_grid(theta.grid)
    l1 = l1_distance(theta, theta_ref)
    H_rel = relative_entropy(params, theta, theta_ref=theta_ref)
    floor = PRODUCTION_FLOOR_FRAC * mass * theta.grid.R**2
    if H_rel <= floor:
        return RatioCheck(
            None, False, {"l1": l1, "H_rel": H_rel, "reason": "H_rel at floor"}
        )
    root = math.sqrt(H_rel)
    return RatioCheck(l1 / root, True, {"l1": l1, "H_rel": H_rel, "sqrt_H_rel": root})


def gns_check(theta, p, q, r, k, s=1):
    """Scale-invariant interpolation-inequality ratio
    ||f||_q / (||f||_p^{a2} ||grad f^k||_r^{a1}).

    The exponents a1, a2 are determined by the index balance
    1/q - 1/p = a1 (-s/d + 1/r - k/p) together with a1 k + a2 = 1; incompatible
    index combinations are rejected.
    """
    d = theta.grid.d
    if s != 1:
        raise ParameterDomainError("only first-order seminorms are supported (s = 1)")
    denom = -s / d + 1.0 / r - k / p
    if denom == 0:
        raise ParameterDomainError("index balance is degenerate: -s/d + 1/r - k/p = 0")
    a1 = (1.0 / q - 1.0 / p) / denom
    a2 = 1.0 - a1 * k
    if a1 <= 0 or a2 <= 0:
        raise ParameterDomainError(
            f"exponent relations give a1={a1:.4g}, a2={a2:.4g}; both must be positive "
            "(violated: a1 k + a2 = 1 with a1, a2 > 0)"
        )
    if not (1 <= p <= r * k <= d * k):
        raise ParameterDomainError(
            f"index ordering 1 <= p <= r k <= d k violated (p={p}, r k={r*k}, d k={d*k})"
        )
    if 1.0 / r - k / q - s / d >= 0:
        raise ParameterDomainError(
            f"scaling condition 1/r - k/q - s/d < 0 violated "
            f"({1.0/r - k/q - s/d:.4g} >= 0)"
        )
    vals = theta.values
    g = theta.grid
    num = theta.lp_norm(q)
    lp = theta.lp_norm(p)
    fk = vals**k
    support = vals > 0
    grad = _support_gradient(fk, support, g.dr)
    seminorm = float(np.dot(np.abs(grad) ** r, g.volumes)) ** (1.0 / r)
    if lp == 0 or seminorm == 0:
        return RatioCheck(None, False, {"reason": "degenerate input"})
    return RatioCheck(
        num / (lp**a2 * seminorm**a1),
        True,
        {"alpha1": a1, "alpha2": a2, "lq": num, "lp": lp, "seminorm": seminorm},
    )
