"""Ground-state profiles and spreading self-similar solutions of u_t = Delta u^m.

The rescaled steady state theta_M is the Gaussian M (2 pi)^{-d/2} e^{-|eta|^2/2}
for m = 1 and the compactly supported profile
(C1 - (m-1)/(2m) |eta|^2)_+^{1/(m-1)} for m > 1, with C1 fixed by the mass.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import NumericalToleranceError, ParameterDomainError
from .grid import RadialGridFunction, sphere_area

#: default bisection bracket and relative mass tolerance for C1
C1_BRACKET = (1e-6, 1e3)
C1_MASS_RTOL = 1e-12


def _mass_of_c1(params, c1):
    """Total mass of the m>1 profile with normalization constant c1 (closed form)."""
    m, d = params.m, params.d
    a = (m - 1.0) / (2.0 * m)
    # radial integral of (c1 - a r^2)_+^{1/(m-1)} r^{d-1} reduces to a Beta function
    from scipy.special import beta as beta_fn

    expo = 1.0 / (m - 1.0)
    coef = 0.5 * sphere_area(d) * a ** (-d / 2.0) * beta_fn(d / 2.0, expo + 1.0)
    return coef * c1 ** (expo + d / 2.0)


def _solve_c1(params, bracket=C1_BRACKET, rtol=C1_MASS_RTOL):
    """Bisection for C1 on the (strictly increasing) closed-form mass map."""
    lo, hi = bracket
    M = params.M
    f_lo = _mass_of_c1(params, lo) - M
    f_hi = _mass_of_c1(params, hi) - M
    if f_lo > 0 or f_hi < 0:
        raise NumericalToleranceError(
            f"C1 bracket [{lo:g}, {hi:g}] does not contain the mass-{M:g} root "
            f"(mass range [{f_lo + M:.3e}, {f_hi + M:.3e}])"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        res = _mass_of_c1(params, mid) - M
        if abs(res) <= rtol * M:
            return mid
        if res < 0:
            lo = mid
        else:
            hi = mid
    raise NumericalToleranceError(
        f"C1 bisection did not converge; bracket [{lo:.17g}, {hi:.17g}]"
    )


@dataclass(frozen=True)
class BarenblattProfile:
    """Rescaled-frame ground state theta_M, evaluable pointwise."""

    params: object
    C1: float | None
    support_radius: float
    _gauss_amp: float = field(default=0.0, repr=False)

    def __call__(self, eta):
        """Evaluate theta_M at radii |eta| (exact pointwise formula)."""
        r = np.asarray(eta, dtype=float)
        m = self.params.m
        if m == 1.0:
            out = self._gauss_amp * np.exp(-0.5 * r**2)
        else:
            a = (m - 1.0) / (2.0 * m)
            out = np.maximum(self.C1 - a * r**2, 0.0) ** (1.0 / (m - 1.0))
        return float(out) if out.ndim == 0 else out

    def peak(self):
        return float(self(0.0))

    def on_grid(self, grid):
        """Exact pointwise sample on a radial grid (no interpolation)."""
        return RadialGridFunction(grid, self(grid.centers))


def ground_state(params, bracket=C1_BRACKET, rtol=C1_MASS_RTOL):
    """Construct the unique nonnegative steady profile with mass params.M."""
    if params.m == 1.0:
        amp = params.M * (2.0 * math.pi) ** (-params.d / 2.0)
        return BarenblattProfile(
            params=params, C1=None, support_radius=math.inf, _gauss_amp=amp
        )
    c1 = _solve_c1(params, bracket=bracket, rtol=rtol)
    m = params.m
    support = math.sqrt(2.0 * m * c1 / (m - 1.0))
    return BarenblattProfile(params=params, C1=c1, support_radius=support)


def selfsim_solution(profile, t, x):
    """Spreading solution U(t, x; M) = (1+t/beta)^{-d beta} theta_M((1+t/beta)^{-beta} x)."""
    if t < 0:
        raise ParameterDomainError("time must be nonnegative")
    beta = profile.params.beta
    d = profile.params.d
    s = 1.0 + t / beta
    return s ** (-d * beta) * profile(s ** (-beta) * np.asarray(x, dtype=float))


def lp_norm_of_profile(profile, p, quad_rtol=1e-10):
    """L^p norm of theta_M by adaptive radial quadrature (sup for p = inf)."""
    params = profile.params
    if p == np.inf or p == "inf":
        return profile.peak()
    p = float(p)
    if p < 1:
        raise ParameterDomainError(f"L^p norm requires p >= 1, got p={p}")
    upper = profile.support_radius
    if not math.isfinite(upper):
        # Gaussian tails: 30 standard deviations is far beyond double precision
        upper = 30.0
    sd = sphere_area(params.d)

    def integrand(r):
        return profile(r) ** p * r ** (params.d - 1)

    val, err = integrate.quad(integrand, 0.0, upper, epsrel=quad_rtol, limit=200)
    if val > 0 and err > 1e-6 * val:
        raise NumericalToleranceError(
            f"L^{p} quadrature residual {err:.3e} too large for value {val:.3e}"
        )
    return (sd * val) ** (1.0 / p)
