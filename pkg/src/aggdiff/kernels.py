"""Admissible interaction kernels and the nonlocal velocity field.

All kernels are radial and attractive: K(x) = k(|x|) with k non-increasing.
The solver needs the rescaled velocity lam^d (grad K)(lam .) * theta for
lam = e^tau; for radial densities this reduces to a 1D operator built from an
angular quadrature, with exact fast paths for the Newtonian kind (shell
theorem) and pure power tails (scale invariance up to a prefactor).
"""

import math
import threading
import warnings
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import (
    ConfigError,
    InvalidCacheError,
    NumericalToleranceError,
    ParameterDomainError,
)
from .grid import sphere_area

KERNEL_KINDS = ("smooth_compact", "power_tail", "newtonian", "gaussian")

#: fraction of `scale` below which the power tail is replaced by a smooth core
POWER_CORE_FRAC = 0.1


@dataclass(frozen=True)
class KernelSpec:
    """An interaction kernel: kind, tail exponent, length scale, amplitude."""

    kind: str
    gamma: float | None = None
    scale: float = 1.0
    strength: float = 1.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ParameterDomainError(
                f"unknown kernel kind {self.kind!r}; expected one of {KERNEL_KINDS}"
            )
        if self.kind == "power_tail" and self.gamma is None:
            raise ParameterDomainError("power_tail kernel requires a tail exponent gamma")
        if self.scale <= 0:
            raise ParameterDomainError(f"kernel scale must be positive, got {self.scale}")
        if self.strength <= 0:
            raise ParameterDomainError(
                f"kernel strength must be positive, got {self.strength}"
            )

    @property
    def core_radius(self):
        return POWER_CORE_FRAC * self.scale if self.kind == "power_tail" else None


def effective_gamma(spec, d):
    """Tail exponent gamma with |grad K| = O(r^-gamma); d by convention for L^1 kinds."""
    if spec.kind in ("smooth_compact", "gaussian"):
        return float(d)
    if spec.kind == "newtonian":
        return float(d - 1)
    g = float(spec.gamma)
    if not (d - 1 <= g <= d):
        raise ParameterDomainError(
            f"tail exponent must lie in [d-1, d] = [{d-1}, {d}], got gamma={g}"
        )
    return g


def grad_in_l1(spec):
    """Whether grad K is integrable on R^d (finite interaction length-scale)."""
    return spec.kind in ("smooth_compact", "gaussian")


def check_regime_compatibility(spec, params):
    """Warn when the long-range tail voids the convergence-rate prediction."""
    g = effective_gamma(spec, params.d)
    if params.critical and g <= params.d - 1 + 1e-12:
        warnings.warn(
            "Newtonian-range tail (gamma = d-1) combined with the critical diffusion "
            "exponent is outside the regime with a predicted convergence rate; the run "
            "proceeds, but convergence to the pure-diffusion profile is not expected.",
            stacklevel=2,
        )
        return False
    return True


def grad_k(spec, r, d):
    """Signed radial derivative k'(r) <= 0; vectorized over r > 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ParameterDomainError("radius must be positive")
    s, L = spec.strength, spec.scale
    if spec.kind == "gaussian":
        out = -s * (r / L**2) * np.exp(-0.5 * (r / L) ** 2)
    elif spec.kind == "smooth_compact":
        z = r / L
        out = np.where(z < 1.0, -4.0 * s * (r / L**2) * np.maximum(1.0 - z**2, 0.0), 0.0)
    elif spec.kind == "newtonian":
        if d < 2:
            raise ParameterDomainError("newtonian kernel requires d >= 2")
        out = -s / (sphere_area(d) * r ** (d - 1))
    else:  # power_tail: exact tail r^-gamma beyond the core, linear core inside
        g = float(spec.gamma)
        rc = spec.core_radius
        out = np.where(r >= rc, -s * r ** (-g), -s * rc ** (-g - 1.0) * r)
    return float(out) if out.ndim == 0 else out


def kernel_value(spec, r, d):
    """k(r) itself (only needed for monotonicity checks and reporting)."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ParameterDomainError("radius must be positive")
    s, L = spec.strength, spec.scale
    if spec.kind == "gaussian":
        out = s * np.exp(-0.5 * (r / L) ** 2)
    elif spec.kind == "smooth_compact":
        out = s * np.maximum(1.0 - (r / L) ** 2, 0.0) ** 2
    elif spec.kind == "newtonian":
        sd = sphere_area(d)
        if d == 2:
            out = -s * np.log(r) / sd
        else:
            out = s / ((d - 2) * sd * r ** (d - 2))
    else:
        g = float(spec.gamma)
        rc = spec.core_radius
        if abs(g - 1.0) < 1e-12:
            tail = -s * np.log(np.maximum(r, rc))
            k_rc = -s * math.log(rc)
        else:
            tail = s * np.maximum(r, rc) ** (1.0 - g) / (g - 1.0)
            k_rc = s * rc ** (1.0 - g) / (g - 1.0)
        core = k_rc + 0.5 * s * rc ** (-g - 1.0) * (rc**2 - r**2)
        out = np.where(r >= rc, tail, core)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# admissibility report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    passed: bool
    max_violation: float
    detail: str = ""


@dataclass(frozen=True)
class AdmissibilityReport:
    spec: KernelSpec
    d: int
    monotone: ConditionCheck        # k non-increasing
    near_origin: ConditionCheck     # k'' and k'/r monotone on (0, delta)
    third_derivative: ConditionCheck  # |k'''| r^{d+1} bounded
    delta: float

    @property
    def admissible(self):
        return (
            self.monotone.passed
            and self.near_origin.passed
            and self.third_derivative.passed
        )


def _monotone_violation(values):
    """Max violation magnitude of monotonicity (either direction) of a sample."""
    diffs = np.diff(values)
    scale = np.max(np.abs(values)) + 1e-300
    up = -np.minimum(diffs, 0.0).sum()   # violation of nondecreasing
    down = np.maximum(diffs, 0.0).sum()  # violation of nonincreasing
    return min(up, down) / scale


def admissibility_report(spec, d, k_of_r=None, grad_k_of_r=None, n_samples=400):
    """Sampled check of the admissibility conditions on log-spaced grids.

    Custom radial profiles can be screened by passing k_of_r / grad_k_of_r
    callables; defaults use the builtin kind.
    """
    if k_of_r is None:
        k_of_r = lambda r: kernel_value(spec, r, d)
    if grad_k_of_r is None:
        grad_k_of_r = lambda r: grad_k(spec, r, d)
    delta = spec.scale / 10.0

    # (monotone) k non-increasing over several decades
    r_mono = np.geomspace(1e-3 * spec.scale, 1e3 * spec.scale, n_samples)
    kv = np.asarray(k_of_r(r_mono), dtype=float)
    incr = np.maximum(np.diff(kv), 0.0)
    mono_viol = float(incr.sum() / (np.max(np.abs(kv)) + 1e-300))
    mono = ConditionCheck("k non-increasing", mono_viol <= 1e-10, mono_viol)

    # (near origin) monotonicity of k'' and k'/r on (0, delta)
    r_near = np.geomspace(1e-4 * spec.scale, delta, n_samples)
    kp = np.asarray(grad_k_of_r(r_near), dtype=float)
    h = 1e-5 * r_near
    kpp = (np.asarray(grad_k_of_r(r_near + h)) - np.asarray(grad_k_of_r(r_near - h))) / (
        2.0 * h
    )
    v1 = _monotone_violation(kpp)
    v2 = _monotone_violation(kp / r_near)
    near_viol = float(max(v1, v2))
    near = ConditionCheck(
        "k'' and k'/r monotone near 0",
        near_viol <= 1e-6,
        near_viol,
        detail=f"delta={delta:g}",
    )

    # (third derivative) |k'''(r)| r^{d+1} bounded: its log-log growth slope over
    # the outer decade of the sample must be nonpositive (up to slack)
    r_bd = np.geomspace(1e-2 * spec.scale, 1e3 * spec.scale, n_samples)
    h = 1e-4 * r_bd
    kppp = (
        np.asarray(grad_k_of_r(r_bd + h))
        - 2.0 * np.asarray(grad_k_of_r(r_bd))
        + np.asarray(grad_k_of_r(r_bd - h))
    ) / h**2
    weighted = np.abs(kppp) * r_bd ** (d + 1)
    tail = weighted[r_bd >= 1e2 * spec.scale]
    r_tail = r_bd[r_bd >= 1e2 * spec.scale]
    positive = tail > 1e-30 * weighted.max()
    if positive.sum() >= 2:
        slope = np.polyfit(np.log(r_tail[positive]), np.log(tail[positive]), 1)[0]
    else:
        slope = -np.inf  # weighted third derivative vanishes at long range
    bd_viol = float(max(slope, 0.0))
    bd = ConditionCheck("|k'''| r^{d+1} bounded", bd_viol <= 0.1, bd_viol)

    return AdmissibilityReport(
        spec=spec, d=d, monotone=mono, near_origin=near, third_derivative=bd, delta=delta
    )


# ---------------------------------------------------------------------------
# rescaled-kernel norm growth
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RescaledKernelNorms:
    """Norms of lam^d grad K(lam .) split at |x| = 1, with empirical constants."""

    lam: float
    near_L1: float
    far_Lq: float
    far_Linf: float
    q: float
    near_C: float
    far_Lq_C: float
    far_Linf_C: float


def _quad(f, a, b, points=None):
    kwargs = {"limit": 400, "epsabs": 1e-13, "epsrel": 1e-9}
    if points is not None and np.isfinite(b):
        pts = [p for p in points if a < p < b]
        if pts:
            kwargs["points"] = pts
    with warnings.catch_warnings():
        # slow power-law tails trip the heuristic; the residual check below governs
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, a, b, **kwargs)
    if err > 1e-5 * abs(val) + 1e-12:
        raise NumericalToleranceError(
            f"kernel-norm quadrature residual {err:.3e} for value {val:.3e}"
        )
    return val


def rescaled_norms(spec, d, lam, q):
    """Growth of the rescaled kernel gradient near and far from the origin.

    near_L1 is the L^1 norm over the unit ball, far_Lq / far_Linf the L^q and
    sup norms outside it.  Contracts (for tail exponent gamma): near_L1 grows
    like lam^{d-gamma} (log lam when gamma = d) and the far-field norms decay
    accordingly; the empirical constants C divide out the predicted growth.
    """
    if lam < 1:
        raise ParameterDomainError(f"scale factor must satisfy lam >= 1, got {lam}")
    if q <= d / (d - 1):
        raise ParameterDomainError(
            f"far-field exponent must satisfy q > d/(d-1) = {d/(d-1):g}, got q={q}"
        )
    g = effective_gamma(spec, d)
    sd = sphere_area(d)
    pts = [spec.scale]
    if spec.core_radius:
        pts.append(spec.core_radius)

    # substitution s = lam * r turns the unit-ball integral into one over [0, lam]
    near = sd * _quad(
        lambda s: abs(grad_k(spec, s, d)) * s ** (d - 1), 0.0, lam, points=pts
    )

    if spec.kind == "smooth_compact" and lam > spec.scale:
        far_q = 0.0
    else:
        upper = np.inf
        if spec.kind == "smooth_compact":
            upper = spec.scale
        tail_int = _quad(
            lambda s: abs(grad_k(spec, s, d)) ** q * s ** (d - 1), lam, upper, points=pts
        )
        far_q = (sd * lam ** (q * d - d) * tail_int) ** (1.0 / q)

    # |k'| is non-increasing beyond max(core, argmax); sample to be safe
    s_far = np.geomspace(lam, max(10.0 * lam, 100.0 * spec.scale, lam + 1.0), 200)
    far_inf = lam**d * float(np.max(np.abs(grad_k(spec, s_far, d))))

    if g == d:
        near_pred = 1.0 + math.log(lam)
    else:
        near_pred = 1.0 + lam ** (d - g)
    return RescaledKernelNorms(
        lam=float(lam),
        near_L1=near,
        far_Lq=far_q,
        far_Linf=far_inf,
        q=float(q),
        near_C=near / near_pred,
        far_Lq_C=far_q / lam ** (d - g) if far_q > 0 else 0.0,
        far_Linf_C=far_inf / (1.0 + lam ** (d - g)),
    )


# ---------------------------------------------------------------------------
# radial velocity operator
# ---------------------------------------------------------------------------

#: spacing of the tau-ladder on which angular quadrature matrices are cached
LADDER_DTAU = 0.1
#: angular node counts tried by the adaptive doubling
ANGULAR_NODE_LADDER = (64, 128, 256, 512)


def _cutoff_radius(spec):
    """Radius beyond which |grad K| is negligible (None for power-law tails)."""
    if spec.kind == "smooth_compact":
        return spec.scale
    if spec.kind == "gaussian":
        return 8.0 * spec.scale
    return None


class RadialVelocityOperator:
    """Computes V(r) = radial component of (lam^d grad K(lam .) * theta).

    The angular integral is precomputed into a matrix G(r_i, s_j) per value of
    lam = e^tau on a coarse tau ladder; applications interpolate linearly
    between the two bracketing rungs.  The matrix cache is read-mostly: lookups
    are lock-free, population is serialized by a single lock.
    """

    def __init__(self, spec, grid, targets="interfaces"):
        self.spec = spec
        self.grid = grid
        if isinstance(targets, str):
            if targets == "interfaces":
                self.targets = grid.interfaces[1:-1].copy()
            elif targets == "centers":
                self.targets = grid.centers.copy()
            else:
                raise ValueError(f"unknown target set {targets!r}")
        else:
            self.targets = np.asarray(targets, dtype=float)
        self._cache = OrderedDict()
        self._cache_max = 4
        self._lock = threading.Lock()
        self._n_angle = ANGULAR_NODE_LADDER[0]
        d = grid.d
        # surface area of the unit sphere in R^{d-1} (2 points when d = 2)
        self._angular_factor = 2.0 if d == 2 else sphere_area(d - 1)

    # -- fast paths ---------------------------------------------------------

    def _newtonian_shell(self, lam, theta):
        """Shell theorem: V(r) = -strength * mass_inside(r) / (S_d r^{d-1}), times lam."""
        g = self.grid
        cummass = np.concatenate([[0.0], np.cumsum(theta.values * g.volumes)])
        mass_at = np.interp(self.targets, g.interfaces, cummass)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = -self.spec.strength * mass_at / (sphere_area(g.d) * self.targets ** (g.d - 1))
        v[self.targets == 0.0] = 0.0
        return lam * v

    # -- quadrature matrix --------------------------------------------------

    def _scaled_grad(self, lam, rho):
        """lam^d k'(lam rho), safe for rho = 0 (limit 0 for all builtin kinds)."""
        rho = np.asarray(rho)
        safe = np.maximum(rho, 1e-300)
        out = lam**self.grid.d * grad_k(self.spec, lam * safe, self.grid.d)
        return np.where(rho > 0, out, 0.0)

    def _build_matrix(self, lam, n_angle):
        g = self.grid
        d = g.d
        r = self.targets[:, None]            # (T, 1)
        s = g.centers[None, :]               # (1, N)
        cutoff = _cutoff_radius(self.spec)
        if cutoff is not None:
            rho_max = cutoff / lam
            cos_min = np.clip((r**2 + s**2 - rho_max**2) / (2.0 * r * s), -1.0, 1.0)
            phi_max = np.arccos(cos_min)     # (T, N); 0 where the pair is out of range
        else:
            phi_max = np.full((r.shape[0], s.shape[1]), math.pi)

        nodes, weights = np.polynomial.legendre.leggauss(n_angle)
        # map [-1, 1] -> [0, phi_max] per matrix entry, in row blocks
        G = np.zeros((self.targets.size, g.N))
        w_cell = g.volumes / sphere_area(d)
        block = max(1, int(2e6 // (g.N * n_angle)))
        for i0 in range(0, self.targets.size, block):
            i1 = min(i0 + block, self.targets.size)
            pm = phi_max[i0:i1, :, None]
            phi = 0.5 * pm * (nodes + 1.0)
            wq = 0.5 * pm * weights
            rr = self.targets[i0:i1, None, None]
            ss = s[..., None]
            cphi = np.cos(phi)
            rho = np.sqrt(np.maximum(rr**2 + ss**2 - 2.0 * rr * ss * cphi, 0.0))
            kval = self._scaled_grad(lam, rho)
            with np.errstate(divide="ignore", invalid="ignore"):
                integrand = kval * (rr - ss * cphi) / np.where(rho > 0, rho, 1.0)
            integrand = np.where(rho > 0, integrand, 0.0)
            if d > 2:
                integrand = integrand * np.sin(phi) ** (d - 2)
            G[i0:i1, :] = self._angular_factor * np.sum(integrand * wq, axis=2)
        return G * w_cell[None, :]

    def _matrix_for(self, lam):
        key = None if lam == 1.0 else round(math.log(lam) / LADDER_DTAU)
        # exact-lam build for lam==1 convenience; ladder rungs otherwise
        return self._matrix_at_key(key, lam)

    def _matrix_at_key(self, key, lam):
        G = self._cache.get(key)
        if G is not None:
            return G
        with self._lock:
            G = self._cache.get(key)
            if G is not None:
                return G
            G = self._build_adaptive(lam)
            self._cache[key] = G
            while len(self._cache) > self._cache_max:
                self._cache.popitem(last=False)
        return G

    def _build_adaptive(self, lam):
        probe = np.ones(self.grid.N)
        G = self._build_matrix(lam, self._n_angle)
        v = G @ probe
        for n in ANGULAR_NODE_LADDER:
            if n <= self._n_angle:
                continue
            G2 = self._build_matrix(lam, n)
            v2 = G2 @ probe
            scale = np.max(np.abs(v2)) + 1e-300
            if np.max(np.abs(v2 - v)) <= 1e-6 * scale:
                return G
            G, v = G2, v2
            self._n_angle = n
        return G

    # -- application --------------------------------------------------------

    def __call__(self, tau, theta):
        if theta.grid != self.grid:
            raise InvalidCacheError(
                f"velocity operator built for {self.grid} applied to data on {theta.grid}"
            )
        if self.spec.kind == "newtonian":
            return self._newtonian_shell(math.exp(tau), theta)
        if self.spec.kind == "power_tail":
            # pure power tails rescale exactly outside the (shrinking) core;
            # once the core is unresolved, reuse a single reference matrix
            lam = math.exp(tau)
            rc_eff = self.spec.core_radius / lam
            if rc_eff < 0.1 * self.grid.dr:
                lam_ref = self.spec.core_radius / (0.1 * self.grid.dr)
                g = effective_gamma(self.spec, self.grid.d)
                G = self._matrix_at_key("power_ref", lam_ref)
                return (lam / lam_ref) ** (self.grid.d - g) * (G @ theta.values)
        if tau == 0.0:
            return self._matrix_at_key(None, 1.0) @ theta.values
        k = tau / LADDER_DTAU
        k0 = int(math.floor(k))
        w = k - k0
        G0 = self._matrix_at_key(k0, math.exp(k0 * LADDER_DTAU))
        if w < 1e-12:
            return G0 @ theta.values
        G1 = self._matrix_at_key(k0 + 1, math.exp((k0 + 1) * LADDER_DTAU))
        return (1.0 - w) * (G0 @ theta.values) + w * (G1 @ theta.values)


def velocity_radial(spec, params, tau, theta, targets="centers", operator=None):
    """One-shot radial velocity evaluation (builds a fresh operator unless given)."""
    if operator is None:
        operator = RadialVelocityOperator(spec, theta.grid, targets=targets)
    return operator(tau, theta)


# ---------------------------------------------------------------------------
# 2D Cartesian cross-check velocity
# ---------------------------------------------------------------------------


def _kernel_gradient_grids(spec, n_pad, h):
    """Sampled (d/dx K, d/dy K) on the zero-padded FFT grid, origin at [0,0]."""
    idx = np.fft.fftfreq(n_pad, d=1.0 / n_pad)  # 0, 1, ..., -1 ordering
    X = idx[:, None] * h
    Y = idx[None, :] * h
    R = np.hypot(X, Y)
    safe = np.maximum(R, 1e-300)
    kp = np.where(R > 0, grad_k(spec, np.maximum(R, 1e-300), 2), 0.0)
    return kp * X / safe, kp * Y / safe


def velocity_cartesian_2d(spec, theta2d, h, pad_tol=1e-8):
    """(grad K * theta) on a square grid by zero-padded FFT convolution.

    theta2d is an (n, n) nonnegative density with spacing h.  Raises when the
    kernel tail is truncated by the padding above pad_tol (relative to the
    kernel peak gradient).
    """
    theta2d = np.asarray(theta2d, dtype=float)
    n = theta2d.shape[0]
    if theta2d.shape != (n, n):
        raise ConfigError(f"expected a square grid, got shape {theta2d.shape}")
    if np.any(theta2d < 0):
        raise ParameterDomainError("density must be nonnegative")
    n_pad = 2 * n
    half_extent = (n_pad // 2) * h
    tail = abs(float(grad_k(spec, half_extent, 2)))
    peak = float(np.max(np.abs(grad_k(spec, np.geomspace(1e-3 * spec.scale, half_extent, 64), 2))))
    if peak > 0 and tail > pad_tol * peak:
        raise ConfigError(
            f"kernel tail at padded-domain edge ({tail:.3e}) exceeds truncation "
            f"tolerance {pad_tol:g} * peak ({peak:.3e}); enlarge domain or padding"
        )
    Gx, Gy = _kernel_gradient_grids(spec, n_pad, h)
    src = np.zeros((n_pad, n_pad))
    src[:n, :n] = theta2d
    F = np.fft.rfft2(src)
    cell = h * h
    vx = np.fft.irfft2(np.fft.rfft2(Gx) * F, s=(n_pad, n_pad))[:n, :n] * cell
    vy = np.fft.irfft2(np.fft.rfft2(Gy) * F, s=(n_pad, n_pad))[:n, :n] * cell
    return vx, vy
