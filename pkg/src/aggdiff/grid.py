"""Cell-centered radial finite-volume grids and nonnegative grid functions."""

from math import gamma as _gamma_fn, pi

import numpy as np

from .errors import ParameterDomainError


def sphere_area(d):
    """Surface area of the unit sphere in R^d (the (d-1)-sphere)."""
    return 2.0 * pi ** (d / 2.0) / _gamma_fn(d / 2.0)


def ball_volume(d):
    """Volume of the unit ball in R^d."""
    return sphere_area(d) / d


class RadialGrid:
    """Uniform cell-centered grid on [0, R] with d-dimensional volume weights.

    Cells are [i*dr, (i+1)*dr] with centers r_i = (i + 1/2)*dr.
    """

    def __init__(self, R, N, d):
        if R <= 0:
            raise ParameterDomainError(f"domain radius must be positive, got R={R}")
        if N < 4:
            raise ParameterDomainError(f"need at least 4 cells, got N={N}")
        if d < 2:
            raise ParameterDomainError(f"dimension must be >= 2, got d={d}")
        self.R = float(R)
        self.N = int(N)
        self.d = int(d)
        self.dr = self.R / self.N
        self.interfaces = np.linspace(0.0, self.R, self.N + 1)
        self.centers = 0.5 * (self.interfaces[:-1] + self.interfaces[1:])
        sd = sphere_area(self.d)
        self.areas = sd * self.interfaces ** (self.d - 1)
        self.volumes = (sd / self.d) * np.diff(self.interfaces**self.d)

    def __eq__(self, other):
        return (
            isinstance(other, RadialGrid)
            and (self.R, self.N, self.d) == (other.R, other.N, other.d)
        )

    def __hash__(self):
        return hash((self.R, self.N, self.d))

    def __repr__(self):
        return f"RadialGrid(R={self.R}, N={self.N}, d={self.d})"


class RadialGridFunction:
    """Nonnegative cell-averaged radial density on a RadialGrid."""

    def __init__(self, grid, values, _validate=True):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.N,):
            raise ValueError(f"expected {grid.N} cell values, got shape {values.shape}")
        if _validate and np.any(values < 0):
            worst = float(values.min())
            raise ParameterDomainError(f"density must be nonnegative (min value {worst:.3e})")
        self.grid = grid
        self.values = values

    @classmethod
    def from_callable(cls, grid, f):
        return cls(grid, np.asarray(f(grid.centers), dtype=float))

    def copy(self):
        return RadialGridFunction(self.grid, self.values.copy(), _validate=False)

    def mass(self):
        return float(np.dot(self.values, self.grid.volumes))

    def second_moment(self):
        return float(np.dot(self.values * self.grid.centers**2, self.grid.volumes))

    def max(self):
        return float(self.values.max())

    def lp_norm(self, p):
        if p == np.inf or p == "inf":
            return float(np.abs(self.values).max())
        p = float(p)
        if p < 1:
            raise ParameterDomainError(f"L^p norm requires p >= 1, got p={p}")
        return float(np.dot(np.abs(self.values) ** p, self.grid.volumes) ** (1.0 / p))

    def interpolate(self, radii):
        """Linear interpolation at arbitrary radii.

        Even symmetry at the origin (value clamps to the innermost cell) and
        zero beyond the domain radius.
        """
        radii = np.asarray(radii, dtype=float)
        return np.interp(radii, self.grid.centers, self.values, right=0.0)

    def support_radius(self, threshold_frac=1e-8):
        """Outer radius of the numerical support, by relative threshold."""
        peak = self.values.max()
        if peak <= 0:
            return 0.0
        above = np.nonzero(self.values > threshold_frac * peak)[0]
        if len(above) == 0:
            return 0.0
        return float(self.grid.interfaces[above[-1] + 1])


def l1_distance(f, g):
    """L^1 distance of two grid functions on the same grid."""
    if f.grid != g.grid:
        raise ValueError("grid mismatch in l1_distance")
    return float(np.dot(np.abs(f.values - g.values), f.grid.volumes))
