"""Aggregation-diffusion equations in self-similar variables: ground states,
a rescaled-frame finite-volume solver, and entropy/rate diagnostics."""

from .barenblatt import BarenblattProfile, ground_state, selfsim_solution
from .diagnostics import (
    DiagnosticsRow,
    PredictedRates,
    RateReport,
    convergence_report,
    fit_power_law,
    predicted_rates,
)
from .entropy import (
    ck_check,
    entropy_H,
    entropy_report,
    gns_check,
    lsi_check,
    production_I,
    relative_entropy,
)
from .errors import (
    AggDiffError,
    BlowUpDetected,
    ConfigError,
    InvalidCacheError,
    NumericalToleranceError,
    ParameterDomainError,
    SchemeError,
)
from .grid import RadialGrid, RadialGridFunction, l1_distance
from .kernels import (
    KernelSpec,
    RadialVelocityOperator,
    admissibility_report,
    rescaled_norms,
    velocity_radial,
)
from .scaling import (
    ProblemParams,
    derive_params,
    from_selfsim,
    t_of_tau,
    tau_of_t,
    to_selfsim,
)
from .solver import Trajectory, initial_data, run, step

__version__ = "0.1.0"

__all__ = [
    "AggDiffError",
    "BarenblattProfile",
    "BlowUpDetected",
    "ConfigError",
    "DiagnosticsRow",
    "InvalidCacheError",
    "KernelSpec",
    "NumericalToleranceError",
    "ParameterDomainError",
    "PredictedRates",
    "ProblemParams",
    "RadialGrid",
    "RadialGridFunction",
    "RadialVelocityOperator",
    "RateReport",
    "SchemeError",
    "Trajectory",
    "admissibility_report",
    "ck_check",
    "convergence_report",
    "derive_params",
    "entropy_H",
    "entropy_report",
    "fit_power_law",
    "from_selfsim",
    "gns_check",
    "ground_state",
    "initial_data",
    "l1_distance",
    "lsi_check",
    "predicted_rates",
    "production_I",
    "relative_entropy",
    "rescaled_norms",
    "run",
    "selfsim_solution",
    "step",
    "t_of_tau",
    "tau_of_t",
    "to_selfsim",
    "velocity_radial",
]
