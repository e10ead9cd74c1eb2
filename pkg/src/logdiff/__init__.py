"""Numerical laboratory for the logarithmic diffusion equation.

The package solves ``u_t = Lap(ln u)`` and its power-law regularizations
``u_t = Lap((u^m - 1)/m)`` on regular grids, and measures the quantities
that control local behavior of positive solutions: integral Harnack
constants, cutoff gradient energies, flux integrals, intrinsic pointwise
positivity factors, derivative growth at interior points, and the stability
of all of these as the power exponent tends to zero.
"""

from .errors import DomainError, GeometryError, ParameterError, SolverError
from .grid import (
    Cube,
    Cutoff,
    Cylinder,
    Field,
    Grid,
    SpaceTimeSlab,
    average,
    cube_volume,
    gradient,
    integrate,
    interior_slices,
    laplacian,
    read_field,
    read_slab,
    write_field,
    write_slab,
)
from .oracles import (
    FIXTURES,
    BarenblattFD,
    ExactSolution,
    ExpSteady,
    Lump2D,
    OrderReport,
    build_fixture,
    convergence_order,
    fit_order,
    residual_check,
)
from .solvers import (
    QuasilinearFlux,
    SolverConfig,
    flux_divergence,
    residual_norm,
    solve_log_diffusion,
    solve_porous_medium,
    solve_quasilinear,
)
from .functionals import (
    FunctionalSet,
    degeneracy_ratio,
    degeneracy_ratio_pme,
    ess_inf,
    ess_sup,
    flux_l1,
    functional_set,
    inf_mass,
    intrinsic_scale,
    intrinsic_scale_pme,
    log_gradient_energy,
    log_oscillation,
    moment_scaling_exponent,
    power_gradient_energy,
    power_oscillation,
    sup_mass,
    time_scaling_exponent,
    time_scaling_exponent_pme,
)
from .harnack import (
    DistributionalCheck,
    EnergyReport,
    FluxReport,
    HarnackReport,
    JensenCheck,
    PointwiseFit,
    PointwiseHarnackReport,
    check_energy_lemma,
    check_energy_lemma_pme,
    check_flux_corollary,
    check_l1_harnack,
    check_l1_harnack_pme,
    check_pointwise_harnack,
    distributional_identity_check,
    fit_pointwise_constants,
    jensen_check,
    sample_cylinders,
)
from .analyticity import (
    AnalyticityReport,
    DerivativeTable,
    GrowthFit,
    SupBoundsReport,
    SupExponentFit,
    analyticity_report,
    derivative_table,
    fit_derivative_growth,
    fit_sup_bound_exponents,
    intrinsic_rescale,
    normalized_spatial_roots,
    rescale_residual,
    rescaled_sup_bounds,
)
from .limit_m import (
    MassBoundVerdict,
    MSweepEntry,
    MSweepResult,
    UniformVerdict,
    check_mass_lower_bound,
    check_uniform_conditions,
    log_approx_error,
    run_m_sweep,
    taylor_gap_bound,
)

__version__ = "0.1.0"

__all__ = [
    "AnalyticityReport",
    "BarenblattFD",
    "Cube",
    "Cutoff",
    "Cylinder",
    "DerivativeTable",
    "DistributionalCheck",
    "DomainError",
    "EnergyReport",
    "ExactSolution",
    "ExpSteady",
    "FIXTURES",
    "Field",
    "FluxReport",
    "FunctionalSet",
    "GeometryError",
    "Grid",
    "GrowthFit",
    "HarnackReport",
    "JensenCheck",
    "Lump2D",
    "MSweepEntry",
    "MSweepResult",
    "MassBoundVerdict",
    "OrderReport",
    "ParameterError",
    "PointwiseFit",
    "PointwiseHarnackReport",
    "QuasilinearFlux",
    "SolverConfig",
    "SolverError",
    "SpaceTimeSlab",
    "SupBoundsReport",
    "SupExponentFit",
    "UniformVerdict",
    "analyticity_report",
    "average",
    "build_fixture",
    "check_energy_lemma",
    "check_energy_lemma_pme",
    "check_flux_corollary",
    "check_l1_harnack",
    "check_l1_harnack_pme",
    "check_mass_lower_bound",
    "check_pointwise_harnack",
    "check_uniform_conditions",
    "convergence_order",
    "cube_volume",
    "degeneracy_ratio",
    "degeneracy_ratio_pme",
    "derivative_table",
    "distributional_identity_check",
    "ess_inf",
    "ess_sup",
    "fit_derivative_growth",
    "fit_order",
    "fit_pointwise_constants",
    "fit_sup_bound_exponents",
    "flux_divergence",
    "flux_l1",
    "functional_set",
    "gradient",
    "inf_mass",
    "integrate",
    "interior_slices",
    "intrinsic_rescale",
    "intrinsic_scale",
    "intrinsic_scale_pme",
    "jensen_check",
    "laplacian",
    "log_approx_error",
    "log_gradient_energy",
    "log_oscillation",
    "moment_scaling_exponent",
    "normalized_spatial_roots",
    "power_gradient_energy",
    "power_oscillation",
    "read_field",
    "read_slab",
    "rescale_residual",
    "rescaled_sup_bounds",
    "residual_check",
    "residual_norm",
    "run_m_sweep",
    "sample_cylinders",
    "solve_log_diffusion",
    "solve_porous_medium",
    "solve_quasilinear",
    "sup_mass",
    "taylor_gap_bound",
    "time_scaling_exponent",
    "time_scaling_exponent_pme",
    "write_field",
    "write_slab",
]
