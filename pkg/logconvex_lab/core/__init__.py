"""Core engines for the log-convexity laboratory."""

from logconvex_lab.core.errors import (
    LabError,
    InvalidInputError,
    SupercriticalError,
    InvalidGeometryError,
    SingularPointError,
    UnsupportedError,
    UndefinedRatioError,
    NumericalFailure,
    RegressionFailure,
    InternalError,
)

from logconvex_lab.core.models import (
    Box,
    Annulus,
    DomainSpec,
    Grid,
    Field,
    EigenSystem,
    SpectralState,
    EvolutionTrace,
    WeightSpec,
    WeightStack,
    GridWeightStack,
    ProfileReport,
    CutoffSpec,
    FrequencyTrace,
    DifferentialCheck,
    CommutatorReport,
    InequalityReport,
    RadialWeightParams,
    CoefficientTable,
    GroupVerdict,
    SignCertificate,
    SearchResult,
    ConstantEntry,
    ConstantChain,
    ObservationReport,
    FitResult,
    RunConfig,
    ReportDocument,
    ExperimentOutcome,
    ProgressCallback,
)

from logconvex_lab.core.utils import (
    checkout_dir,
    normalize_path,
    resolve_jobs,
    make_rng,
)

from logconvex_lab.core.logger import (
    RunLogger,
    NullLogger,
    create_logger,
    configure_logging,
)

from logconvex_lab.core.domain import (
    build_grid,
    build_basis,
    build_interval_basis,
    build_rectangle_basis,
    build_radial_schrodinger_basis,
    integrate,
)

from logconvex_lab.core.heat import (
    evolve,
    sample,
    compute_norm,
    random_state,
    check_log_convexity,
    check_regularizing,
    weighted_energy_monotone,
)

from logconvex_lab.core.weights import (
    eval_weight_stack,
    stack_on_grid,
    weight_profile,
    weight_gap,
)

from logconvex_lab.core.frequency import (
    assemble_f,
    apply_operators,
    frequency_value,
    commutator_form,
    verify_differential_inequalities,
    three_time_interpolation,
)

from logconvex_lab.core.certifier import (
    expand_radial_commutator,
    certify_sign,
    reproduce_reference_verdicts,
    search_parameters,
    mu_threshold,
    critical_mu,
)

from logconvex_lab.core.constants import (
    regional_decay_time,
    observation_chain,
    telescoped_observability,
    spectral_from_observation,
    observation_from_spectral,
    localized_observation_constants,
    hbar_selection,
)

from logconvex_lab.core.inequalities import (
    check_functional_inequality,
)

from logconvex_lab.core.fitting import (
    empirical_fit,
)

from logconvex_lab.core.reports import (
    write_report,
    emit_plot_data,
)

__all__ = [
    # Errors
    "LabError",
    "InvalidInputError",
    "SupercriticalError",
    "InvalidGeometryError",
    "SingularPointError",
    "UnsupportedError",
    "UndefinedRatioError",
    "NumericalFailure",
    "RegressionFailure",
    "InternalError",
    # Models
    "Box",
    "Annulus",
    "DomainSpec",
    "Grid",
    "Field",
    "EigenSystem",
    "SpectralState",
    "EvolutionTrace",
    "WeightSpec",
    "WeightStack",
    "GridWeightStack",
    "ProfileReport",
    "CutoffSpec",
    "FrequencyTrace",
    "DifferentialCheck",
    "CommutatorReport",
    "InequalityReport",
    "RadialWeightParams",
    "CoefficientTable",
    "GroupVerdict",
    "SignCertificate",
    "SearchResult",
    "ConstantEntry",
    "ConstantChain",
    "ObservationReport",
    "FitResult",
    "RunConfig",
    "ReportDocument",
    "ExperimentOutcome",
    "ProgressCallback",
    # Utils
    "checkout_dir",
    "normalize_path",
    "resolve_jobs",
    "make_rng",
    # Logger
    "RunLogger",
    "NullLogger",
    "create_logger",
    "configure_logging",
    # Domain
    "build_grid",
    "build_basis",
    "build_interval_basis",
    "build_rectangle_basis",
    "build_radial_schrodinger_basis",
    "integrate",
    # Heat
    "evolve",
    "sample",
    "compute_norm",
    "random_state",
    "check_log_convexity",
    "check_regularizing",
    "weighted_energy_monotone",
    # Weights
    "eval_weight_stack",
    "stack_on_grid",
    "weight_profile",
    "weight_gap",
    # Frequency
    "assemble_f",
    "apply_operators",
    "frequency_value",
    "commutator_form",
    "verify_differential_inequalities",
    "three_time_interpolation",
    # Certifier
    "expand_radial_commutator",
    "certify_sign",
    "reproduce_reference_verdicts",
    "search_parameters",
    "mu_threshold",
    "critical_mu",
    # Constants
    "regional_decay_time",
    "observation_chain",
    "telescoped_observability",
    "spectral_from_observation",
    "observation_from_spectral",
    "localized_observation_constants",
    "hbar_selection",
    # Inequalities
    "check_functional_inequality",
    # Fitting
    "empirical_fit",
    # Reports
    "write_report",
    "emit_plot_data",
]
