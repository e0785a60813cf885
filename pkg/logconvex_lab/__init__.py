"""Logconvex Lab - numerical checks of log-convexity, frequency and observability estimates.

High-level API:
    from logconvex_lab import DomainSpec, build_basis, random_state, check_log_convexity
    from logconvex_lab.core.utils import make_rng

    domain = DomainSpec.from_dict({"kind": "interval", "extents": [3.14159]})
    system = build_basis(domain, cells=512, modes=32)
    u0 = random_state(system, make_rng(0))

    report = check_log_convexity(u0, T=1.0)
    print(f"log-convexity min slack: {report.min_slack:.3e}")

    # Sign certificate for an annulus weight
    from logconvex_lab import RadialWeightParams, expand_radial_commutator, certify_sign
    table = expand_radial_commutator(RadialWeightParams(3, 0.25, 0.25, 1 / 16, 1))
    print(certify_sign(table).verdict)

The command-line front end is `python -m logconvex_lab --help`.
"""

__version__ = "1.0.0"
__author__ = "CrackinLLC"

# Public API exports
from logconvex_lab.core.models import (
    DomainSpec,
    WeightSpec,
    RadialWeightParams,
    InequalityReport,
    ConstantChain,
    RunConfig,
)
from logconvex_lab.core.domain import build_basis
from logconvex_lab.core.heat import random_state, check_log_convexity
from logconvex_lab.core.certifier import expand_radial_commutator, certify_sign

__all__ = [
    "DomainSpec",
    "WeightSpec",
    "RadialWeightParams",
    "InequalityReport",
    "ConstantChain",
    "RunConfig",
    "build_basis",
    "random_state",
    "check_log_convexity",
    "expand_radial_commutator",
    "certify_sign",
    "__version__",
]
