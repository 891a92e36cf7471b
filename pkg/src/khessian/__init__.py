"""Numerical toolkit for k-Hessian energies on the unit ball of C^n and R^n."""

from .energy import (
    EnergyValue,
    energy_diag,
    energy_Ik,
    energy_Jk,
    mixed_energy,
    mixed_energy_complex,
    mixed_energy_real,
    mixed_lower_energy,
    symmetry_residual,
)
from .exceptions import (
    BoundaryConditionError,
    CapacityError,
    ConeMembershipError,
    ConfigError,
    DegenerateConeError,
    HypothesisViolationError,
    InvalidInputError,
    KHessianError,
    OrderError,
)
from .funcspace import FunctionSpec, from_json, random_admissible, random_psh, to_json
from .quadrature import Grid, RadialGauss, parse_scheme, scheme_from_config
from .symfun import (
    cone_check,
    newton_tensor,
    polarized_s_k,
    polarized_sk_kronecker,
    polarized_sk_subsets,
    s_k,
    s_k_matrix,
)
from .verify import SuiteConfig, SuiteReport, run_suite

__version__ = "0.1.0"
