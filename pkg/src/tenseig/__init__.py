"""Real eigenpairs of symmetric tensors by Newton correction and power iterations."""
from ._core import DEFAULT_BACKEND
from .enumeration import (
    EnumerationResult,
    enumerate_pairs,
    enumerate_until_oracle,
    hit_histogram,
    sample_unit_sphere,
    start_stream,
)
from .errors import TensorEigError
from .models import (
    count_real_eigenpairs,
    degenerate_example,
    identity_tensor,
    omega_eigenpair_oracle,
    omega_thresholds,
    random_gaussian_symmetric,
    t_omega,
)
from .newton import SolveOutcome, SolverConfig, ncm_step, oncm_step, run_newton, solve, solve_bordered
from .power import PowerConfig, adaptive_shift, hopm_step, run_power, shifted_hopm_step
from .spectral import (
    Eigenpair,
    StabilityReport,
    canonical_sign,
    classify,
    convergence_order,
    pooled_order,
    same_eigenpair,
    validate_eigenpair,
)
from .tensor import Polynomial, SymmetricTensor, from_polynomial, mu, symmetrize

__version__ = "0.1.0"
