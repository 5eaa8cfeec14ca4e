"""Grassmann-valued elliptic kernels and lattice-operator identity checks.

Layers, bottom up: a finite Grassmann algebra (grassmann), the odd theta
function and the two-variable elliptic kernel with its degenerations
(elliptic), the Grassmann-valued extension of the kernel with symbolic
super-differential operators and residual checkers (superfunc), the finite
Heisenberg matrix basis with quantum/classical operators and Yang-Baxter
residuals (rmatrix), and randomized verification suites with a CLI front
end (suites, cli).
"""

from .elliptic import (
    EllipticContext,
    PoleProximityError,
    SeriesTruncationError,
    lattice_distance,
    lattice_reduce,
    phi,
    phi_derivs,
    phi_dtau,
    phi_rat,
    phi_tau_derivs,
    phi_trig,
    theta,
)
from .grassmann import (
    GeneratorMismatchError,
    GeneratorSet,
    GrassmannElement,
    default_generators,
    grassmann_exp,
    taylor_shift,
)
from .rmatrix import (
    HeisenbergBasis,
    MultiIndex,
    SuperMatrix,
    anticommutator,
    aybe_residual,
    basis_phi,
    build_R,
    build_r_classical,
    channel_shift,
    commutator,
    cybe_residual,
    embed,
    kappa,
    super_basis_phi,
    t_matrix,
)
from .suites import SUITE_NAMES, SuiteReport, VerifyConfig, replay_sample, run_suites
from .superfunc import (
    CatalogOverflowError,
    Descriptor,
    SuperFunction,
    SuperPoint,
    apply_super_operator,
    fay_residual,
    heat_residual,
    periodicity_residual,
    super_phi,
    super_phi_degenerate,
    super_phi_truncated,
    transition_factor,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # grassmann
    "GeneratorSet",
    "GrassmannElement",
    "GeneratorMismatchError",
    "default_generators",
    "grassmann_exp",
    "taylor_shift",
    # elliptic
    "EllipticContext",
    "PoleProximityError",
    "SeriesTruncationError",
    "theta",
    "phi",
    "phi_derivs",
    "phi_dtau",
    "phi_tau_derivs",
    "phi_trig",
    "phi_rat",
    "lattice_reduce",
    "lattice_distance",
    # superfunc
    "Descriptor",
    "CatalogOverflowError",
    "SuperPoint",
    "SuperFunction",
    "super_phi",
    "super_phi_truncated",
    "super_phi_degenerate",
    "apply_super_operator",
    "fay_residual",
    "heat_residual",
    "periodicity_residual",
    "transition_factor",
    # rmatrix
    "MultiIndex",
    "kappa",
    "HeisenbergBasis",
    "t_matrix",
    "channel_shift",
    "basis_phi",
    "super_basis_phi",
    "SuperMatrix",
    "build_R",
    "build_r_classical",
    "embed",
    "commutator",
    "anticommutator",
    "aybe_residual",
    "cybe_residual",
    # suites / cli
    "SUITE_NAMES",
    "VerifyConfig",
    "SuiteReport",
    "run_suites",
    "replay_sample",
]
