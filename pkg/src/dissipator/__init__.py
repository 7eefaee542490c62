"""Resolvent-based decay certificates for shear-flow drift-diffusion operators."""

__version__ = "0.1.0"

from .kernels import BACKEND
from .profile import (
    ShearProfile,
    eval_psi,
    eval_u,
    make_weierstrass_log,
    make_weierstrass_power,
    third_difference,
    validate_ratio,
)
from .geometry import (
    PhiBound,
    WindowFit,
    best_lower_bound,
    omega,
    omega1_weierstrass_certificate,
    phi,
    phi_inv,
    psi_lower_bound,
)
from .spectral import (
    OperatorDisc,
    ResolutionError,
    SpectralResult,
    assemble,
    psi0_direct,
    psi1_direct,
    resolvent_norm,
    sigma_min,
)
from .semigroup import (
    DissipationTimeout,
    EvolutionOperator,
    decay_curve,
    dissipation_time,
    gp_certificate,
    propagator_norm,
)
from .bench import (
    FitResult,
    SweepConfig,
    SweepRecord,
    emit_report,
    fit_log,
    fit_power,
    sweep,
)
