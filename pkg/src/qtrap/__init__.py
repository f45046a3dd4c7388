"""Quantum motion in a Paul trap: mode functions, ladder operators, Gaussian
states and a truncated Fock-space oracle for the operator identities."""

from .dynamics import (
    Axis,
    ModeSolution,
    StabilityVerdict,
    TrapConfig,
    classical_trajectory,
    extend,
    floquet_stability,
    integrate_epsilon,
    mathieu_params,
    omega_profile,
    stability_sweep,
    wronskian,
)
from .gaussian import (
    GaussianState,
    MomentSet,
    coherent_state,
    evaluate_wavefunction,
    moments,
    muss_residual,
    quadrature_moments,
    squeeze_factor,
    uncertainty_products,
)
from .ladder import (
    LadderCoeffs,
    QuadratureCoeffs,
    SqueezeParams,
    bch_gamma,
    bogoliubov_decompose,
    displacement_map,
    ladder_coeffs,
    quadrature_coeffs,
    transform_uv,
)

__version__ = "0.1.0"
