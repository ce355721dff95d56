"""Sensitivity analysis toolkit for rings of nonlocally coupled Roessler oscillators.

The package computes, for every oscillator of the ring, the finite-time
growth rate of a homogeneous tangent perturbation projected onto that
oscillator's subspace, and relates the resulting spatial profile to
noise response and to the structure of partially coherent states.
"""

__version__ = "0.1.0"

from .model import (
    DivergenceError,
    EnsembleState,
    ModelParams,
    NoiseSpec,
    jacobian_apply,
    noise_intensity_at,
    random_initial_state,
    vector_field,
)
from .integrator import (
    IntegrationConfig,
    SamplingPlan,
    Scheme,
    advance,
    advance_stochastic,
    advance_with_noise,
    advance_with_tangent,
    step_deterministic,
    step_stochastic,
    windowed_coupling_sums,
)
from .tangent import TangentState, init_homogeneous, per_oscillator_log_norms, renormalize
from .lyapunov import (
    IlsProfile,
    LeEstimate,
    finite_time_growth,
    identity_check,
    ils_profile,
    ils_range_series,
    max_le_estimate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
