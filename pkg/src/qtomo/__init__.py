"""Qubit tomography with weak-meter readout.

Closed-form and simulated transfer matrices for three measurement
models (single meter, two sequential meters, parameterized circuit),
Fisher-information figures of merit averaged over the state space,
linear-inversion and iterative maximum-likelihood estimators, and a
seeded experiment harness.
"""
from .core import (
    HADAMARD,
    PAULI_EIGENSTATE_LABELS,
    PAULI_EIGENSTATES,
    SIGMA,
    QuadratureRule,
    bloch_from_state,
    check_density,
    density_from_bloch,
    density_from_state,
    entanglement_entropy,
    fidelity,
    make_quadrature,
    state_from_angles,
)
from .single import (
    NonInformativeCouplingError,
    estimate_sz,
    fisher_inverse_angle_form,
    fisher_inverse_single,
    max_error_single,
    probabilities_single,
    qttf_single,
    qttf_single_quadrature,
    two_design_average,
)
from .model import (
    OptimizationResult,
    SingularInformationError,
    delta_from_transfer,
    delta_surface,
    fisher_from_transfer,
    fisher_matrix_form,
    qttf_from_transfer,
)
from .twometer import (
    REFERENCE_COUPLINGS,
    TwoMeterModel,
    coefficients_closed_form,
    coefficients_trace_form,
    meter_unitaries,
    optimize_two_meter,
    qttf_two_meter,
    simulate_probabilities,
)
from .circuit import (
    REFERENCE_OPTIMUM,
    CircuitModel,
    build_circuit,
    circuit_transfer_matrix,
    optimize_circuit,
    qttf_circuit,
    simulate_circuit_probabilities,
    u3,
)
from .estimators import (
    LinearInversionResult,
    MleConfig,
    MleResult,
    NonInvertibleModelError,
    linear_inversion,
    log_likelihood,
    radial_clip,
    rho_r_mle,
)
from .harness import (
    DEFAULT_SEED,
    CountRecord,
    ExperimentReport,
    IdentityReport,
    binomial_variance_identity,
    direction_fidelity,
    estimator_variance_identity,
    pauli_eigenstate_set,
    per_shot_variance_identity,
    run_full_experiment,
    run_single_experiment,
    sample_counts,
    variance_vs_fisher_scan,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # core
    "SIGMA",
    "HADAMARD",
    "PAULI_EIGENSTATES",
    "PAULI_EIGENSTATE_LABELS",
    "QuadratureRule",
    "make_quadrature",
    "state_from_angles",
    "density_from_state",
    "density_from_bloch",
    "bloch_from_state",
    "check_density",
    "fidelity",
    "entanglement_entropy",
    # single meter
    "NonInformativeCouplingError",
    "probabilities_single",
    "estimate_sz",
    "fisher_inverse_single",
    "fisher_inverse_angle_form",
    "qttf_single",
    "qttf_single_quadrature",
    "max_error_single",
    "two_design_average",
    # shared model machinery
    "SingularInformationError",
    "fisher_from_transfer",
    "fisher_matrix_form",
    "delta_from_transfer",
    "delta_surface",
    "qttf_from_transfer",
    "OptimizationResult",
    # two-meter model
    "REFERENCE_COUPLINGS",
    "TwoMeterModel",
    "meter_unitaries",
    "coefficients_closed_form",
    "coefficients_trace_form",
    "simulate_probabilities",
    "qttf_two_meter",
    "optimize_two_meter",
    # circuit model
    "REFERENCE_OPTIMUM",
    "CircuitModel",
    "u3",
    "build_circuit",
    "circuit_transfer_matrix",
    "simulate_circuit_probabilities",
    "qttf_circuit",
    "optimize_circuit",
    # estimators
    "NonInvertibleModelError",
    "LinearInversionResult",
    "linear_inversion",
    "radial_clip",
    "MleConfig",
    "MleResult",
    "rho_r_mle",
    "log_likelihood",
    # harness
    "DEFAULT_SEED",
    "CountRecord",
    "sample_counts",
    "pauli_eigenstate_set",
    "direction_fidelity",
    "ExperimentReport",
    "run_single_experiment",
    "run_full_experiment",
    "variance_vs_fisher_scan",
    "IdentityReport",
    "binomial_variance_identity",
    "estimator_variance_identity",
    "per_shot_variance_identity",
]
