"""Coarse-grained quantum evolution with Gamma-distributed effective times.

The package implements the discrete-event generalization of unitary
density-matrix dynamics: evolution proceeds in elementary unitary
events of width tau1 spaced on average tau2 apart, which damps every
energy-basis coherence at a rate ln(1 + omega^2 tau1^2)/(2 tau2) while
leaving populations untouched.
"""

from .core import (
    BohrFrequencyTable,
    DensityMatrix,
    EnergySpectrum,
    InvariantViolation,
    Observable,
    bohr_frequencies,
    diagonal_part,
    expectation,
    hamiltonian_observable,
    make_density_from_pure,
    validate_density,
    variance,
)
from .errors import (
    CrononError,
    DegenerateInputError,
    DimensionMismatchError,
    InvalidInputError,
    InvariantViolationError,
    ModelMismatchError,
    NumericFailureError,
    NumericWarning,
)
from .io import load_spectrum, load_state, save_spectrum, save_state
from .kernel import (
    KernelMoments,
    KernelParams,
    SampleSet,
    coarse_grain,
    gamma_pdf,
    kernel_moments,
    poisson_pmf,
    sample_effective_time,
)
from .observables import (
    Trajectory,
    TMReport,
    ehrenfest_fd_residual,
    expectation_trajectory,
    tm_report,
)
from .propagator import (
    DecoherenceRates,
    EvolutionMethod,
    Method,
    coherence_factor,
    evolve,
    milburn_factor,
    milburn_frozen_frequencies,
    monte_carlo_factor,
    propagator_factor,
    quadrature_factor,
    rates,
    second_order_factor,
    step_factor,
    unitary_factor,
)
from .scenarios import (
    CatInterference,
    CatParams,
    EprParams,
    OscillatorParams,
    RabiParams,
    cat_interference,
    decay_rate,
    epr_correlation,
    epr_singlet_fidelity,
    epr_state,
    fit_envelope_rate,
    free_particle_spread,
    interference_frequency,
    interference_frequency_oracle,
    oscillator_amplitude,
    rabi_damping_rate,
    rabi_population,
    spread_monte_carlo,
)

__version__ = "0.1.0"
