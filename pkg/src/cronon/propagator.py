"""Evolution maps for energy-basis density matrices.

All maps act elementwise: the (n, m) coherence is multiplied by a
scalar factor that depends only on the Bohr frequency w = omega[n, m],
the kernel times (tau1, tau2) and the elapsed time t.

    unitary            exp(-i w t)
    closed_form        (1 + i w tau1)^(-t/tau2)
                       = exp(-(gamma + i nu) t) with
                       gamma = ln(1 + w^2 tau1^2) / (2 tau2),
                       nu    = arctan(w tau1) / tau2
    finite_difference  (1 + i w tau1)^(-k) on the grid t = k tau2
    second_order       exp(-i w tau1 t/tau2 - w^2 tau1^2 t/(2 tau2))
    milburn            exp((t/tau2) (exp(-i w tau1) - 1))
    quadrature         kernel average of exp(-i w t')   (oracle)
    monte_carlo        sample average of exp(-i w t')   (oracle)

The complex power in the closed form is branch-safe: 1 + i w tau1 has
positive real part for every real w, so the principal logarithm never
crosses the cut, and the exponent t/tau2 is real and non-negative.

Populations (w = 0) are untouched by every map, which makes trace
preservation exact, and factors satisfy factor(-w) = conj(factor(w)),
which preserves hermiticity. The closed form is a mixture of unitaries,
hence completely positive.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import BohrFrequencyTable, DensityMatrix, EnergySpectrum, bohr_frequencies
from .errors import DimensionMismatchError, InvalidInputError
from .kernel import KernelParams, SampleSet, coarse_grain, sample_effective_time

__all__ = [
    "Method",
    "EvolutionMethod",
    "DecoherenceRates",
    "step_factor",
    "propagator_factor",
    "unitary_factor",
    "second_order_factor",
    "milburn_factor",
    "quadrature_factor",
    "monte_carlo_factor",
    "coherence_factor",
    "rates",
    "evolve",
    "milburn_frozen_frequencies",
    "DEFAULT_MC_COUNT",
]

DEFAULT_MC_COUNT = 100_000

#: Relative slack when deciding whether t sits on the cronon grid.
_GRID_RTOL = 1e-9


class Method(enum.Enum):
    """The available evolution maps."""

    UNITARY = "unitary"
    CLOSED_FORM = "closed_form"
    FINITE_DIFFERENCE = "finite_difference"
    SECOND_ORDER = "second_order"
    MILBURN = "milburn"
    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class EvolutionMethod:
    """Method selector; the Monte-Carlo map carries its seed and count,
    the quadrature oracle its tolerance."""

    kind: Method
    seed: int = 0
    count: int = DEFAULT_MC_COUNT
    tol: float = 1e-10

    def __post_init__(self):
        if self.kind is Method.MONTE_CARLO and self.count < 1:
            raise InvalidInputError("monte_carlo count must be >= 1")
        if not (self.tol > 0):
            raise InvalidInputError("tol must be positive")

    @classmethod
    def unitary(cls):
        return cls(Method.UNITARY)

    @classmethod
    def closed_form(cls):
        return cls(Method.CLOSED_FORM)

    @classmethod
    def finite_difference(cls):
        return cls(Method.FINITE_DIFFERENCE)

    @classmethod
    def second_order(cls):
        return cls(Method.SECOND_ORDER)

    @classmethod
    def milburn(cls):
        return cls(Method.MILBURN)

    @classmethod
    def quadrature(cls, tol: float = 1e-10):
        return cls(Method.QUADRATURE, tol=tol)

    @classmethod
    def monte_carlo(cls, seed: int = 0, count: int = DEFAULT_MC_COUNT):
        return cls(Method.MONTE_CARLO, seed=seed, count=count)

    @classmethod
    def parse(cls, name: str, *, seed: int = 0, count: int = DEFAULT_MC_COUNT,
              tol: float = 1e-10) -> "EvolutionMethod":
        try:
            kind = Method(name)
        except ValueError:
            valid = ", ".join(m.value for m in Method)
            raise InvalidInputError(f"unknown method {name!r}; expected one of {valid}")
        return cls(kind, seed=seed, count=count, tol=tol)


@dataclass(frozen=True)
class DecoherenceRates:
    """Per-pair decay rate gamma[n, m] and frequency shift nu[n, m]."""

    gamma: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        v = np.asarray(self.nu, dtype=float)
        g.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "nu", v)


def step_factor(omega: float, params: KernelParams) -> complex:
    """Single-cronon multiplier (1 + i omega tau1)^(-1)."""
    if omega == 0.0:
        return 1.0 + 0.0j
    return 1.0 / (1.0 + 1j * omega * params.tau1)


def propagator_factor(omega: float, params: KernelParams, t: float) -> complex:
    """Closed-form coherence multiplier exp(-(t/tau2) Log(1 + i omega tau1)).

    Equal to exp(-(gamma + i nu) t) with the rates of `rates()`. The
    omega = 0 and t = 0 cases short-circuit to exactly 1.
    """
    if t < 0:
        raise InvalidInputError(f"t must be non-negative, got {t}")
    if omega == 0.0 or t == 0.0:
        return 1.0 + 0.0j
    return cmath.exp(-(t / params.tau2) * cmath.log(1.0 + 1j * omega * params.tau1))


def unitary_factor(omega: float, t: float) -> complex:
    return cmath.exp(-1j * omega * t)


def second_order_factor(omega: float, params: KernelParams, t: float) -> complex:
    """Exact exponential of the second-order (phase diffusion) generator."""
    x = omega * params.tau1
    return cmath.exp((-1j * x - 0.5 * x * x) * t / params.tau2)


def milburn_factor(omega: float, params: KernelParams, t: float) -> complex:
    """Poisson-jump multiplier exp((t/tau2)(exp(-i omega tau1) - 1))."""
    return cmath.exp((t / params.tau2) * (cmath.exp(-1j * omega * params.tau1) - 1.0))


def quadrature_factor(omega: float, params: KernelParams, t: float,
                      tol: float = 1e-10) -> complex:
    """Kernel average of exp(-i omega t'), the quadrature oracle."""
    if t == 0.0:
        return 1.0 + 0.0j
    return coarse_grain(params, t, lambda tp: cmath.exp(-1j * omega * tp), tol=tol)


def monte_carlo_factor(omega: float, samples: SampleSet) -> tuple[complex, float]:
    """Sample average of exp(-i omega t') and its standard error.

    The standard error combines the real and imaginary scatter:
    sqrt(var(Re) + var(Im)) / sqrt(N).
    """
    phases = np.exp(-1j * omega * samples.values)
    factor = complex(np.mean(phases))
    n = samples.count
    var = float(np.var(phases.real) + np.var(phases.imag))
    return factor, math.sqrt(var / n)


def rates(table: BohrFrequencyTable, params: KernelParams) -> DecoherenceRates:
    """Decay rates and frequency shifts for every level pair.

    gamma uses log1p so the small-frequency limit gamma ~ omega^2
    tau1^2 / (2 tau2) is reproduced without cancellation.
    """
    x = table.omega * params.tau1
    gamma = np.log1p(x * x) / (2.0 * params.tau2)
    nu = np.arctan(x) / params.tau2
    return DecoherenceRates(gamma=gamma, nu=nu)


def _on_grid(t: float, tau2: float) -> int | None:
    """Integer k with t = k tau2, or None if t is off the cronon grid."""
    k = t / tau2
    kr = round(k)
    if abs(k - kr) <= _GRID_RTOL * max(1.0, abs(k)):
        return int(kr)
    return None


def coherence_factor(
    omega: float,
    params: KernelParams,
    t: float,
    method: EvolutionMethod,
    samples: SampleSet | None = None,
) -> complex:
    """Scalar multiplier of a single coherence under the selected map.

    For the Monte-Carlo map a shared SampleSet may be passed in so every
    matrix element of one evolution sees the same draw; otherwise a
    fresh deterministic draw is made from the method's seed and count.
    """
    if t < 0:
        raise InvalidInputError(f"t must be non-negative, got {t}")
    if omega == 0.0 or t == 0.0:
        return 1.0 + 0.0j
    kind = method.kind
    if kind is Method.UNITARY:
        return unitary_factor(omega, t)
    if kind is Method.CLOSED_FORM:
        return propagator_factor(omega, params, t)
    if kind is Method.FINITE_DIFFERENCE:
        k = _on_grid(t, params.tau2)
        if k is None:
            raise InvalidInputError(
                f"finite_difference is defined only on the cronon grid; "
                f"t/tau2 = {t / params.tau2!r} is not an integer"
            )
        return step_factor(omega, params) ** k
    if kind is Method.SECOND_ORDER:
        return second_order_factor(omega, params, t)
    if kind is Method.MILBURN:
        return milburn_factor(omega, params, t)
    if kind is Method.QUADRATURE:
        return quadrature_factor(omega, params, t, tol=method.tol)
    if kind is Method.MONTE_CARLO:
        if samples is None:
            samples = sample_effective_time(params, t, method.seed, method.count)
        return monte_carlo_factor(omega, samples)[0]
    raise InvalidInputError(f"unhandled method {kind}")  # pragma: no cover


def _factor_matrix(
    omega: np.ndarray, params: KernelParams, t: float, method: EvolutionMethod
) -> np.ndarray:
    """Elementwise multipliers, exactly 1 on the diagonal and exactly
    conjugate-symmetric off it."""
    dim = omega.shape[0]
    out = np.ones((dim, dim), dtype=complex)
    if t == 0.0:
        return out

    if method.kind is Method.FINITE_DIFFERENCE and _on_grid(t, params.tau2) is None:
        raise InvalidInputError(
            f"finite_difference is defined only on the cronon grid; "
            f"t/tau2 = {t / params.tau2!r} is not an integer"
        )
    samples = None
    if method.kind is Method.MONTE_CARLO:
        samples = sample_effective_time(params, t, method.seed, method.count)

    for n in range(dim):
        for m in range(n + 1, dim):
            w = omega[n, m]
            if w == 0.0:
                continue
            f = coherence_factor(w, params, t, method, samples=samples)
            out[n, m] = f
            out[m, n] = f.conjugate()
    return out


def evolve(
    rho0: DensityMatrix,
    spectrum: EnergySpectrum,
    params: KernelParams,
    t: float,
    method: EvolutionMethod,
) -> DensityMatrix:
    """Propagate rho0 to time t with the selected map.

    Populations are carried over bit-for-bit (their multiplier is the
    exact constant 1), so the trace is preserved exactly for every
    method, Monte Carlo included.
    """
    if rho0.dim != spectrum.dim:
        raise DimensionMismatchError(
            f"state dim {rho0.dim} != spectrum dim {spectrum.dim}"
        )
    if t < 0:
        raise InvalidInputError(f"t must be non-negative, got {t}")
    omega = bohr_frequencies(spectrum).omega
    factors = _factor_matrix(omega, params, t, method)
    return DensityMatrix(rho0.entries * factors)


def milburn_frozen_frequencies(params: KernelParams, n_max: int) -> np.ndarray:
    """Frequencies omega = 2 pi n / tau1 where the Milburn map is the
    identity for all t (an artifact absent from the closed form)."""
    if n_max < 1:
        raise InvalidInputError(f"n_max must be >= 1, got {n_max}")
    return 2.0 * math.pi * np.arange(1, n_max + 1) / params.tau1
