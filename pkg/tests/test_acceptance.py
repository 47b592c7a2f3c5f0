"""Acceptance suite: one test per release criterion, tolerances pinned.

Each test prints a PASS line on success (visible with pytest -s; the
-v test names give the same one-line-per-criterion readout either way).
"""

import math
import time

import numpy as np

from cronon import (
    CatParams,
    EnergySpectrum,
    EprParams,
    EvolutionMethod,
    KernelParams,
    RabiParams,
    cat_interference,
    decay_rate,
    ehrenfest_fd_residual,
    epr_correlation,
    epr_singlet_fidelity,
    evolve,
    fit_envelope_rate,
    interference_frequency,
    kernel_moments,
    milburn_factor,
    monte_carlo_factor,
    poisson_pmf,
    propagator_factor,
    quadrature_factor,
    rabi_damping_rate,
    rabi_population,
    rates,
    sample_effective_time,
    tm_report,
)
from cronon.cli import main as cli_main
from cronon.core import bohr_frequencies, make_density_from_pure
from cronon.checks import random_density, random_observable, random_spectrum
from cronon.io import save_spectrum, save_state

UNIT = KernelParams(tau1=1.0, tau2=1.0)

# pinned tolerances
ORACLE_QUAD_TOL = 1e-8
ORACLE_MC_SIGMAS = 4.0
RATE_TOL = 1e-12
LIOUVILLE_RATIO_BAND = (0.5 * 0.85, 0.5 * 1.15)
SECOND_ORDER_REL_TOL = 1e-3
HERMITICITY_TOL = 1e-12
MIN_EIGENVALUE = -1e-10
SEMIGROUP_TOL = 1e-12
GRID_EQUALITY_TOL = 1e-12
KERNEL_MC_SIGMAS = 3.0
KERNEL_NORM_TOL = 1e-10
POISSON_SUM_TOL = 1e-12
EHRENFEST_SCALE_TOL = 1e-10
TM_SLACK = 1e-12
MILBURN_FROZEN_TOL = 1e-12
RABI_FIT_REL_TOL = 0.02
RABI_LINEAR_REL_TOL = 0.01
CAT_TDEC_REL_TOL = 1e-9
CAT_D2_REL_TOL = 0.02
EPR_FIDELITY_HI = 0.99
EPR_FIDELITY_LO = 0.51


def report(criterion, text):
    print(f"ACCEPTANCE {criterion}: PASS - {text}")


def test_c01_oracle_equivalence():
    start = time.monotonic()
    for omega_tau1 in (0.1, 1.0, 10.0):
        omega = omega_tau1 / UNIT.tau1
        for k in (0.5, 1.0, 5.0, 20.0):
            t = k * UNIT.tau2
            closed = propagator_factor(omega, UNIT, t)
            quad = quadrature_factor(omega, UNIT, t, tol=1e-10)
            assert abs(closed - quad) <= ORACLE_QUAD_TOL, (omega_tau1, k)
            samples = sample_effective_time(UNIT, t, seed=1234, count=100_000)
            mc, se = monte_carlo_factor(omega, samples)
            assert abs(closed - mc) <= ORACLE_MC_SIGMAS * se, (omega_tau1, k)
    elapsed = time.monotonic() - start
    assert elapsed <= 30.0
    report(1, f"closed form vs quadrature <= {ORACLE_QUAD_TOL} and vs "
              f"Monte Carlo within {ORACLE_MC_SIGMAS} SE on the 3x4 grid "
              f"({elapsed:.1f} s)")


def test_c02_rate_formulas():
    table = bohr_frequencies(EnergySpectrum([0.0, 1.0]))
    r = rates(table, UNIT)
    assert abs(r.gamma[1, 0] - math.log(2.0) / 2.0) <= RATE_TOL
    assert abs(r.nu[1, 0] - math.pi / 4.0) <= RATE_TOL
    gamma = math.log(2.0) / 2.0
    for t in np.linspace(0.0, 20.0 * UNIT.tau2, 201):
        assert abs(abs(propagator_factor(1.0, UNIT, t)) - math.exp(-gamma * t)) <= RATE_TOL
    report(2, "gamma = ln2/2, nu = pi/4 and |factor| = exp(-gamma t) on "
              "[0, 20 tau2], all to 1e-12")


def test_c03_limits():
    # (a) closed form approaches the unitary flow linearly in tau
    spec = EnergySpectrum([0.0, 0.7, 1.9])
    rho = make_density_from_pure([1.0, 1.0 + 0.5j, 0.3])
    errs = {}
    for tau in (0.02, 0.01):
        p = KernelParams(tau1=tau, tau2=tau)
        c = evolve(rho, spec, p, 1.0, EvolutionMethod.closed_form())
        u = evolve(rho, spec, p, 1.0, EvolutionMethod.unitary())
        errs[tau] = float(np.max(np.abs(c.entries - u.entries)))
    ratio = errs[0.01] / errs[0.02]
    assert LIOUVILLE_RATIO_BAND[0] <= ratio <= LIOUVILLE_RATIO_BAND[1]

    # (b) second-order exponential matches the closed form at small
    # frequency: modulus within 0.1% at t = 10 tau2
    from cronon import second_order_factor
    for omega_tau1 in (0.01, 0.05, 0.1):
        cf = abs(propagator_factor(omega_tau1, UNIT, 10.0))
        so = abs(second_order_factor(omega_tau1, UNIT, 10.0))
        assert abs(cf - so) / so <= SECOND_ORDER_REL_TOL
    report(3, f"Liouville-limit error halves with tau (ratio {ratio:.3f}) and "
              "the second-order modulus agrees to 0.1% at omega tau1 <= 0.1")


def test_c04_structural_invariants():
    rng = np.random.Generator(np.random.PCG64(9001))
    closed = EvolutionMethod.closed_form()
    fd = EvolutionMethod.finite_difference()
    for _ in range(200):
        dim = int(rng.integers(2, 7))
        rho = random_density(rng, dim)
        spectrum = random_spectrum(rng, dim)
        params = KernelParams(tau1=float(rng.uniform(0.2, 2.0)),
                              tau2=float(rng.uniform(0.2, 2.0)))
        t = float(rng.uniform(0.3, 5.0)) * params.tau2

        out = evolve(rho, spectrum, params, t, closed)
        assert complex(np.trace(out.entries)) == complex(np.trace(rho.entries))
        m = out.entries
        assert float(np.max(np.abs(m - m.conj().T))) <= HERMITICITY_TOL
        assert float(np.min(np.linalg.eigvalsh(m))) >= MIN_EIGENVALUE

        t1 = 0.7 * t
        stepped = evolve(evolve(rho, spectrum, params, t1, closed),
                         spectrum, params, t - t1, closed)
        assert float(np.max(np.abs(stepped.entries - m))) <= SEMIGROUP_TOL

        k = int(rng.integers(1, 8))
        a = evolve(rho, spectrum, params, k * params.tau2, closed)
        b = evolve(rho, spectrum, params, k * params.tau2, fd)
        assert float(np.max(np.abs(a.entries - b.entries))) <= GRID_EQUALITY_TOL
    report(4, "200 random states (dims 2-6): exact trace, hermiticity <= 1e-12, "
              "min eigenvalue >= -1e-10, semigroup and grid equality <= 1e-12")


def test_c05_kernel_statistics():
    params = KernelParams(tau1=2.0, tau2=1.0)
    t = 5.0
    n = 100_000
    samples = sample_effective_time(params, t, seed=4321, count=n).values
    m = kernel_moments(params, t)
    assert abs(samples.mean() - m.mean) <= KERNEL_MC_SIGMAS * m.sigma / math.sqrt(n)
    assert abs(samples.std(ddof=1) - m.sigma) <= KERNEL_MC_SIGMAS * m.sigma / math.sqrt(2 * n)

    from cronon import coarse_grain
    for ratio in (0.1, 1.0, 10.0):
        for k in (0.3, 1.0, 5.0, 40.0):
            p = KernelParams(tau1=ratio, tau2=1.0)
            val = coarse_grain(p, k, lambda tp: 1.0, tol=1e-11)
            assert abs(val - 1.0) <= KERNEL_NORM_TOL

    total, n_ev = 0.0, 0
    while True:
        pmf = poisson_pmf(UNIT, 3.0, n_ev)
        total += pmf
        if n_ev > 3 and pmf < 1e-15:
            break
        n_ev += 1
    assert abs(total - 1.0) <= POISSON_SUM_TOL
    report(5, "kernel mean/sigma within 3 SE of 1e5 samples, quadrature "
              "normalization <= 1e-10, Poisson pmf sums to 1 within 1e-12")


def test_c06_ehrenfest_identity():
    rng = np.random.Generator(np.random.PCG64(606))
    worst = 0.0
    for i in range(100):
        dim = int(rng.integers(2, 7))
        rho = random_density(rng, dim)
        a = random_observable(rng, dim)
        spectrum = random_spectrum(rng, dim)
        tau2 = float(rng.uniform(0.2, 1.5))
        params = KernelParams(tau1=(0.1, 1.0, 3.0)[i % 3] * tau2, tau2=tau2)
        t = float(rng.uniform(1.0, 6.0)) * params.tau2
        residual = ehrenfest_fd_residual(rho, a, spectrum, params, t)
        bound = (EHRENFEST_SCALE_TOL
                 * float(np.linalg.norm(a.entries, 2))
                 * float(np.max(np.abs(spectrum.energies)))
                 / spectrum.hbar)
        assert residual <= bound
        worst = max(worst, residual)
    report(6, f"finite-difference mean-value identity holds on 100 random "
              f"instances (max residual {worst:.2e})")


def test_c07_time_energy_inequality():
    rng = np.random.Generator(np.random.PCG64(707))
    for i in range(100):
        dim = int(rng.integers(2, 7))
        rho = random_density(rng, dim)
        a = random_observable(rng, dim)
        spectrum = random_spectrum(rng, dim)
        tau2 = float(rng.uniform(0.2, 1.5))
        params = KernelParams(tau1=(0.1, 1.0, 3.0)[i % 3] * tau2, tau2=tau2)
        t = float(rng.uniform(1.0, 6.0)) * params.tau2
        rep = tm_report(rho, a, spectrum, params, t)
        assert rep.lhs <= rep.rhs + TM_SLACK
    report(7, "generalized time-energy inequality holds on 100 random "
              "instances at slack 1e-12")


def test_c08_milburn_comparison():
    omega = 2.0 * math.pi / UNIT.tau1
    for t in np.linspace(0.1, 50.0, 100):
        assert abs(milburn_factor(omega, UNIT, t) - 1.0) <= MILBURN_FROZEN_TOL
    closed_mod = abs(propagator_factor(omega, UNIT, UNIT.tau2))
    assert abs(closed_mod - (1.0 + 4.0 * math.pi**2) ** -0.5) <= MILBURN_FROZEN_TOL
    report(8, "Milburn factor frozen at omega = 2 pi/tau1 (<= 1e-12 from 1) "
              f"while the closed form damps to {closed_mod:.6f} in one cronon")


def test_c09_scenarios():
    start = time.monotonic()

    # Rabi: envelope fit over 10 periods recovers gamma(n) within 2%
    params = RabiParams(g=1.0, n_photons=1, kernel=KernelParams(0.05, 0.05))
    period = 2.0 * math.pi / params.rabi_frequency
    times = np.linspace(0.0, 10.0 * period, 2001)
    traj = rabi_population(params, times)
    fitted = fit_envelope_rate(traj.times, traj.values)
    gamma_rabi = rabi_damping_rate(params)
    assert abs(fitted - gamma_rabi) / gamma_rabi <= RABI_FIT_REL_TOL

    # gamma(n) linear in n+1 within 1% while Omega tau1 <= 0.1
    kernel = KernelParams(tau1=0.01, tau2=1.0)
    slopes = [rabi_damping_rate(RabiParams(g=1.0, n_photons=n, kernel=kernel)) / (n + 1)
              for n in range(10)]
    assert max(slopes) / min(slopes) <= 1.0 + RABI_LINEAR_REL_TOL

    # Cat: visibility = exp(-gamma t), t_dec = 1/gamma, rate scales as D^2
    def cat(d):
        sigma_v = 1.0 / 2.0
        return CatParams(mass=1.0, sigma_x=1.0, sigma_v=sigma_v, separation_d=d,
                         energy=0.5 * sigma_v**2, kernel=KernelParams(0.01, 0.01))

    params_cat = cat(12.0)
    grid = np.linspace(-14.0, 14.0, 2001)
    gamma_cat = decay_rate(interference_frequency(params_cat), params_cat.kernel)
    for t in (0.0, 0.3 / gamma_cat, 2.0 / gamma_cat):
        result = cat_interference(params_cat, t, grid)
        assert abs(result.visibility - math.exp(-gamma_cat * t)) <= 1e-12
        assert abs(result.t_decoherence - 1.0 / gamma_cat) <= CAT_TDEC_REL_TOL / gamma_cat
    rate1 = 1.0 / cat_interference(cat(12.0), 0.0, grid).t_decoherence
    rate2 = 1.0 / cat_interference(cat(24.0), 0.0,
                                   np.linspace(-20.0, 20.0, 2001)).t_decoherence
    assert abs(rate2 / rate1 - 4.0) <= 4.0 * CAT_D2_REL_TOL

    # EPR: E(z,z) = -1 always, |E(x,x)| <= exp(-gamma t), fidelity limits
    z = (0.0, 0.0, 1.0)
    x = (1.0, 0.0, 0.0)
    params_epr = EprParams(omega0=2.0, flight_length=3.0, speed=1.0, kernel=UNIT)
    gamma_epr = decay_rate(params_epr.omega0, UNIT)
    for t in (0.0, 0.7, 3.0, 20.0):
        assert epr_correlation(params_epr, t, z, z) == -1.0
        assert abs(epr_correlation(params_epr, t, x, x)) <= math.exp(-gamma_epr * t) + 1e-15

    tau = 1e-4  # gamma t = pi * (omega0 tau) * ... stays below 1e-3
    quiet = EprParams(omega0=1.0, flight_length=2.0 * math.pi, speed=1.0,
                      kernel=KernelParams(tau, tau))
    t_flight = quiet.flight_time  # omega0 t = 2 pi
    assert decay_rate(quiet.omega0, quiet.kernel) * t_flight <= 1e-3
    assert epr_singlet_fidelity(quiet, t_flight) >= EPR_FIDELITY_HI

    noisy_t = 10.0 / gamma_epr
    assert epr_singlet_fidelity(params_epr, noisy_t) <= EPR_FIDELITY_LO

    elapsed = time.monotonic() - start
    assert elapsed <= 60.0
    report(9, f"Rabi fit {fitted:.4f} vs {gamma_rabi:.4f}, gamma linear in n+1, "
              f"cat visibility/t_dec/D^2 scaling, EPR correlations and "
              f"fidelity limits ({elapsed:.1f} s)")


def test_c10_cli_reproducibility(tmp_path):
    spectrum = tmp_path / "s.json"
    state = tmp_path / "r.json"
    save_spectrum(EnergySpectrum([0.0, 0.7, 1.9]), spectrum)
    save_state(make_density_from_pure([1.0, 1.0 + 0.5j, 0.3]), state)
    blobs = []
    for name in ("first", "second"):
        out = tmp_path / f"{name}.csv"
        code = cli_main([
            "evolve", "--spectrum", str(spectrum), "--rho0", str(state),
            "--tau1", "0.8", "--tau2", "1.1", "--times", "0.5,2.5",
            "--method", "monte_carlo", "--seed", "777", "--samples", "20000",
            "--out", str(out),
        ])
        assert code == 0
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1]

    kernel_blobs = []
    for name in ("ka", "kb"):
        out = tmp_path / f"{name}.csv"
        assert cli_main(["kernel", "--tau1", "1.5", "--tau2", "0.5", "--t", "2.0",
                         "--out", str(out)]) == 0
        kernel_blobs.append(out.read_bytes())
    assert kernel_blobs[0] == kernel_blobs[1]
    report(10, "identical configs give byte-identical CSV outputs, "
               "Monte Carlo included")
