import numpy as np
import pytest

from optoarray.dynamics import (
    CovarianceState,
    analytic_stability_bounds,
    covariance_trajectory,
    evolve,
    initial_state,
    lyapunov_residual,
    min_physical_eigenvalue,
    propagator,
    solve_lyapunov,
    stability,
    steady_state,
)
from optoarray.entanglement import extract_two_mode, log_negativity, log_negativity_series
from optoarray.errors import NonPhysicalError, OptoarrayError, UnstableError
from optoarray.generator import QuadraticGenerator, build_generator
from optoarray.model import CavitySpec, CouplingKind, InitialState, Regime

from _networks import blue_red, chain, single

FIG2 = chain(3, g=0.5, chi=1.0)


def test_uncoupled_cavity_stays_in_vacuum():
    gen = build_generator(single(g=0.0, detuning=3.0))
    states = evolve(gen, initial_state(single(), "vacuum"), np.linspace(0, 5, 11))
    for s in states:
        assert np.allclose(s.sigma, np.eye(4), atol=1e-12)


def test_mechanical_relaxation_matches_scalar_ode():
    nbar, mu = 1.5, 0.3
    net = single(mu=mu, nbar=nbar, initial=InitialState.VACUUM_ALL)
    ts = np.linspace(0, 20, 41)
    states = evolve(build_generator(net), initial_state(net), ts)
    exact = 1 + 2 * nbar * (1 - np.exp(-mu * ts))
    assert np.allclose([s.sigma[2, 2] for s in states], exact, atol=1e-12)
    assert np.allclose([s.sigma[3, 3] for s in states], exact, atol=1e-12)


def test_initial_state_options():
    net = single(nbar=2.0)
    assert np.allclose(np.diag(initial_state(net).sigma), [1, 1, 5, 5])
    assert np.allclose(initial_state(net, "vacuum").sigma, np.eye(4))


def test_fig2_phonons_become_entangled():
    gen = build_generator(FIG2)
    ts = np.arange(0, 1001) * 0.01
    states = evolve(gen, initial_state(FIG2), ts)
    en = log_negativity_series(np.stack([s.sigma for s in states]), gen.modes, "b1", "b2")
    assert en.max() > 0 and en[0] == 0
    for s in states[::50]:
        assert min_physical_eigenvalue(s.sigma) >= -1e-9


def test_one_long_step_equals_two_short_steps():
    gen = build_generator(FIG2)
    init = initial_state(FIG2)
    one = evolve(gen, init, [0.5])[-1].sigma
    two = evolve(gen, init, [0.25, 0.5])[-1].sigma
    assert np.allclose(one, two, atol=1e-10, rtol=0)


def test_means_propagate_with_the_drift():
    gen = build_generator(single(g=0.1, detuning=10.0))
    mean = np.array([1.0, 0.0, 0.0, 0.5])
    phi, _ = propagator(gen, 0.3)
    out = evolve(gen, CovarianceState(0.0, mean, np.eye(4)), [0.3])[0]
    assert np.allclose(out.mean, phi @ mean)


def test_evolution_converges_to_steady_state():
    gen = build_generator(FIG2)
    report = stability(gen)
    T = 40.0 / abs(report.max_real_eig)
    late = evolve(gen, initial_state(FIG2), [T])[-1].sigma
    assert np.linalg.norm(late - steady_state(gen).sigma) <= 1e-8


def test_evolve_input_errors():
    gen = build_generator(single())
    init = initial_state(single())
    with pytest.raises(ValueError):
        evolve(gen, init, [0.2, 0.1])
    with pytest.raises(ValueError):
        evolve(gen, init, [])
    with pytest.raises(NonPhysicalError):
        evolve(gen, CovarianceState(0.0, np.zeros(4), 0.5 * np.eye(4)), [1.0])
    bad = QuadraticGenerator(np.full((4, 4), np.nan), np.eye(4), gen.modes)
    with pytest.raises(OptoarrayError):
        evolve(bad, init, [1.0])


def test_steady_state_examples():
    assert np.allclose(steady_state(build_generator(single(g=0.0))).sigma, np.eye(4), atol=1e-12)
    assert np.allclose(steady_state(build_generator(single(nbar=2.0))).sigma[2:, 2:], 5 * np.eye(2), atol=1e-12)
    gen = build_generator(blue_red(0.02, 0.1, CouplingKind.REVERSIBLE))
    ss = steady_state(gen)
    assert log_negativity(extract_two_mode(ss, gen.modes, "b1", "b2")).E_N > 0


@pytest.mark.parametrize("net", [FIG2, blue_red(0.02, 0.1, CouplingKind.CASCADED), chain(3, 400.0, kind="cascaded")])
def test_lyapunov_residual_bound(net):
    gen = build_generator(net)
    sigma = steady_state(gen).sigma
    assert lyapunov_residual(gen, sigma) <= 1e-10 * np.linalg.norm(gen.D)


def test_lyapunov_against_scipy():
    from scipy.linalg import solve_continuous_lyapunov

    gen = build_generator(blue_red(0.02, 0.1, CouplingKind.REVERSIBLE, nbar=0.5))
    assert np.allclose(solve_lyapunov(gen.A, gen.D), solve_continuous_lyapunov(gen.A, -gen.D), atol=1e-9)


def test_stability_examples():
    rep = stability(build_generator(single(kappa=1.0, mu=2.0, detuning=3.0)))
    assert rep.hurwitz and rep.max_real_eig == pytest.approx(-0.5)
    assert len(rep.spectrum) == 4
    assert not stability(build_generator(single(Regime.BLUE_RWA, g=0.06))).hurwitz
    red = single(Regime.FULL, omega=200.0, detuning=200.0, g=0.5)
    assert analytic_stability_bounds(red.cavities[0])[1] > 0.5
    assert stability(build_generator(red)).hurwitz


def test_unstable_steady_state_error_carries_report():
    with pytest.raises(UnstableError) as info:
        steady_state(build_generator(single(Regime.BLUE_RWA, g=0.06)))
    assert info.value.code == "unstable-no-steady-state"
    assert info.value.report.max_real_eig > 0


def test_analytic_bounds():
    cav = CavitySpec(1, 1.0, 0.01, 200.0)
    blue, red = analytic_stability_bounds(cav)
    assert blue == pytest.approx(0.05)
    assert red == pytest.approx(0.5 * np.sqrt(200 ** 2 + (0.01 ** 2 + 1) / 4))
    assert red == pytest.approx(100.0, abs=1e-3)
    assert analytic_stability_bounds(CavitySpec(1, 1.0, 1e-12, 1.0))[0] < 1e-5


def test_blue_threshold_matches_eigenvalue_flip():
    gs = np.arange(0.0490, 0.0511, 0.0001)
    flags = [stability(build_generator(single(Regime.BLUE_RWA, g=g))).hurwitz for g in gs]
    flip = gs[np.argmin(flags)]
    assert all(flags[: np.argmin(flags)]) and not any(flags[np.argmin(flags):])
    assert abs(flip - 0.05) <= 1e-4 + 1e-12


def test_long_step_does_not_overflow():
    # |Re lambda| * dt ~ 50: a direct block exponential would lose all precision
    gen = build_generator(chain(2, nbar=0.5))
    init = initial_state(chain(2, nbar=0.5))
    one = evolve(gen, init, [100.0])[-1].sigma
    many = evolve(gen, init, np.arange(1.0, 101.0))[-1].sigma
    assert np.all(np.isfinite(one))
    assert np.allclose(one, many, atol=1e-9, rtol=1e-9)


@pytest.mark.parametrize("kind", [CouplingKind.REVERSIBLE, CouplingKind.CASCADED])
def test_mirror_symmetric_pairs_in_two_cavities(kind):
    # two identical cavities: E_N(a1, b2) and E_N(a2, b1) coincide for reversible coupling
    net = chain(2, kind=kind)
    gen = build_generator(net)
    sigmas = covariance_trajectory(gen, initial_state(net), np.linspace(0, 10, 101))
    a1b2 = log_negativity_series(sigmas, gen.modes, "a1", "b2")
    a2b1 = log_negativity_series(sigmas, gen.modes, "a2", "b1")
    if kind is CouplingKind.REVERSIBLE:
        assert np.max(np.abs(a1b2 - a2b1)) <= 1e-6
    else:
        # feed-forward breaks the mirror symmetry
        assert np.max(np.abs(a1b2 - a2b1)) > 1e-6


def test_outer_pair_symmetry_in_three_chain():
    net = chain(3)
    gen = build_generator(net)
    sigmas = covariance_trajectory(gen, initial_state(net), np.linspace(0, 10, 101))
    a1b3 = log_negativity_series(sigmas, gen.modes, "a1", "b3")
    a3b1 = log_negativity_series(sigmas, gen.modes, "a3", "b1")
    assert np.max(np.abs(a1b3 - a3b1)) <= 1e-6
