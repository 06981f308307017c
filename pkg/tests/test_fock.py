import numpy as np
import pytest

from optoarray.dynamics import covariance_trajectory, initial_state
from optoarray.errors import TruncationError
from optoarray.fock import (
    FockSpace,
    Monomial,
    TruncationSpec,
    build_liouvillian,
    initial_density,
    integrate_oracle,
    moments,
)
from optoarray.generator import build_generator
from optoarray.model import InitialState, Regime

from _networks import blue_red, single

A, B = Monomial.ladder(0), Monomial.ladder(1)
N_A = A.dag() * A
N_B = B.dag() * B


def test_ladder_matrices():
    space = FockSpace((4,))
    rho = np.zeros((4, 4), complex)
    rho[2, 2] = 1.0
    assert space.expect(rho, Monomial.ladder(0, True) * Monomial.ladder(0)) == pytest.approx(2.0)
    assert space.expect(rho, Monomial.ladder(0) * Monomial.ladder(0, True)) == pytest.approx(3.0)
    assert A.dag().dag().key() == A.key()


def test_empty_vacuum_cavity_is_stationary():
    net = single(g=0.0)
    liou = build_liouvillian(net, TruncationSpec(3))
    rho = initial_density(net, liou.space)
    assert np.max(np.abs(liou(rho))) == 0.0


def test_photon_decay_rate():
    kappa = 0.7
    net = single(kappa=kappa, g=0.0)
    liou = build_liouvillian(net, TruncationSpec(3))
    rho = np.zeros((16, 16), complex)
    rho[4, 4] = 1.0  # |1>_a |0>_b with the mechanical digit fastest
    assert liou.space.expect(rho, N_A) == pytest.approx(1.0)
    assert liou.space.expect(liou(rho), N_A).real == pytest.approx(-kappa, rel=1e-12)


def test_blue_sideband_creates_pairs_quadratically():
    g, t = 0.1, 0.1
    net = single(Regime.BLUE_RWA, kappa=1e-3, mu=1e-3, omega=10.0, g=g)
    res = integrate_oracle(net, TruncationSpec(3), [t])
    n_a = (res.second[-1, 0, 0] + res.second[-1, 1, 1] - 2) / 4
    assert n_a == pytest.approx(g ** 2 * t ** 2, rel=1e-2)


@pytest.mark.parametrize("nbar", [0.0, 0.3])
def test_uncoupled_thermal_state_is_preserved(nbar):
    net = single(g=0.0, nbar=nbar, mu=0.2, initial=InitialState.THERMAL_MECHANICS)
    res = integrate_oracle(net, TruncationSpec(10, tolerance=1e-3), [1.0, 2.0])
    expected = np.diag([1.0, 1.0, 2 * nbar + 1, 2 * nbar + 1])
    assert np.max(np.abs(res.covariance - expected)) < 1e-3
    assert np.max(np.abs(res.mean)) < 1e-12


def test_moments_of_vacuum_and_thermal_state():
    net = single(nbar=0.5)
    space = FockSpace((3, 25))
    mean, second = moments(space, initial_density(net, space), 2)
    assert np.allclose(mean, 0)
    assert np.allclose(second, np.diag([1.0, 1.0, 2.0, 2.0]), atol=1e-4)


def test_trace_and_hermiticity_preserved():
    net = blue_red(0.05, 0.05, "cascaded", chi=0.5)
    res = integrate_oracle(net, TruncationSpec((2, 3, 2, 3)), [0.5, 1.0], check=False)
    assert res.max_trace_error < 1e-10
    assert res.max_hermiticity_error < 1e-12


def test_agrees_with_gaussian_engine_on_a_short_run():
    net = single(Regime.FULL, omega=10.0, detuning=10.0, g=0.1)
    t = np.linspace(0, 1, 5)
    res = integrate_oracle(net, TruncationSpec(3), t)
    gauss = covariance_trajectory(build_generator(net), initial_state(net), t)
    assert np.max(np.abs(res.covariance - gauss)) < 1e-4


def test_budget_exceeded():
    net = blue_red(0.05, 0.05, "reversible")
    with pytest.raises(TruncationError, match="budget"):
        build_liouvillian(net, TruncationSpec(12))


def test_non_convergence_reported():
    net = single(g=0.0, nbar=2.0, mu=0.5)
    with pytest.raises(TruncationError, match="increase the cutoff"):
        integrate_oracle(net, TruncationSpec(2), [0.5])


def test_bad_cutoffs_rejected():
    net = single()
    with pytest.raises(ValueError):
        build_liouvillian(net, TruncationSpec((3, 3, 3)))
    with pytest.raises(ValueError):
        build_liouvillian(net, TruncationSpec(1))
