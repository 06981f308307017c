"""Adiabatic-elimination estimates for two-cavity blue/red networks.

When both optical modes are much faster than the mechanics they can be
eliminated, leaving two mechanical oscillators with induced damping/gain and
an effective coupling. The closed forms below give the resulting steady-state
phonon cross-correlation ``<b2 b1>``; :func:`compare_with_full_model` sets
them against the full Lyapunov solution.

Cavity 1 is on the blue sideband (gain, rate ``Gamma_1``) and cavity 2 on the
red sideband (cooling, rate ``Gamma_2``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dynamics import steady_state
from .entanglement import mode_correlation
from .errors import EliminatedModelUnstable, InvalidParameterError
from .generator import build_generator
from .model import CavitySpec, CouplingKind, CouplingSpec, NetworkSpec, Regime, validate


@dataclass(frozen=True)
class AdiabaticParams:
    """Rates of the eliminated mechanical model.

    For the cascaded variant ``Gamma_1``/``Gamma_2`` hold the feed-forward rates
    ``4 g_k^2 / kappa_k`` and ``chi_prime``, ``eta_1``, ``eta_2`` are zero.
    """

    Gamma_1: float
    Gamma_2: float
    chi_prime: float
    eta_1: complex
    eta_2: complex
    gamma_1: float
    gamma_2: float
    cascaded: bool = False

    @property
    def valid(self):
        return self.gamma_1 > 0


def _positive(**rates):
    for name, value in rates.items():
        if not (math.isfinite(value) and value > 0):
            raise InvalidParameterError(f"{name} must be positive and finite, got {value}")


def adiabatic_params_reversible(g1, g2, kappa1, kappa2, mu1, mu2, chi12) -> AdiabaticParams:
    _positive(kappa1=kappa1, kappa2=kappa2, mu1=mu1, mu2=mu2, chi12=chi12)
    den = kappa1 * kappa2 + 4 * chi12 ** 2
    Gamma_1 = 4 * g1 ** 2 * kappa2 / den
    Gamma_2 = 4 * g2 ** 2 * kappa1 / den
    chi_prime = 4 * chi12 * g1 * g2 / den
    eta_1 = complex(4 * chi12 * g1 * math.sqrt(kappa2), 2 * g1 * kappa2 * math.sqrt(kappa1)) / den
    eta_2 = complex(4 * chi12 * g2 * math.sqrt(kappa1), 2 * g2 * kappa1 * math.sqrt(kappa2)) / den
    return AdiabaticParams(Gamma_1, Gamma_2, chi_prime, eta_1, eta_2, mu1 - Gamma_1, mu2 + Gamma_2)


def adiabatic_params_cascaded(g1, g2, kappa1, kappa2, mu1, mu2) -> AdiabaticParams:
    _positive(kappa1=kappa1, kappa2=kappa2, mu1=mu1, mu2=mu2)
    Gamma_1 = 4 * g1 ** 2 / kappa1
    Gamma_2 = 4 * g2 ** 2 / kappa2
    return AdiabaticParams(Gamma_1, Gamma_2, 0.0, 0j, 0j, mu1 - Gamma_1, mu2 + Gamma_2, cascaded=True)


def _total_damping(params):
    total = params.gamma_1 + params.gamma_2
    if not total > 0:
        raise EliminatedModelUnstable(
            f"eliminated-model-unstable: gamma_1 + gamma_2 = {total:.3e} is not positive"
        )
    return total


def steady_correlation_reversible(params: AdiabaticParams, nb1, nb2) -> complex:
    """``<b2 b1> = 2i chi' (1 + nb1 + nb2) / (gamma_1 + gamma_2)``."""
    return 2j * params.chi_prime * (1 + nb1 + nb2) / _total_damping(params)


def steady_correlation_cascaded(params: AdiabaticParams, nb1) -> float:
    """``<b2 b1> = 2 sqrt(Gamma_1 Gamma_2) nb1 / (gamma_1 + gamma_2)``."""
    return 2 * math.sqrt(params.Gamma_1 * params.Gamma_2) * nb1 / _total_damping(params)


def blue_red_pair(g1, g2, kind, chi12=1.0, kappa=(1.0, 1.0), mu=(0.01, 0.01), nbar=0.0, omega_m=200.0):
    """Validated two-cavity network: cavity 1 blue RWA, cavity 2 red RWA."""
    kind = CouplingKind(kind)
    cavities = (
        CavitySpec(1, kappa[0], mu[0], omega_m, g=g1, nbar=nbar, regime=Regime.BLUE_RWA),
        CavitySpec(2, kappa[1], mu[1], omega_m, g=g2, nbar=nbar, regime=Regime.RED_RWA),
    )
    chi = chi12 if kind is CouplingKind.REVERSIBLE else 0.0
    return validate(NetworkSpec(cavities, (CouplingSpec(kind, 1, 2, chi),)))


@dataclass(frozen=True)
class AppendixComparison:
    g1: float
    g2: float
    kind: CouplingKind
    analytic: complex
    full: complex
    nb1: float
    nb2: float

    @property
    def relative_error(self):
        return abs(self.analytic - self.full) / abs(self.full)


def compare_with_full_model(g1, g2, kind, chi12=1.0, kappa=(1.0, 1.0), mu=(0.01, 0.01), nbar=0.0):
    """Analytic ``<b2 b1>`` next to the full steady-state value.

    The phonon occupations fed into the formulas come from the same full
    solution. Raises :class:`~optoarray.errors.UnstableError` when the full
    model has no steady state.
    """
    kind = CouplingKind(kind)
    net = blue_red_pair(g1, g2, kind, chi12, kappa, mu, nbar)
    gen = build_generator(net)
    ss = steady_state(gen)
    full = mode_correlation(ss, gen.modes, "b2", "b1", "cc")
    nb1 = mode_correlation(ss, gen.modes, "b1", "b1", "cdagc").real
    nb2 = mode_correlation(ss, gen.modes, "b2", "b2", "cdagc").real
    if kind is CouplingKind.REVERSIBLE:
        p = adiabatic_params_reversible(g1, g2, kappa[0], kappa[1], mu[0], mu[1], chi12)
        analytic = steady_correlation_reversible(p, nb1, nb2)
    else:
        p = adiabatic_params_cascaded(g1, g2, kappa[0], kappa[1], mu[0], mu[1])
        analytic = complex(steady_correlation_cascaded(p, nb1))
    return AppendixComparison(g1, g2, kind, analytic, full, nb1, nb2)
