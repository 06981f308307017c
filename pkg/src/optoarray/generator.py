"""Compile a network into its linear quadrature dynamics.

Quadratures follow ``q = a + a^dag`` and ``p = -i (a - a^dag)``, so that
``[q, p] = 2i`` and the vacuum covariance is the identity. Modes are ordered
``(a1, b1, a2, b2, ...)`` and mode ``m`` owns rows ``2m`` and ``2m + 1``.
The compiled model is

    d<x>/dt = A <x>,        d(sigma)/dt = A sigma + sigma A^T + D.

Two independent construction routes exist: :func:`build_generator` stamps the
drift/diffusion blocks term by term, while :func:`generator_from_lindblad`
derives them from a quadratic Hamiltonian and linear jump operators.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import OptoarrayError
from .model import CouplingKind, NetworkSpec, Regime, _components

OPTICAL = "a"
MECHANICAL = "b"

_MODE_RE = re.compile(r"^\s*([ab])(\d+)\s*$")


@dataclass(frozen=True, order=True)
class ModeIndex:
    cavity: int
    kind: str

    @classmethod
    def parse(cls, text):
        """``"a2"`` -> optical mode of cavity 2, ``"b1"`` -> mechanical mode of cavity 1."""
        if isinstance(text, ModeIndex):
            return text
        m = _MODE_RE.match(str(text))
        if m is None:
            raise ValueError(f"cannot parse mode label {text!r}; expected e.g. 'a1' or 'b2'")
        return cls(int(m.group(2)), m.group(1))

    def __str__(self):
        return f"{self.kind}{self.cavity}"


def symplectic_form(n_modes):
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def mode_table(network: NetworkSpec):
    return tuple(ModeIndex(c.index, kind) for c in network.cavities for kind in (OPTICAL, MECHANICAL))


@dataclass(frozen=True, eq=False)
class QuadraticGenerator:
    A: np.ndarray
    D: np.ndarray
    modes: tuple

    def __post_init__(self):
        self.A.setflags(write=False)
        self.D.setflags(write=False)

    @property
    def n_modes(self):
        return len(self.modes)

    def slot(self, mode):
        """Position of ``mode`` in the mode table; its quadratures are rows ``2*slot, 2*slot+1``."""
        return self.modes.index(ModeIndex.parse(mode))


def _stamp(M, i, j, block):
    M[2 * i:2 * i + 2, 2 * j:2 * j + 2] += block


def build_generator(network: NetworkSpec) -> QuadraticGenerator:
    if not network.validated:
        raise OptoarrayError("build_generator requires a validated network (call model.validate first)")
    modes = mode_table(network)
    pos = {c.index: k for k, c in enumerate(network.cavities)}
    n = len(modes)
    A = np.zeros((2 * n, 2 * n))
    D = np.zeros((2 * n, 2 * n))
    eye = np.eye(2)
    rot = np.array([[0.0, 1.0], [-1.0, 0.0]])  # dq += w p, dp -= w q
    squeeze = np.array([[0.0, -1.0], [-1.0, 0.0]])  # blue sideband
    swap = rot  # red sideband and photon hopping share the beam-splitter form
    position = np.array([[0.0, 0.0], [-2.0, 0.0]])  # dp_x -= 2 g q_y

    for cav in network.cavities:
        ia, ib = 2 * pos[cav.index], 2 * pos[cav.index] + 1
        if cav.regime is Regime.FULL:
            _stamp(A, ia, ia, cav.detuning * rot)
            _stamp(A, ib, ib, cav.omega_m * rot)
            _stamp(A, ia, ib, cav.g * position)
            _stamp(A, ib, ia, cav.g * position)
        elif cav.regime is Regime.BLUE_RWA:
            _stamp(A, ia, ib, cav.g * squeeze)
            _stamp(A, ib, ia, cav.g * squeeze)
        else:
            _stamp(A, ia, ib, cav.g * swap)
            _stamp(A, ib, ia, cav.g * swap)
        _stamp(A, ia, ia, -0.5 * cav.kappa * eye)
        _stamp(A, ib, ib, -0.5 * cav.mu * eye)
        _stamp(D, ia, ia, cav.kappa * eye)
        _stamp(D, ib, ib, cav.mu * (2 * cav.nbar + 1) * eye)

    for c in network.couplings:
        j, k = 2 * pos[c.source], 2 * pos[c.target]
        if c.kind is CouplingKind.REVERSIBLE:
            _stamp(A, j, k, c.chi * swap)
            _stamp(A, k, j, c.chi * swap)
        else:
            rate = np.sqrt(network.cavity(c.source).kappa * network.cavity(c.target).kappa)
            _stamp(A, k, j, -rate * eye)
            _stamp(D, j, k, rate * eye)
            _stamp(D, k, j, rate * eye)
    return QuadraticGenerator(A, D, modes)


# ---------------------------------------------------------------------------
# Second route: quadratic Hamiltonian + linear Lindblad operators.


def ladder_vector(n_modes, slot, dagger=False):
    """Coefficients ``c`` with ``a = c . x`` (or ``a^dag``) for the mode at ``slot``."""
    c = np.zeros(2 * n_modes, dtype=complex)
    c[2 * slot] = 0.5
    c[2 * slot + 1] = -0.5j if dagger else 0.5j
    return c


def quadratic_form(coef, u, v, add_hc=True):
    """Real symmetric ``h`` with ``coef (u.x)(v.x) [+ h.c.] = x^T h x / 2 + const``."""
    sym = 0.5 * (np.outer(u, v) + np.outer(v, u)) * coef
    if add_hc:
        return 4.0 * sym.real
    if np.max(np.abs(sym.imag), initial=0.0) > 1e-12:
        raise ValueError("term is not Hermitian; pass add_hc=True")
    return 2.0 * sym.real


def generator_from_lindblad(modes, hamiltonian, jumps) -> QuadraticGenerator:
    """Gaussian generator of ``d rho/dt = -i[H, rho] + sum_L D[L] rho``.

    ``hamiltonian`` is the real symmetric matrix ``h`` of ``H = x^T h x / 2``;
    each jump is a complex vector ``c`` with ``L = c . x``.
    """
    n = len(modes)
    omega = symplectic_form(n)
    A = 2.0 * omega @ hamiltonian
    D = np.zeros((2 * n, 2 * n))
    for c in jumps:
        cc = np.outer(c, c.conj())
        A = A - 2.0 * omega @ cc.imag
        D = D + 4.0 * cc.real
    return QuadraticGenerator(A, D, tuple(modes))


def lindblad_terms(network: NetworkSpec, optical_decay=True):
    """Quadratic Hamiltonian matrix and jump vectors for a validated network.

    Only reversible couplings are included; cascaded ones are handled by
    :func:`cascade_decomposition`, which also supplies the optical decays
    (hence ``optical_decay=False`` there).
    """
    modes = mode_table(network)
    n = len(modes)
    pos = {c.index: k for k, c in enumerate(network.cavities)}
    h = np.zeros((2 * n, 2 * n))
    jumps = []
    for cav in network.cavities:
        a = ladder_vector(n, 2 * pos[cav.index])
        ad = ladder_vector(n, 2 * pos[cav.index], dagger=True)
        b = ladder_vector(n, 2 * pos[cav.index] + 1)
        bd = ladder_vector(n, 2 * pos[cav.index] + 1, dagger=True)
        if cav.regime is Regime.FULL:
            h += quadratic_form(cav.detuning, ad, a, add_hc=False)
            h += quadratic_form(cav.omega_m, bd, b, add_hc=False)
            h += quadratic_form(cav.g, a + ad, b + bd, add_hc=False)
        elif cav.regime is Regime.BLUE_RWA:
            h += quadratic_form(cav.g, a, b)
        else:
            h += quadratic_form(cav.g, ad, b)
        if optical_decay:
            jumps.append(np.sqrt(cav.kappa) * a)
        jumps.append(np.sqrt(cav.mu * (cav.nbar + 1)) * b)
        if cav.nbar > 0:
            jumps.append(np.sqrt(cav.mu * cav.nbar) * bd)
    for c in network.couplings:
        if c.kind is CouplingKind.REVERSIBLE:
            aj = ladder_vector(n, 2 * pos[c.source], dagger=True)
            ak = ladder_vector(n, 2 * pos[c.target])
            h += quadratic_form(c.chi, aj, ak)
    return modes, h, jumps


@dataclass(frozen=True)
class CascadeDecomposition:
    """Cascaded couplings as collective decays plus a Hermitian exchange term.

    ``chains`` maps each chain (tuple of cavity indices) to its collective jump
    coefficients, ``c = sum_k sqrt(kappa_k) a_k``. ``h_eff[j, k]`` is the
    coefficient of ``a_j^dag a_k`` (rows/columns follow cavity order).
    """

    chains: tuple
    h_eff: np.ndarray


def cascade_decomposition(network: NetworkSpec) -> CascadeDecomposition:
    if any(c.kind is not CouplingKind.CASCADED for c in network.couplings):
        raise OptoarrayError("cascade_decomposition supports cascaded couplings only")
    pos = {c.index: k for k, c in enumerate(network.cavities)}
    kappa = {c.index: c.kappa for c in network.cavities}
    chains = _components(list(pos), [(c.source, c.target) for c in network.couplings])
    h_eff = np.zeros((len(pos), len(pos)), dtype=complex)
    for c in network.couplings:
        s = np.sqrt(kappa[c.source] * kappa[c.target])
        j, k = pos[c.source], pos[c.target]
        h_eff[j, k] += 0.5j * s
        h_eff[k, j] -= 0.5j * s
    out = tuple(
        (tuple(sorted(ch)), np.array([np.sqrt(kappa[i]) for i in sorted(ch)]))
        for ch in sorted(chains)
    )
    return CascadeDecomposition(out, h_eff)


def generator_from_cascade(network: NetworkSpec, decomposition: CascadeDecomposition) -> QuadraticGenerator:
    """Rebuild the generator of a cascaded network from its collective-decay form."""
    uncoupled = NetworkSpec(network.cavities, (), network.initial_state, validated=True)
    modes, h, jumps = lindblad_terms(uncoupled, optical_decay=False)
    n = len(modes)
    pos = {c.index: k for k, c in enumerate(network.cavities)}
    for chain, coeffs in decomposition.chains:
        jumps.append(sum(w * ladder_vector(n, 2 * pos[i]) for i, w in zip(chain, coeffs)))
    order = [c.index for c in network.cavities]
    for j, jj in enumerate(order):
        for k, kk in enumerate(order):
            if j < k and decomposition.h_eff[j, k] != 0:
                h += quadratic_form(
                    decomposition.h_eff[j, k],
                    ladder_vector(n, 2 * pos[jj], dagger=True),
                    ladder_vector(n, 2 * pos[kk]),
                )
    return generator_from_lindblad(modes, h, jumps)


def reference_generator(network: NetworkSpec) -> QuadraticGenerator:
    """Generator obtained through the Hamiltonian/jump route, for cross-checks."""
    if network.coupling_kind is CouplingKind.CASCADED:
        return generator_from_cascade(network, cascade_decomposition(network))
    modes, h, jumps = lindblad_terms(network)
    return generator_from_lindblad(modes, h, jumps)
