"""Two-mode entanglement and mode correlations from quadrature covariances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NonPhysicalError
from .generator import ModeIndex

FORMULA_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class TwoModeBlock:
    gamma_A: np.ndarray
    gamma_B: np.ndarray
    gamma_C: np.ndarray

    @property
    def full(self):
        return np.block([[self.gamma_A, self.gamma_C], [self.gamma_C.T, self.gamma_B]])

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m, dtype=float)
        return cls(m[:2, :2].copy(), m[2:, 2:].copy(), m[:2, 2:].copy())

    def swapped(self):
        return TwoModeBlock(self.gamma_B, self.gamma_A, self.gamma_C.T)


@dataclass(frozen=True)
class NegativityResult:
    Gamma: float
    f: float
    E_N: float


def _slots(modes, m1, m2):
    m1, m2 = ModeIndex.parse(m1), ModeIndex.parse(m2)
    if m1 == m2:
        raise ValueError(f"two distinct modes are required, got {m1} twice")
    try:
        return modes.index(m1), modes.index(m2)
    except ValueError:
        raise KeyError(f"modes {m1}, {m2} not both in mode table {[str(m) for m in modes]}") from None


def _rows(i, j):
    return [2 * i, 2 * i + 1, 2 * j, 2 * j + 1]


def extract_two_mode(sigma, modes, m1, m2) -> TwoModeBlock:
    """4x4 covariance of modes ``m1`` (block A) and ``m2`` (block B).

    ``sigma`` may be a :class:`~optoarray.dynamics.CovarianceState` or a bare matrix.
    """
    sigma = getattr(sigma, "sigma", sigma)
    idx = _rows(*_slots(modes, m1, m2))
    return TwoModeBlock.from_matrix(sigma[np.ix_(idx, idx)])


def log_negativity(block) -> NegativityResult:
    """``E_N = -ln(f)/2`` for ``f < 1`` with ``f = Gamma - sqrt(Gamma^2 - det)`` and
    ``Gamma = (det A + det B)/2 - det C``; natural logarithm, vacuum covariance = identity.
    """
    m = block.full if isinstance(block, TwoModeBlock) else np.asarray(block, dtype=float)
    gamma, f, en, bad = _kernels.log_negativity_batch(np.ascontiguousarray(m[None]))
    if bad[0]:
        raise NonPhysicalError(f"nonphysical-block: Gamma^2 - det = {gamma[0] ** 2 - np.linalg.det(m):.3e}")
    return NegativityResult(float(gamma[0]), float(f[0]), float(en[0]))


def log_negativity_series(sigmas, modes, m1, m2):
    """E_N of one mode pair for a stack of covariance matrices (time series or sweep)."""
    sigmas = np.asarray(sigmas, dtype=float)
    idx = _rows(*_slots(modes, m1, m2))
    blocks = np.ascontiguousarray(sigmas[:, idx][:, :, idx])
    _, _, en, bad = _kernels.log_negativity_batch(blocks)
    if np.any(bad):
        raise NonPhysicalError(f"nonphysical-block at {int(np.argmax(bad))}")
    return en


def partial_transpose(m):
    """Mirror the second mode's momentum (p_B -> -p_B)."""
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    return flip @ np.asarray(m, dtype=float) @ flip


def symplectic_eigenvalues(m):
    """Symplectic spectrum of a 2n x 2n covariance, from the moduli of eig(i Omega m)."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0] // 2
    omega = np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    nu = np.sort(np.abs(np.linalg.eigvals(1j * omega @ m)))
    return nu[::2]


def min_pt_symplectic_eigenvalue(m):
    return float(symplectic_eigenvalues(partial_transpose(m))[0])


CORRELATION_FORMS = ("cc", "ccdag", "cdagc")


def mode_correlation(state, modes, j, k, form="ccdag"):
    """Normally-ordered correlation of ladder operators ``c_j`` and ``c_k``.

    ``form`` selects ``<c_j c_k>`` ("cc"), ``<c_j c_k^dag>`` ("ccdag") or
    ``<c_j^dag c_k>`` ("cdagc"; for ``j == k`` this is the occupation). First
    moments are included, so the result is the raw expectation value.
    """
    if isinstance(state, np.ndarray):
        sigma, mean = state, np.zeros(state.shape[0])
    else:
        sigma, mean = state.sigma, state.mean
    j, k = modes.index(ModeIndex.parse(j)), modes.index(ModeIndex.parse(k))
    V = sigma + np.outer(mean, mean)
    qj, pj, qk, pk = 2 * j, 2 * j + 1, 2 * k, 2 * k + 1
    if form == "cc":
        return 0.25 * complex(V[qj, qk] - V[pj, pk], V[qj, pk] + V[pj, qk])
    # symmetric ordering of c_j c_k^dag picks up the commutator for j == k
    shift = 0.5 if j == k else 0.0
    if form == "ccdag":
        return 0.25 * complex(V[qj, qk] + V[pj, pk], V[pj, qk] - V[qj, pk]) + shift
    if form == "cdagc":
        return 0.25 * complex(V[qj, qk] + V[pj, pk], V[qj, pk] - V[pj, qk]) - shift
    raise ValueError(f"unknown correlation form {form!r}; expected one of {CORRELATION_FORMS}")
