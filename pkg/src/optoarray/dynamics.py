"""Time evolution, steady states and stability of a quadratic generator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, lu_factor, lu_solve

from .errors import NonPhysicalError, OptoarrayError, UnstableError
from .generator import QuadraticGenerator, symplectic_form
from .model import CavitySpec, InitialState, NetworkSpec

PHYSICALITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CovarianceState:
    t: float
    mean: np.ndarray
    sigma: np.ndarray


@dataclass(frozen=True)
class StabilityReport:
    max_real_eig: float
    hurwitz: bool
    spectrum: tuple


def min_physical_eigenvalue(sigma):
    """Smallest eigenvalue of ``sigma + i Omega``; negative means unphysical."""
    n = sigma.shape[0] // 2
    return float(np.linalg.eigvalsh(sigma + 1j * symplectic_form(n))[0])


def check_physical(sigma, tol=PHYSICALITY_TOL):
    if not np.allclose(sigma, sigma.T, atol=tol, rtol=0):
        raise NonPhysicalError("covariance matrix is not symmetric")
    lam = min_physical_eigenvalue(sigma)
    if lam < -tol:
        raise NonPhysicalError(f"sigma + i*Omega has eigenvalue {lam:.3e} < 0")


def initial_state(network: NetworkSpec, kind=None) -> CovarianceState:
    """Optics in vacuum; mechanics in vacuum or thermal at their bath occupation."""
    kind = InitialState(kind) if kind is not None else network.initial_state
    diag = []
    for cav in network.cavities:
        nb = cav.nbar if kind is InitialState.THERMAL_MECHANICS else 0.0
        diag += [1.0, 1.0, 2 * nb + 1, 2 * nb + 1]
    n = len(diag)
    return CovarianceState(0.0, np.zeros(n), np.diag(diag))


def _check_finite(gen):
    if not (np.all(np.isfinite(gen.A)) and np.all(np.isfinite(gen.D))):
        raise OptoarrayError("drift or diffusion matrix contains non-finite entries")


def propagator(gen: QuadraticGenerator, dt):
    """``Phi = exp(A dt)`` and ``Q = int_0^dt exp(A s) D exp(A^T s) ds``.

    Both come out of one exponential of the block matrix ``[[A, D], [0, -A^T]]``:
    its upper blocks are ``Phi`` and ``Q Phi^{-T}``. The ``-A^T`` block grows
    like ``exp(|Re lambda| dt)``, so long steps are built from a short one by
    repeated doubling, ``Phi -> Phi^2`` and ``Q -> Phi Q Phi^T + Q``.
    """
    n = gen.A.shape[0]
    decay = max(0.0, -float(np.linalg.eigvals(gen.A).real.min()))
    doublings = max(0, int(np.ceil(np.log2(decay * dt))) if decay * dt > 1 else 0)
    h = dt / 2 ** doublings
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = gen.A
    block[:n, n:] = gen.D
    block[n:, n:] = -gen.A.T
    E = expm(block * h)
    phi = E[:n, :n]
    q = E[:n, n:] @ phi.T
    for _ in range(doublings):
        q = phi @ q @ phi.T + q
        phi = phi @ phi
    return phi, 0.5 * (q + q.T)


def evolve(gen: QuadraticGenerator, initial: CovarianceState, t_grid):
    """Exact covariance/mean propagation onto every time in ``t_grid``."""
    _check_finite(gen)
    check_physical(initial.sigma)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ValueError("t_grid must be a non-empty 1-D sequence")
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    if t_grid[0] < initial.t:
        raise ValueError("t_grid starts before the initial state")

    cache = {}
    sigma, mean, t = initial.sigma.copy(), initial.mean.copy(), initial.t
    out = []
    for t_next in t_grid:
        dt = t_next - t
        if dt > 0:
            # uniform grids hit the cache on every step after the first
            key = round(dt, 12)
            if key not in cache:
                cache[key] = propagator(gen, dt)
            phi, q = cache[key]
            sigma = phi @ sigma @ phi.T + q
            sigma = 0.5 * (sigma + sigma.T)
            mean = phi @ mean
        t = t_next
        out.append(CovarianceState(float(t), mean.copy(), sigma.copy()))
    return out


def covariance_trajectory(gen, initial, t_grid):
    """Stacked ``(len(t_grid), 2M, 2M)`` covariance array from :func:`evolve`."""
    return np.stack([s.sigma for s in evolve(gen, initial, t_grid)])


def stability(gen: QuadraticGenerator) -> StabilityReport:
    eig = np.linalg.eigvals(gen.A)
    eig = eig[np.lexsort((eig.imag, eig.real))]
    top = float(eig.real.max())
    return StabilityReport(top, top < 0, tuple(complex(e) for e in eig))


def solve_lyapunov(A, D, refine=2):
    """Solve ``A X + X A^T + D = 0`` through the Kronecker-vectorised linear system."""
    n = A.shape[0]
    eye = np.eye(n)
    lu = lu_factor(np.kron(eye, A) + np.kron(A, eye))

    def solve(rhs):
        return lu_solve(lu, rhs)

    X = solve(-D.reshape(-1, order="F")).reshape(n, n, order="F")
    X = 0.5 * (X + X.T)
    for _ in range(refine):
        R = A @ X + X @ A.T + D
        dX = solve(-R.reshape(-1, order="F")).reshape(n, n, order="F")
        X = X + 0.5 * (dX + dX.T)
    return X


def lyapunov_residual(gen, sigma):
    return float(np.linalg.norm(gen.A @ sigma + sigma @ gen.A.T + gen.D))


def steady_state(gen: QuadraticGenerator) -> CovarianceState:
    _check_finite(gen)
    report = stability(gen)
    if not report.hurwitz:
        raise UnstableError(report)
    sigma = solve_lyapunov(gen.A, gen.D)
    return CovarianceState(float("inf"), np.zeros(gen.A.shape[0]), sigma)


def analytic_stability_bounds(cavity: CavitySpec):
    """Coupling thresholds: blue sideband (RWA) ``sqrt(kappa mu)/2`` and red sideband
    ``sqrt(omega_m^2 + (mu^2 + kappa^2)/4) / 2``.

    The eigenvalue test in :func:`stability` is authoritative; these only locate
    the crossing points.
    """
    k, m, w = cavity.kappa, cavity.mu, cavity.omega_m
    blue = 0.5 * np.sqrt(k * m)
    red = 0.5 * np.sqrt(w ** 2 + (m ** 2 + k ** 2) / 4)
    return float(blue), float(red)
