"""Brute-force density-matrix integration in a truncated number basis.

This module is an oracle for the Gaussian engine: it never touches the
drift/diffusion matrices. The master equation is assembled directly from
the network (Hamiltonian per regime, local dissipators, the photon-hopping
commutator, and the cascaded cross terms) and integrated with fixed-step RK4.
First and second quadrature moments are then read off the density matrix.

Every operator that appears is a *monomial* in ladder operators, i.e. a matrix
with at most one non-zero per row and per column, so the Liouvillian is
applied as ``K rho + rho K^dag + sum coef * X rho Y`` with gathers (see
:mod:`optoarray._kernels`) and never materialised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import TruncationError
from .model import CouplingKind, InitialState, NetworkSpec, Regime

DEFAULT_BUDGET = 10_000


@dataclass(frozen=True)
class TruncationSpec:
    """Maximum excitation number per mode (int, or one entry per mode in
    ``(a1, b1, a2, b2, ...)`` order) and the increment used for the
    convergence check. The RK4 step is ``step_factor / rate`` where ``rate``
    is the largest rate in the master equation."""

    cutoff: int | tuple = 4
    step: int = 1
    budget: int = DEFAULT_BUDGET
    tolerance: float = 1e-4
    step_factor: float = 0.05

    def cutoffs(self, n_modes, extra=0):
        c = self.cutoff
        cut = (c,) * n_modes if isinstance(c, int) else tuple(c)
        if len(cut) != n_modes:
            raise ValueError(f"need {n_modes} cutoffs, got {len(cut)}")
        if min(cut) < 2:
            raise ValueError("cutoffs must be at least 2")
        return tuple(n + extra for n in cut)


@dataclass(frozen=True, eq=False)
class DensityState:
    t: float
    rho: np.ndarray


# ---------------------------------------------------------------------------
# monomials: a word per mode, "-" = annihilate, "+" = create, read as an operator product


def _local_matrix(word, dim):
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    m = np.eye(dim)
    for op in word:
        m = m @ (a if op == "-" else a.T)
    return m


class Monomial:
    """Product of ladder operators, stored as ``{mode: word}``."""

    __slots__ = ("words",)

    def __init__(self, words=None):
        self.words = {m: w for m, w in (words or {}).items() if w}

    @classmethod
    def ladder(cls, mode, dagger=False):
        return cls({mode: "+" if dagger else "-"})

    def __mul__(self, other):
        out = dict(self.words)
        for m, w in other.words.items():
            out[m] = out.get(m, "") + w
        return Monomial(out)

    def dag(self):
        flip = {"-": "+", "+": "-"}
        return Monomial({m: "".join(flip[c] for c in reversed(w)) for m, w in self.words.items()})

    def key(self):
        return tuple(sorted(self.words.items()))


IDENTITY = Monomial()


class FockSpace:
    def __init__(self, dims):
        self.dims = tuple(int(d) for d in dims)
        self.dim = int(np.prod(self.dims))
        self.strides = [int(np.prod(self.dims[m + 1:])) for m in range(len(self.dims))]
        self._digits = np.stack(np.unravel_index(np.arange(self.dim), self.dims)) if self.dims else None
        self._cache = {}

    def gather(self, mono: Monomial, side):
        """Gather representation of ``mono``.

        ``side="left"``: ``(X rho)[i] = w[i] * rho[src[i]]``.
        ``side="right"``: ``(rho Y)[:, j] = w[j] * rho[:, src[j]]``.
        """
        key = (mono.key(), side)
        if key in self._cache:
            return self._cache[key]
        src = np.arange(self.dim)
        w = np.ones(self.dim)
        for m, word in mono.words.items():
            local = _local_matrix(word, self.dims[m])
            if side == "right":
                local = local.T
            nz = local != 0
            if np.any(nz.sum(axis=1) > 1):
                raise ValueError("operator is not a monomial")
            col = np.where(nz.any(axis=1), nz.argmax(axis=1), -1)
            d = self._digits[m]
            loc_src = col[d]
            valid = loc_src >= 0
            w = w * np.where(valid, local[d, np.maximum(loc_src, 0)], 0.0)
            src = np.where(valid & (src >= 0), src + (loc_src - d) * self.strides[m], -1)
        src = np.where(w != 0, src, -1)
        self._cache[key] = (src, w)
        return src, w

    def expect(self, rho, mono: Monomial):
        src, w = self.gather(mono, "left")
        ok = src >= 0
        return complex(np.sum(w[ok] * rho[src[ok], np.arange(self.dim)[ok]]))


def _clamped(gather):
    """Point annihilated rows at index 0 with weight 0 (the kernels never branch on -1)."""
    src, w = gather
    dead = src < 0
    return np.where(dead, 0, src), np.where(dead, 0.0, w)


class Liouvillian:
    """Linear map ``rho -> K rho + rho K^dag + sum_t c_t X_t rho Y_t``.

    ``k_terms`` are ``(coef, X)`` pairs summing to ``K``; ``sandwich`` holds
    ``(coef, X, Y)`` triples whose sum must preserve Hermiticity. Terms of
    ``K`` that move the same basis states share one gather.
    """

    def __init__(self, space: FockSpace, k_terms, sandwich):
        kmap = {}
        for coef, X in k_terms:
            if coef == 0:
                continue
            src, w = _clamped(space.gather(X, "left"))
            key = src.tobytes()
            if key in kmap:
                kmap[key][1] = kmap[key][1] + coef * w
            else:
                kmap[key] = [src, coef * w.astype(complex)]
        smap = {}
        for coef, X, Y in sandwich:
            key = (X.key(), Y.key())
            if key in smap:
                smap[key][0] += coef
            else:
                smap[key] = [complex(coef), X, Y]
        self.space = space
        n = space.dim
        kept = [v for v in kmap.values() if np.any(v[1] != 0)]
        self.ks = np.array([v[0] for v in kept], dtype=np.int64).reshape(len(kept), n)
        self.kw = np.array([v[1] for v in kept], dtype=complex).reshape(len(kept), n)
        sand = [v for v in smap.values() if v[0] != 0]
        gx = [_clamped(space.gather(X, "left")) for _, X, _ in sand]
        gy = [_clamped(space.gather(Y, "right")) for _, _, Y in sand]
        self.coefs = np.array([v[0] for v in sand], dtype=complex)
        self.xs = np.array([g[0] for g in gx], dtype=np.int64).reshape(len(sand), n)
        self.xw = np.array([g[1] for g in gx], dtype=float).reshape(len(sand), n)
        self.ys = np.array([g[0] for g in gy], dtype=np.int64).reshape(len(sand), n)
        self.yw = np.array([g[1] for g in gy], dtype=float).reshape(len(sand), n)

    @property
    def n_terms(self):
        return self.ks.shape[0] + self.coefs.shape[0]

    def arrays(self):
        return self.ks, self.kw, self.coefs, self.xs, self.xw, self.ys, self.yw

    def __call__(self, rho):
        return _kernels.lindblad_rhs(rho, *self.arrays())


def master_equation_terms(network: NetworkSpec):
    """``(K terms, sandwich terms)`` of the linearised master equation.

    ``K = -iH - sum_L L^dag L / 2`` plus the one-sided cascaded pieces.
    Mode ``2k`` is the optical and ``2k+1`` the mechanical mode of the k-th cavity.
    """
    pos = {c.index: k for k, c in enumerate(network.cavities)}
    a = {i: Monomial.ladder(2 * k) for i, k in pos.items()}
    b = {i: Monomial.ladder(2 * k + 1) for i, k in pos.items()}
    H = []
    jumps = []
    k_terms, sandwich = [], []
    for cav in network.cavities:
        ai, bi = a[cav.index], b[cav.index]
        if cav.regime is Regime.FULL:
            H += [(cav.detuning, ai.dag() * ai), (cav.omega_m, bi.dag() * bi)]
            for X in (ai, ai.dag()):
                for Y in (bi, bi.dag()):
                    H.append((cav.g, X * Y))
        elif cav.regime is Regime.BLUE_RWA:
            H += [(cav.g, ai * bi), (cav.g, ai.dag() * bi.dag())]
        else:
            H += [(cav.g, ai.dag() * bi), (cav.g, ai * bi.dag())]
        jumps.append((cav.kappa, ai))
        jumps.append((cav.mu * (cav.nbar + 1), bi))
        if cav.nbar > 0:
            jumps.append((cav.mu * cav.nbar, bi.dag()))
    for c in network.couplings:
        aj, ak = a[c.source], a[c.target]
        if c.kind is CouplingKind.REVERSIBLE:
            H += [(c.chi, aj * ak.dag()), (c.chi, aj.dag() * ak)]
        else:
            # s ([a_j rho, a_k^dag] + [a_k, rho a_j^dag])
            #   = s (a_j rho a_k^dag + a_k rho a_j^dag) - s a_k^dag a_j rho - s rho a_j^dag a_k
            s = math.sqrt(network.cavity(c.source).kappa * network.cavity(c.target).kappa)
            sandwich += [(s, aj, ak.dag()), (s, ak, aj.dag())]
            k_terms.append((-s, ak.dag() * aj))
    for coef, M in H:
        k_terms.append((-1j * coef, M))
    for rate, L in jumps:
        sandwich.append((rate, L, L.dag()))
        k_terms.append((-0.5 * rate, L.dag() * L))
    return k_terms, sandwich


def build_liouvillian(network: NetworkSpec, trunc: TruncationSpec, extra=0) -> Liouvillian:
    n_modes = 2 * len(network.cavities)
    cut = trunc.cutoffs(n_modes, extra)
    dims = [n + 1 for n in cut]
    dim = int(np.prod(dims))
    if dim > trunc.budget:
        raise TruncationError(f"Hilbert dimension {dim} for cutoffs {cut} exceeds budget {trunc.budget}")
    return Liouvillian(FockSpace(dims), *master_equation_terms(network))


def initial_density(network: NetworkSpec, space: FockSpace, kind=None):
    kind = InitialState(kind) if kind is not None else network.initial_state
    probs = []
    for k, cav in enumerate(network.cavities):
        probs.append(np.eye(space.dims[2 * k])[0])
        nb = cav.nbar if kind is InitialState.THERMAL_MECHANICS else 0.0
        p = np.zeros(space.dims[2 * k + 1])
        p[0] = 1.0
        if nb > 0:
            p = (nb / (nb + 1)) ** np.arange(p.size)
            p /= p.sum()
        probs.append(p)
    diag = probs[0]
    for p in probs[1:]:
        diag = np.kron(diag, p)
    return np.diag(diag).astype(complex)


def rate_scale(network: NetworkSpec):
    """Largest rate in the master equation; sets the RK4 step."""
    rates = []
    for cav in network.cavities:
        rates += [cav.kappa, cav.mu * (2 * cav.nbar + 1), 2 * cav.g]
        if cav.regime is Regime.FULL:
            rates += [abs(cav.detuning), cav.omega_m]
    for c in network.couplings:
        rates.append(c.chi if c.kind is CouplingKind.REVERSIBLE
                     else math.sqrt(network.cavity(c.source).kappa * network.cavity(c.target).kappa))
    return max(rates)


def _quadrature(mode):
    a = Monomial.ladder(mode)
    return [[(1.0, a), (1.0, a.dag())], [(-1j, a), (1j, a.dag())]]


def moments(space: FockSpace, rho, n_modes):
    """Means ``<x_i>`` and symmetrised second moments ``<{x_i, x_j}>/2``."""
    quads = [q for m in range(n_modes) for q in _quadrature(m)]
    n = len(quads)
    mean = np.array([sum(c * space.expect(rho, M) for c, M in q) for q in quads]).real
    second = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            val = 0.0
            for ci, Mi in quads[i]:
                for cj, Mj in quads[j]:
                    val += ci * cj * 0.5 * (space.expect(rho, Mi * Mj) + space.expect(rho, Mj * Mi))
            second[i, j] = second[j, i] = val.real
    return mean, second


@dataclass(frozen=True, eq=False)
class OracleResult:
    t: np.ndarray
    mean: np.ndarray
    second: np.ndarray
    cutoffs: tuple
    step: float
    max_trace_error: float
    max_hermiticity_error: float
    convergence: float

    @property
    def covariance(self):
        return self.second - self.mean[:, :, None] * self.mean[:, None, :]


def _rk4_run(network, liou, t_grid, step_max, initial=None):
    space = liou.space
    rho = initial_density(network, space, initial)
    n_modes = len(space.dims)
    t = 0.0
    means, seconds = [], []
    trace_err = herm_err = 0.0
    for t_next in t_grid:
        span = t_next - t
        if span > 0:
            n_sub = max(1, math.ceil(span / step_max - 1e-9))
            h = span / n_sub
            for _ in range(n_sub):
                k1 = liou(rho)
                k2 = liou(rho + 0.5 * h * k1)
                k3 = liou(rho + 0.5 * h * k2)
                k4 = liou(rho + h * k3)
                rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
                herm_err = max(herm_err, float(np.max(np.abs(rho - rho.conj().T))))
                rho = 0.5 * (rho + rho.conj().T)
        t = t_next
        trace_err = max(trace_err, abs(np.trace(rho).real - 1.0))
        m, s = moments(space, rho, n_modes)
        means.append(m)
        seconds.append(s)
    return np.array(means), np.array(seconds), trace_err, herm_err


def integrate_oracle(network: NetworkSpec, trunc: TruncationSpec, t_grid, initial=None, check=True):
    """Integrate at cutoff ``N`` and ``N + step``; return the finer run.

    Raises :class:`TruncationError` when the two runs differ by more than
    ``trunc.tolerance`` in any reported moment.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0) or t_grid[0] < 0:
        raise ValueError("t_grid must be non-negative and strictly increasing")
    step_max = trunc.step_factor / rate_scale(network)
    coarse = build_liouvillian(network, trunc)
    fine = build_liouvillian(network, trunc, extra=trunc.step) if check else coarse
    m1, s1, _, _ = _rk4_run(network, coarse, t_grid, step_max, initial) if check else (None, None, 0, 0)
    m2, s2, tr, he = _rk4_run(network, fine, t_grid, step_max, initial)
    conv = 0.0
    if check:
        conv = float(max(np.max(np.abs(m1 - m2)), np.max(np.abs(s1 - s2))))
        if conv >= trunc.tolerance:
            raise TruncationError(
                f"moments changed by {conv:.2e} between cutoffs {trunc.cutoffs(len(fine.space.dims))} "
                f"and +{trunc.step}; increase the cutoff"
            )
    cut = tuple(d - 1 for d in fine.space.dims)
    return OracleResult(t_grid, m2, s2, cut, step_max, tr, he, conv)
