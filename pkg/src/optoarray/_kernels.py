"""Hot inner loops, compiled with numba when available.

Set ``OPTOARRAY_DISABLE_NUMBA=1`` to force the pure-numpy path (useful for
debugging and for the benchmark in ``benchmarks/bench_kernels.py``). Both paths
compute the same quantities; the test-suite runs them against each other.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and os.environ.get("OPTOARRAY_DISABLE_NUMBA", "") not in ("1", "true", "yes")

RADICAND_CLAMP = 1e-10


# ---------------------------------------------------------------------------
# log-negativity of stacked 4x4 two-mode covariances
#
# det(full) is averaged over the block and its mode-swapped copy so that
# exchanging the two modes gives bit-identical results. The helpers index
# ``m[r, c]`` only, so they take a single 4x4 matrix (compiled loop) or a
# (4, 4, n) stack (numpy path) alike.


def _minor(m, r, c1, c2):
    return m[r, c1] * m[r + 1, c2] - m[r, c2] * m[r + 1, c1]


def _det4(m, o):
    """Determinant of ``m`` with rows and columns cyclically shifted by ``o``,
    as a Laplace expansion over the 2x2 minors of the two row pairs."""
    i0, i1, i2, i3 = o % 4, (o + 1) % 4, (o + 2) % 4, (o + 3) % 4

    def top(c1, c2):
        return m[i0, c1] * m[i1, c2] - m[i0, c2] * m[i1, c1]

    def bot(c1, c2):
        return m[i2, c1] * m[i3, c2] - m[i2, c2] * m[i3, c1]

    return (top(i0, i1) * bot(i2, i3) - top(i0, i2) * bot(i1, i3) + top(i0, i3) * bot(i1, i2)
            + top(i1, i2) * bot(i0, i3) - top(i1, i3) * bot(i0, i2) + top(i2, i3) * bot(i0, i1))


# the numpy path keeps these even when the names below are rebound to compiled versions
_minor_py, _det4_py = _minor, _det4


def _log_negativity_numpy(blocks):
    m = np.moveaxis(blocks, 0, -1)
    a = _minor_py(m, 0, 0, 1)
    b = _minor_py(m, 2, 2, 3)
    c = _minor_py(m, 0, 2, 3)
    full = 0.5 * (_det4_py(m, 0) + _det4_py(m, 2))
    gamma = 0.5 * (a + b) - c
    rad = gamma * gamma - full
    bad = rad < -RADICAND_CLAMP
    rad = np.where(rad < 0, 0.0, rad)
    f = gamma - np.sqrt(rad)
    with np.errstate(invalid="ignore"):  # f < 0 only for flagged (nonphysical) blocks
        en = np.where(f < 1, -0.5 * np.log(np.where(f < 1, f, 1.0)), 0.0)
    return gamma, f, en, bad


def _log_negativity_loop(blocks):
    n = blocks.shape[0]
    gamma = np.empty(n)
    f = np.empty(n)
    en = np.empty(n)
    bad = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        m = blocks[i]
        a = _minor(m, 0, 0, 1)
        b = _minor(m, 2, 2, 3)
        c = _minor(m, 0, 2, 3)
        full = 0.5 * (_det4(m, 0) + _det4(m, 2))
        g = 0.5 * (a + b) - c
        rad = g * g - full
        if rad < -RADICAND_CLAMP:
            bad[i] = True
        if rad < 0.0:
            rad = 0.0
        fi = g - np.sqrt(rad)
        gamma[i] = g
        f[i] = fi
        en[i] = -0.5 * np.log(fi) if fi < 1.0 else 0.0
    return gamma, f, en, bad


# ---------------------------------------------------------------------------
# Lindblad right-hand side  d rho/dt = K rho + rho K^dag + sum_t c_t X_t rho Y_t
#
# K and every X_t, Y_t are products of ladder operators, so each has at most one
# non-zero per row (K is stored as several such gathers, one per shift pattern):
#   (K rho)[i, :]    = sum_s kw[s, i] * rho[ks[s, i], :]
#   (X rho Y)[i, j]  = xw[i] * yw[j] * rho[xs[i], ys[j]]
# Rows an operator annihilates carry weight zero (and any valid index), which
# keeps the inner loops free of branches.
# rho and the result are Hermitian, so only the upper triangle of the sandwich
# part is evaluated and mirrored.


def _lindblad_rhs_numpy(rho, ks, kw, coefs, xs, xw, ys, yw):
    out = np.zeros_like(rho)
    for s in range(ks.shape[0]):
        out += kw[s][:, None] * rho[ks[s]]
    out = out + out.conj().T
    for t in range(coefs.shape[0]):
        out += coefs[t] * (xw[t][:, None] * yw[t][None, :]) * rho[xs[t][:, None], ys[t][None, :]]
    return out


def _lindblad_rhs_loop(rho, ks, kw, coefs, xs, xw, ys, yw):
    n = rho.shape[0]
    kr = np.zeros_like(rho)
    for s in range(ks.shape[0]):
        for i in range(n):
            src = ks[s, i]
            w = kw[s, i]
            if w == 0:
                continue
            for j in range(n):
                kr[i, j] += w * rho[src, j]
    out = np.empty_like(rho)
    for i in range(n):
        for j in range(i, n):
            out[i, j] = kr[i, j] + np.conj(kr[j, i])
    for t in range(coefs.shape[0]):
        for i in range(n):
            if xw[t, i] == 0:
                continue
            si = xs[t, i]
            li = coefs[t] * xw[t, i]
            for j in range(i, n):
                out[i, j] += li * yw[t, j] * rho[si, ys[t, j]]
    for i in range(n):
        out[i, i] = out[i, i].real
        for j in range(i + 1, n):
            out[j, i] = np.conj(out[i, j])
    return out


if USE_NUMBA:
    # the loops look these helpers up as globals when they are compiled
    _minor = numba.njit(inline="always")(_minor)
    _det4 = numba.njit(inline="always")(_det4)
    log_negativity_batch = numba.njit(cache=True)(_log_negativity_loop)
    lindblad_rhs = numba.njit(cache=True)(_lindblad_rhs_loop)
else:
    log_negativity_batch = _log_negativity_numpy
    lindblad_rhs = _lindblad_rhs_numpy

# always-available references for tests and the benchmark
log_negativity_batch_numpy = _log_negativity_numpy
lindblad_rhs_numpy = _lindblad_rhs_numpy
