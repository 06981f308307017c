"""The compiled kernels and their pure-numpy fallbacks compute the same thing."""

import os
import subprocess
import sys

import numpy as np

from optoarray import _kernels
from optoarray.fock import TruncationSpec, build_liouvillian

from _gaussian import random_state, two_mode_squeezed
from _networks import blue_red


def test_log_negativity_paths_agree():
    rng = np.random.default_rng(0)
    blocks = np.stack([random_state(rng, 2, scale=0.8) for _ in range(500)] + [two_mode_squeezed(0.5), np.eye(4)])
    fast = _kernels.log_negativity_batch(blocks)
    ref = _kernels.log_negativity_batch_numpy(blocks)
    for a, b in zip(fast[:3], ref[:3]):
        assert np.allclose(a, b, rtol=1e-10, atol=1e-12)
    assert np.array_equal(fast[3], ref[3])


def test_radicand_clamp():
    # Gamma^2 - det slightly negative within tolerance: clamped, not flagged
    blocks = np.eye(4)[None] * (1 + 1e-13)
    for fn in (_kernels.log_negativity_batch, _kernels.log_negativity_batch_numpy):
        gamma, f, en, bad = fn(blocks)
        assert not bad[0] and en[0] == 0.0


def test_lindblad_rhs_paths_agree():
    liou = build_liouvillian(blue_red(0.05, 0.05, "cascaded", chi=0.5), TruncationSpec((2, 3, 2, 3)))
    rng = np.random.default_rng(1)
    n = liou.space.dim
    rho = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = rho + rho.conj().T
    fast = liou(rho)
    ref = _kernels.lindblad_rhs_numpy(rho, *liou.arrays())
    assert np.allclose(fast, ref, atol=1e-12, rtol=0)
    assert np.allclose(fast, fast.conj().T, atol=1e-13)


def test_environment_flag_selects_numpy_path():
    code = "from optoarray import _kernels; print(_kernels.USE_NUMBA, _kernels.lindblad_rhs is _kernels.lindblad_rhs_numpy)"
    env = dict(os.environ, OPTOARRAY_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "True"]
