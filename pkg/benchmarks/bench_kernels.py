"""Time the compiled kernels against their pure-numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

The numba path is what runs by default; ``OPTOARRAY_DISABLE_NUMBA=1`` selects
the numpy path for the whole package.
"""

import argparse
import time

import numpy as np
from scipy.linalg import expm

from optoarray import _kernels
from optoarray.fock import TruncationSpec, build_liouvillian
from optoarray.model import CavitySpec, CouplingKind, CouplingSpec, NetworkSpec, Regime, validate


def random_blocks(n, seed=0):
    rng = np.random.default_rng(seed)
    omega = np.kron(np.eye(2), [[0.0, 1.0], [-1.0, 0.0]])
    out = np.empty((n, 4, 4))
    for i in range(n):
        h = rng.normal(size=(4, 4))
        s = expm(omega @ (h + h.T) * 0.25)
        out[i] = s @ np.diag(np.repeat(rng.uniform(1, 3, 2), 2)) @ s.T
    return out


def oracle_network():
    cavities = (
        CavitySpec(1, 1.0, 0.01, 10.0, g=0.05, regime=Regime.BLUE_RWA),
        CavitySpec(2, 1.0, 0.01, 10.0, g=0.05, regime=Regime.RED_RWA),
    )
    return validate(NetworkSpec(cavities, (CouplingSpec(CouplingKind.CASCADED, 1, 2),)))


def best_of(fn, repeat):
    fn()  # warm-up (includes JIT compilation for the numba path)
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--blocks", type=int, default=20_000)
    args = parser.parse_args(argv)

    blocks = random_blocks(args.blocks)
    liou = build_liouvillian(oracle_network(), TruncationSpec((4, 5, 4, 5)))
    rng = np.random.default_rng(1)
    n = liou.space.dim
    rho = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = rho + rho.conj().T
    arrays = liou.arrays()

    cases = [
        (f"log-negativity, {args.blocks} blocks",
         lambda: _kernels.log_negativity_batch(blocks), lambda: _kernels.log_negativity_batch_numpy(blocks)),
        (f"master-equation RHS, dim {n}",
         lambda: _kernels.lindblad_rhs(rho, *arrays), lambda: _kernels.lindblad_rhs_numpy(rho, *arrays)),
    ]
    print(f"numba enabled: {_kernels.USE_NUMBA}")
    print(f"{'kernel':36s} {'compiled [ms]':>14} {'numpy [ms]':>12} {'speed-up':>9}")
    for label, fast, slow in cases:
        tf, ts = best_of(fast, args.repeat), best_of(slow, args.repeat)
        print(f"{label:36s} {1e3 * tf:14.3f} {1e3 * ts:12.3f} {ts / tf:9.1f}")


if __name__ == "__main__":
    main()
