"""Compare the compiled and NumPy statevector backends.

Usage: python3 benchmarks/bench_kernels.py [--qubits 12] [--repeat 5]

Prints microseconds per gate application for each kernel and backend, plus the
wall time of one full xy_cd objective evaluation under each backend.
"""
import argparse
import importlib
import timeit

import numpy as np

from cdqaoa import _kernels_py
from cdqaoa.portfolio import random_instance
from cdqaoa.qaoa import AnsatzConfig, build_ansatz, evaluate


def kernel_cases(n, rng):
    dim = 1 << n
    energies = rng.normal(size=dim)
    ii = np.arange(n, dtype=np.int64)
    jj = (ii + 1) % n
    m = 64
    xs = np.array([(1 << a) | (1 << b) for a, b in rng.integers(0, n, (m, 2)) if a != b], dtype=np.int64)
    k = xs.shape[0]
    zs = rng.integers(0, dim, k).astype(np.int64)
    ph = np.bitwise_count(xs & zs).astype(np.int64) % 4
    th = rng.normal(size=k)
    return {
        "phase": (1, lambda mod, a: mod.apply_phase(a, energies, 0.3)),
        "xy_edges": (n, lambda mod, a: mod.apply_xy_edges(a, ii, jj, 0.3)),
        "pauli_rotation": (k, lambda mod, a: mod.apply_pauli_rotations(a, xs, zs, ph, th)),
        "rx_all": (n, lambda mod, a: mod.apply_rx_all(a, n, 0.3)),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--qubits", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    n = args.qubits
    backends = {"numpy": _kernels_py}
    try:
        backends["cython"] = importlib.import_module("cdqaoa._kernels")
    except ImportError:
        print("compiled backend not built; timing NumPy only")
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    amps /= np.linalg.norm(amps)
    print(f"n = {n}: microseconds per gate")
    print(f"{'kernel':16s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup")
    for name, (per, fn) in kernel_cases(n, rng).items():
        times = []
        for mod in backends.values():
            a = amps.copy()
            t = min(timeit.repeat(lambda: fn(mod, a), number=20, repeat=args.repeat)) / 20 / per
            times.append(t * 1e6)
        speed = f"{times[0] / times[-1]:10.1f}x" if len(times) > 1 else ""
        print(f"{name:16s}" + "".join(f"{t:12.2f}" for t in times) + speed)

    inst = random_instance(100, n, max(1, n // 3))
    cfg = AnsatzConfig("xy_cd", depth=2)
    program = build_ansatz(cfg, inst)
    x = np.full(program.n_params, 0.2)
    print(f"\nxy_cd p=2 objective evaluation ({program.n_params} parameters):")
    import cdqaoa.qaoa as q
    original = q.kernels
    for name, mod in backends.items():
        q.kernels = mod
        t = min(timeit.repeat(lambda: evaluate(program, x, cvar_alpha=0.25), number=5,
                              repeat=args.repeat)) / 5
        print(f"  {name:8s} {t * 1e3:8.2f} ms")
    q.kernels = original


if __name__ == "__main__":
    main()
