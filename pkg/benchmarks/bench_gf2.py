"""Compare the compiled and numpy GF(2) elimination kernels.

    python3 benchmarks/bench_gf2.py [--repeat 3]

Each case is timed with both kernels and the ranks are checked to agree.
"""
import argparse
import timeit

import numpy as np

from cubicloc.gf2 import BitMatrix, backend
from cubicloc.models import build_model


def cases(rng):
    for L in (5, 9):
        m = build_model("cubic_code", L)
        yield f"cubic L={L} stabilizer rank ({m.n_generators}x{2 * m.n_qubits})", m.stabilizer_matrix
    for n in (512, 1024):
        dense = rng.integers(0, 2, size=(n, 2 * n), dtype=np.uint8)
        yield f"random {n}x{2 * n}", BitMatrix.from_dense(dense)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    kernels = sorted(backend.KERNELS)
    if "cython" not in kernels:
        print("compiled kernel not built; only the numpy fallback is available")
    rng = np.random.default_rng(0)
    print(f"{'case':<44}" + "".join(f"{k + ' [s]':>14}" for k in kernels) + f"{'speedup':>10}")
    previous = backend.BACKEND
    try:
        for label, matrix in cases(rng):
            times, ranks = {}, set()
            for k in kernels:
                backend.use_backend(k)
                ranks.add(matrix.rank())
                times[k] = min(timeit.repeat(matrix.rank, number=1, repeat=args.repeat))
            if len(ranks) != 1:
                raise SystemExit(f"kernels disagree on {label}: ranks {sorted(ranks)}")
            speed = f"{times['python'] / times['cython']:>9.1f}x" if "cython" in times else ""
            print(f"{label:<44}" + "".join(f"{times[k]:>14.4f}" for k in kernels) + speed)
    finally:
        backend.use_backend(previous)


if __name__ == "__main__":
    main()
