"""Benchmark the numba kernels against the pure-numpy fallbacks.

Times the three hot kernels at the live comparison size (window 10,
11 joints) and at a full-sequence size, plus an end-to-end window_compare.
Run:  python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from strokecoach import _kernels
from strokecoach.align import window_compare
from strokecoach.skeleton import default_topology


def rand_quats(rng, *shape):
    q = rng.normal(size=shape + (4,))
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def bench(fn, *args, repeat=200):
    fn(*args)  # warm (and compile, for the jitted variants)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return float(np.median(times)) * 1e3


def main():
    if _kernels.diss_matrix_numba is None:
        raise SystemExit("numba unavailable; nothing to compare")
    rng = np.random.default_rng(0)
    sizes = {
        "window (10x10x11)": (rand_quats(rng, 10, 11), rand_quats(rng, 10, 11)),
        "full seq (120x120x11)": (rand_quats(rng, 120, 11), rand_quats(rng, 120, 11)),
    }
    print(f"{'kernel':<34} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for label, (q1, q2) in sizes.items():
        t_np = bench(_kernels.diss_matrix_numpy, q1, q2)
        t_nb = bench(_kernels.diss_matrix_numba, q1, q2)
        print(f"{'diss_matrix ' + label:<34} {t_np:>10.3f} {t_nb:>10.3f} {t_np / t_nb:>7.1f}x")
        diss = _kernels.diss_matrix_numpy(q1, q2)
        t_np = bench(_kernels.dtw_fill_numpy, diss)
        t_nb = bench(_kernels.dtw_fill_numba, diss)
        print(f"{'dtw_fill ' + label:<34} {t_np:>10.3f} {t_nb:>10.3f} {t_np / t_nb:>7.1f}x")

    z = rng.normal(size=(120, 44))
    t_np = bench(_kernels.kalman_smooth_numpy, z, 1e-3, 1e-2, 1.0)
    t_nb = bench(_kernels.kalman_smooth_numba, z, 1e-3, 1e-2, 1.0)
    print(f"{'kalman_smooth (120x44)':<34} {t_np:>10.3f} {t_nb:>10.3f} {t_np / t_nb:>7.1f}x")

    topo = default_topology()
    ua, ea = rand_quats(rng, 10, 11), rand_quats(rng, 10, 11)
    up, ep = rand_quats(rng, 10), rand_quats(rng, 10)
    t = bench(
        window_compare, ua, up, ea, ep, 0.1, 0.1, repeat=300
    )
    print(
        f"\nwindow_compare end to end ({_kernels.backend_name()} backend): "
        f"{t:.3f} ms median"
    )


if __name__ == "__main__":
    main()
