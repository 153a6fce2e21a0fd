"""Shared test utilities: the exhaustive DTW oracle, random quaternion
generators, and an in-process service runner."""

from __future__ import annotations

import socket
import threading
from contextlib import contextmanager

import numpy as np

_PATH_CACHE: dict[tuple[int, int], np.ndarray] = {}


def monotone_path_matrix(n: int, m: int) -> np.ndarray:
    """All monotone warping paths through an n x m grid, as a padded matrix
    of flat cell indices (pad value n*m points at an appended zero cost).

    Enumerated by explicit depth-first walk, independent of any dynamic
    program, so it can serve as an oracle for one.
    """
    key = (n, m)
    if key in _PATH_CACHE:
        return _PATH_CACHE[key]
    paths: list[list[int]] = []
    acc: list[int] = []

    def walk(i: int, j: int) -> None:
        acc.append(i * m + j)
        if i == n - 1 and j == m - 1:
            paths.append(acc.copy())
        else:
            if i + 1 < n and j + 1 < m:
                walk(i + 1, j + 1)
            if i + 1 < n:
                walk(i + 1, j)
            if j + 1 < m:
                walk(i, j + 1)
        acc.pop()

    walk(0, 0)
    longest = max(len(p) for p in paths)
    mat = np.full((len(paths), longest), n * m, dtype=np.int64)
    for r, p in enumerate(paths):
        mat[r, : len(p)] = p
    _PATH_CACHE[key] = mat
    return mat


def brute_force_dtw(local_cost: np.ndarray) -> float:
    """Minimum path sum over every monotone warping path, by enumeration."""
    n, m = local_cost.shape
    mat = monotone_path_matrix(n, m)
    flat = np.append(local_cost.ravel(), 0.0)
    return float(flat[mat].sum(axis=1).min())


def random_unit_quats(rng: np.random.Generator, *shape: int) -> np.ndarray:
    q = rng.normal(size=shape + (4,))
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@contextmanager
def run_service(library_dir, window=10, xi_joint=0.1, xi_paddle=0.1):
    """Run the real service on a loopback port in a background thread."""
    import uvicorn

    from strokecoach.recording import StrokeLibrary
    from strokecoach.service import ServiceConfig, build_app

    port = free_port()
    library = StrokeLibrary(library_dir)
    app = build_app(
        library,
        ServiceConfig(
            port=port, window=window, xi_joint=xi_joint, xi_paddle=xi_paddle
        ),
    )
    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    import time

    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("service did not start")
        time.sleep(0.02)
    try:
        yield f"http://127.0.0.1:{port}"
    finally:
        server.should_exit = True
        thread.join(timeout=5)
