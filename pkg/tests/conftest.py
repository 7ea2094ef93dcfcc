import itertools

import numpy as np
import pytest

from online_mfw.polytope import DownClosedPolytope

_ACCEPTANCE_LINES = []


def enumerate_vertices(P):
    """All vertices of P by solving every n-subset of tight constraints (small n only)."""
    n = P.n
    G = np.vstack([P.A, np.eye(n), -np.eye(n)])
    h = np.concatenate([P.b, P.u, np.zeros(n)])
    verts = []
    for rows in itertools.combinations(range(G.shape[0]), n):
        M = G[list(rows)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, h[list(rows)])
        if np.all(G @ x <= h + 1e-9):
            verts.append(x)
    return np.unique(np.round(np.array(verts), 10), axis=0)


def random_feasible(P, rng, size):
    """Points of P: uniform in the box, scaled toward 0 until the rows hold."""
    X = rng.uniform(size=(size, P.n)) * P.u
    if P.m:
        load = X @ P.A.T
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(load > 0, P.b / load, np.inf).min(axis=1)
        X *= np.minimum(1.0, s)[:, None] * rng.uniform(0.5, 1.0, size=(size, 1))
    return X


def random_polytope(rng, n, m, zero_rows=False):
    A = rng.uniform(0.0, 1.0, size=(m, n))
    if zero_rows:
        A *= rng.uniform(size=(m, n)) < 0.6
    b = rng.uniform(0.3, 1.5, size=m)
    u = rng.uniform(0.3, 1.0, size=n)
    return DownClosedPolytope(A, b, u)


@pytest.fixture
def simplex_face():
    return DownClosedPolytope([[1.0, 1.0]], [1.0], [1.0, 1.0])


@pytest.fixture
def acceptance_log():
    """Collects one PASS/FAIL line per acceptance criterion for the summary."""

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
