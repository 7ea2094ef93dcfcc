import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import linprog

from online_mfw.oracles import sample_sphere
from online_mfw.polytope import DownClosedPolytope, ProjectionError, box
from online_mfw.simplex import LPError, simplex_max

from conftest import enumerate_vertices, random_feasible, random_polytope


# -- construction -----------------------------------------------------------


@pytest.mark.parametrize(
    "A, b, u",
    [
        ([[-1.0, 0.0]], [1.0], [1.0, 1.0]),
        ([[1.0, 0.0]], [-0.1], [1.0, 1.0]),
        ([[1.0, 0.0]], [1.0], [0.0, 1.0]),
        ([[1.0, 0.0]], [1.0], [1.5, 1.0]),
        ([[1.0, 0.0]], [1.0, 2.0], [1.0, 1.0]),
        ([[np.inf, 0.0]], [1.0], [1.0, 1.0]),
    ],
)
def test_rejects_invalid_data(A, b, u):
    with pytest.raises(ValueError):
        DownClosedPolytope(A, b, u)


def test_data_is_read_only(simplex_face):
    with pytest.raises(ValueError):
        simplex_face.A[0, 0] = 5.0


# -- contains ---------------------------------------------------------------


def test_contains_examples(simplex_face):
    assert box([1.0, 1.0]).contains(np.zeros(2), 0.0)
    assert not box([1.0, 1.0]).contains([1.001, 0.0], 1e-9)
    assert not simplex_face.contains([0.6, 0.6], 0.0)
    assert simplex_face.contains([0.5, 0.5], 0.0)
    assert simplex_face.contains([0.5 + 5e-10, 0.5], 1e-9)
    assert not simplex_face.contains([-1e-3, 0.0], 1e-9)


def test_contains_dimension_mismatch(simplex_face):
    with pytest.raises(ValueError):
        simplex_face.contains(np.zeros(3))


def test_down_closed_random_trials():
    rng = np.random.default_rng(1)
    P = random_polytope(rng, 6, 4)
    X = random_feasible(P, rng, 10_000)
    Y = X * rng.uniform(size=X.shape)
    assert all(P.contains(x) for x in X)
    assert all(P.contains(y) for y in Y)


# -- linear maximization ------------------------------------------------------


def test_linear_maximize_examples(simplex_face):
    sq = box([1.0, 1.0])
    np.testing.assert_array_equal(sq.linear_maximize([1.0, -1.0]), [1.0, 0.0])
    np.testing.assert_array_equal(sq.linear_maximize([0.0, 0.0]), [0.0, 0.0])
    v = simplex_face.linear_maximize([1.0, 1.0])
    # vertices of the face polytope are (0,0), (1,0), (0,1)
    verts = enumerate_vertices(simplex_face)
    assert len(verts) == 3
    assert v.sum() == pytest.approx(1.0, abs=1e-9)
    assert any(np.allclose(v, w) for w in verts)


def test_negative_costs_push_to_zero():
    P = DownClosedPolytope([[1.0, 2.0, 1.0]], [2.0], [1.0, 1.0, 1.0])
    v = P.linear_maximize([-1.0, 3.0, -0.5])
    assert v[0] == 0.0 and v[2] == 0.0
    assert v[1] == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(20))
def test_linear_maximize_matches_vertex_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    P = random_polytope(rng, n, int(rng.integers(1, 4)), zero_rows=seed % 2 == 1)
    verts = enumerate_vertices(P)
    for _ in range(10):
        c = rng.normal(size=n)
        v = P.linear_maximize(c)
        assert P.contains(v, 1e-9)
        assert c @ v == pytest.approx(np.max(verts @ c), abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_linear_maximize_matches_linprog(seed):
    rng = np.random.default_rng(100 + seed)
    P = random_polytope(rng, 25, 15)
    for _ in range(5):
        c = rng.normal(size=25)
        res = linprog(-c, A_ub=P.A, b_ub=P.b, bounds=list(zip(np.zeros(25), P.u)), method="highs")
        v = P.linear_maximize(c)
        assert c @ v == pytest.approx(-res.fun, abs=1e-9)


def test_linear_maximize_beats_random_feasible_points():
    rng = np.random.default_rng(7)
    P = random_polytope(rng, 8, 5)
    X = random_feasible(P, rng, 1000)
    for _ in range(20):
        c = rng.normal(size=8)
        v = P.linear_maximize(c)
        assert P.contains(v, 1e-9)
        assert c @ v >= np.max(X @ c) - 1e-12


def test_linear_maximize_is_deterministic():
    rng = np.random.default_rng(3)
    P = random_polytope(rng, 10, 6)
    c = rng.normal(size=10)
    np.testing.assert_array_equal(P.linear_maximize(c), P.linear_maximize(c))


def test_linear_maximize_rejects_nonfinite(simplex_face):
    with pytest.raises(ValueError):
        simplex_face.linear_maximize([np.nan, 1.0])


def test_simplex_iteration_cap_carries_incumbent():
    rng = np.random.default_rng(0)
    G = rng.uniform(size=(8, 6))
    with pytest.raises(LPError) as exc:
        simplex_max(np.ones(6), G, np.ones(8), max_iter=1)
    assert exc.value.incumbent.shape == (6,)


# -- projection ---------------------------------------------------------------


def test_projection_examples(simplex_face):
    sq = box([1.0, 1.0])
    np.testing.assert_array_equal(sq.project([2.0, 0.5]), [1.0, 0.5])
    z = np.array([0.3, 0.2])
    np.testing.assert_array_equal(simplex_face.project(z), z)


def test_projection_onto_face_matches_grid_search(simplex_face):
    g = np.arange(0.0, 1.0 + 1e-12, 1e-3)
    X, Y = np.meshgrid(g, g, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    pts = pts[pts.sum(axis=1) <= 1.0 + 1e-12]
    best = pts[np.argmin(((pts - 1.0) ** 2).sum(axis=1))]
    np.testing.assert_allclose(best, [0.5, 0.5], atol=1e-4)
    np.testing.assert_allclose(simplex_face.project([1.0, 1.0]), best, atol=1e-4)


def _cvxpy_projection(P, z):
    cp = pytest.importorskip("cvxpy")
    x = cp.Variable(P.n)
    cons = [x >= 0, x <= P.u]
    if P.m:
        cons.append(P.A @ x <= P.b)
    cp.Problem(cp.Minimize(cp.sum_squares(x - z)), cons).solve(solver=cp.CLARABEL)
    return np.asarray(x.value)


@pytest.mark.parametrize("seed", range(10))
def test_projection_matches_qp_solver(seed):
    rng = np.random.default_rng(seed)
    n, m = (25, 15) if seed < 5 else (int(rng.integers(2, 8)), int(rng.integers(1, 6)))
    P = random_polytope(rng, n, m, zero_rows=seed % 3 == 0)
    tol = 1e-10
    for _ in range(3):
        z = rng.normal(0.5, 1.0, size=n)
        x = P.project(z, tol)
        ref = _cvxpy_projection(P, z)
        assert P.contains(x, 1e-12)
        d_ours = np.sum((x - z) ** 2)
        d_ref = np.sum((ref - z) ** 2)
        assert d_ours <= d_ref + tol + 1e-7
        np.testing.assert_allclose(x, ref, atol=1e-4)


def test_projection_with_zero_capacity_row():
    P = DownClosedPolytope([[1.0, 0.0, 0.0], [0.5, 1.0, 1.0]], [0.0, 1.0], [1.0, 1.0, 1.0])
    x = P.project([2.0, 2.0, 0.0])
    np.testing.assert_allclose(x, [0.0, 1.0, 0.0], atol=1e-6)


def test_projection_requires_positive_tol(simplex_face):
    with pytest.raises(ValueError):
        simplex_face.project([1.0, 1.0], tol=0.0)


def test_projection_iteration_cap_reports_gap():
    rng = np.random.default_rng(11)
    P = random_polytope(rng, 30, 20)
    with pytest.raises(ProjectionError) as exc:
        P.project(rng.normal(2.0, 1.0, size=30), tol=1e-14, max_iter=1)
    assert exc.value.gap > 0
    assert P.contains(exc.value.best, 1e-12)


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(0, 2**16),
    z=arrays(np.float64, 5, elements=st.floats(-3.0, 3.0, allow_nan=False)),
)
def test_projection_idempotent(seed, z):
    P = random_polytope(np.random.default_rng(seed), 5, 3)
    tol = 1e-10
    x = P.project(z, tol)
    assert P.contains(x, 1e-12)
    x2 = P.project(x, tol)
    assert np.sum((x2 - x) ** 2) <= 2 * tol


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**16))
def test_projection_of_feasible_point_is_identity(seed):
    rng = np.random.default_rng(seed)
    P = random_polytope(rng, 4, 3)
    x = random_feasible(P, rng, 1)[0]
    np.testing.assert_allclose(P.project(x), x, atol=1e-9)


# -- geometry -----------------------------------------------------------------


def test_inner_radius_examples(simplex_face):
    assert box([1.0, 1.0]).inner_radius() == 1.0
    assert simplex_face.inner_radius() == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert box([0.5, 1.0]).inner_radius() == 0.5


def test_inner_radius_skips_zero_rows():
    P = DownClosedPolytope([[0.0, 0.0], [3.0, 4.0]], [0.0, 1.0], [1.0, 1.0])
    assert P.inner_radius() == pytest.approx(0.2)


def test_nonnegative_inner_ball_is_feasible():
    rng = np.random.default_rng(5)
    P = random_polytope(rng, 6, 5)
    r = P.inner_radius()
    V = np.abs(sample_sphere(6, rng, size=10_000))
    X = V * r * rng.uniform(size=(10_000, 1)) ** (1 / 6)
    assert all(P.contains(x, 1e-12) for x in X)
    # the boundary ray of the tightest constraint is reached exactly
    assert all(P.contains(r * v, 1e-12) for v in V[:1000])


def test_shrink_interior_examples():
    sq = box([1.0, 1.0])
    S = sq.shrink_interior(0.1)
    assert S.alpha == pytest.approx(0.1 * (math.sqrt(2) + 1), abs=1e-12)
    assert S.alpha == pytest.approx(0.24142, abs=1e-5)
    np.testing.assert_allclose(S.to_shrunk([1.0, 1.0]), [0.85858, 0.85858], atol=1e-5)
    np.testing.assert_allclose(S.zero(), [0.1, 0.1])
    rng = np.random.default_rng(0)
    probes = S.zero() + 0.1 * sample_sphere(2, rng, size=10_000)
    assert all(sq.contains(p, 1e-12) for p in probes)


def test_shrink_interior_rejects_boundary(simplex_face):
    r = simplex_face.inner_radius()
    with pytest.raises(ValueError, match="sqrt"):
        simplex_face.shrink_interior(r / (math.sqrt(2) + 1))
    with pytest.raises(ValueError):
        simplex_face.shrink_interior(0.0)


def test_shrunk_points_keep_delta_ball_inside():
    rng = np.random.default_rng(9)
    P = random_polytope(rng, 5, 4)
    delta = 0.9 * P.inner_radius() / (math.sqrt(5) + 1)
    S = P.shrink_interior(delta)
    X = S.to_shrunk(random_feasible(P, rng, 10_000))
    probes = X + delta * sample_sphere(5, rng, size=10_000)
    assert all(S.contains(x, 1e-12) for x in X[:100])
    assert all(P.contains(p, 1e-9) for p in probes)


def test_shrunk_lp_and_projection_go_through_the_map():
    rng = np.random.default_rng(2)
    P = random_polytope(rng, 4, 3)
    S = P.shrink_interior(0.05)
    c = rng.normal(size=4)
    np.testing.assert_allclose(S.linear_maximize(c), S.to_shrunk(P.linear_maximize(c)))
    z = rng.normal(size=4)
    y = S.project(z)
    assert S.contains(y, 1e-9)
    # optimality over the image: no vertex direction improves the distance
    for v in enumerate_vertices(P):
        w = S.to_shrunk(v)
        assert (z - y) @ (w - y) <= 1e-6


def test_radius_diameter_examples(simplex_face):
    r, d = box([1.0, 1.0]).radius_diameter_bounds()
    assert r == pytest.approx(math.sqrt(2)) and d == pytest.approx(math.sqrt(2))
    r, _ = simplex_face.radius_diameter_bounds()
    assert r == pytest.approx(np.linalg.norm(enumerate_vertices(simplex_face), axis=1).max())
    assert r == pytest.approx(1.0)
    r, _ = box(0.5 * np.ones(4)).radius_diameter_bounds()
    assert r == pytest.approx(1.0)


def test_radius_bounded_by_vertex_enumeration():
    rng = np.random.default_rng(4)
    for _ in range(5):
        P = random_polytope(rng, 3, 2)
        V = enumerate_vertices(P)
        r, d = P.radius_diameter_bounds()
        assert r <= np.linalg.norm(V, axis=1).max() + 1e-9
        assert d <= np.linalg.norm(V[:, None] - V[None], axis=-1).max() + 1e-9
        assert d <= np.linalg.norm(P.u) + 1e-12


# -- serialization ------------------------------------------------------------


def test_json_round_trip_is_exact():
    rng = np.random.default_rng(6)
    P = random_polytope(rng, 7, 3)
    text = P.to_json()
    Q = DownClosedPolytope.from_json(text)
    np.testing.assert_array_equal(Q.A, P.A)
    np.testing.assert_array_equal(Q.b, P.b)
    np.testing.assert_array_equal(Q.u, P.u)
    d = json.loads(text)
    assert set(d) == {"n", "A", "b", "u"} and d["n"] == 7


def test_json_box_without_rows():
    P = DownClosedPolytope.from_json(box([1.0, 0.5]).to_json())
    assert P.m == 0 and P.n == 2


def test_json_declared_dimension_checked():
    with pytest.raises(ValueError):
        DownClosedPolytope.from_dict({"n": 3, "A": [], "b": [], "u": [1.0, 1.0]})
