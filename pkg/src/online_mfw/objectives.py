"""Reward families for the experiments: DR-submodular quadratics and the
social-network revenue model, plus SNAP-style edge-list loading.

``value`` and ``grad`` accept a single point of shape ``(n,)`` or a batch of
shape ``(N, n)``.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .polytope import DownClosedPolytope

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class QuadraticObjective:
    """``f(x) = 0.5 x^T H x + h^T x + c`` with symmetric, entrywise nonpositive H."""

    H: np.ndarray
    h: np.ndarray
    c: float

    def __post_init__(self):
        H = np.array(self.H, dtype=float)
        h = np.array(self.h, dtype=float).ravel()
        if H.shape != (h.size, h.size):
            raise ValueError("H must be n x n with n = len(h)")
        if not np.allclose(H, H.T, rtol=0, atol=1e-12):
            raise ValueError("H must be symmetric")
        if np.any(H > 0):
            raise ValueError("H must be entrywise nonpositive (DR-submodular)")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "c", float(self.c))

    @property
    def n(self):
        return self.h.size

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * np.einsum("...i,ij,...j->...", x, self.H, x) + x @ self.h + self.c

    def grad(self, x):
        return np.asarray(x, dtype=float) @ self.H + self.h

    def smoothness(self):
        return float(np.linalg.norm(self.H, 2))

    def lipschitz(self, points=None):
        """Largest gradient norm over the cube corners, or over ``points`` if given."""
        if points is None:
            # ||Hx + h|| is convex in x, so its max over [0,1]^n sits at a corner;
            # enumerate corners for small n, otherwise sample them.
            n = self.n
            if n <= 12:
                points = ((np.arange(2**n)[:, None] >> np.arange(n)) & 1).astype(float)
            else:
                rng = np.random.default_rng(0)
                points = rng.integers(0, 2, size=(4096, n)).astype(float)
        return float(np.linalg.norm(self.grad(points), axis=-1).max())

    def __add__(self, other):
        return QuadraticObjective(self.H + other.H, self.h + other.h, self.c + other.c)

    def to_dict(self):
        return {"H": self.H.tolist(), "h": self.h.tolist(), "c": self.c}

    @classmethod
    def from_dict(cls, d):
        return cls(d["H"], d["h"], d["c"])


@dataclass(frozen=True, eq=False)
class RevenueObjective:
    """Expected revenue ``sum_i sum_{j != i} w_ij (1 - s_i) s_j``, ``s_k = (1-p)^(x_k B)``."""

    W: np.ndarray
    p: float = 0.002
    B: float = 5.0
    log_keep: float = field(init=False)

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError("W must be square")
        if np.any(W < 0) or not np.allclose(W, W.T) or np.any(np.diag(W) != 0):
            raise ValueError("W must be nonnegative, symmetric, zero on the diagonal")
        if not 0 < self.p < 1:
            raise ValueError("p must lie in (0, 1)")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "log_keep", self.B * math.log1p(-self.p))

    @property
    def n(self):
        return self.W.shape[0]

    def _stay(self, x):
        return np.exp(self.log_keep * np.asarray(x, dtype=float))

    def value(self, x):
        s = self._stay(x)
        return np.einsum("...i,ij,...j->...", 1.0 - s, self.W, s)

    def grad(self, x):
        # d/dx_k: log_keep * s_k * sum_j w_kj (a_j - s_j), with a = 1 - s
        s = self._stay(x)
        return self.log_keep * s * ((1.0 - 2.0 * s) @ self.W)

    def smoothness(self):
        return self.log_keep**2 * float(self.W.sum())

    def __add__(self, other):
        if (self.p, self.B) != (other.p, other.B):
            raise ValueError("can only add revenue objectives with equal p and B")
        return RevenueObjective(self.W + other.W, self.p, self.B)

    def to_dict(self):
        return {"W": self.W.tolist(), "p": self.p, "B": self.B}

    @classmethod
    def from_dict(cls, d):
        return cls(d["W"], d["p"], d["B"])


def objective_from_dict(d):
    if "H" in d:
        return QuadraticObjective.from_dict(d)
    return RevenueObjective.from_dict(d)


def sum_objectives(objs):
    it = iter(objs)
    total = next(it)
    for f in it:
        total = total + f
    return total


# -- quadratic programming instances ---------------------------------------


def gen_quadratic_objective(n, rng):
    M = rng.uniform(-10.0, 0.0, size=(n, n))
    H = 0.5 * (M + M.T)
    u = np.ones(n)
    h = -0.1 * H.T @ u
    c = -0.5 * H.sum()
    return QuadraticObjective(H, h, c)


def gen_constraints(n, m, rng):
    A = rng.uniform(0.0, 1.0, size=(m, n))
    return DownClosedPolytope(A, np.ones(m), np.ones(n))


def gen_quadratic(n, m, rng, check_samples=1000, max_tries=10):
    """Random quadratic objective and polytope with ``b = u = 1``."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    P = gen_constraints(n, m, rng)
    for _ in range(max_tries):
        f = gen_quadratic_objective(n, rng)
        X = rng.uniform(size=(check_samples, n))
        if np.all(f.value(X) >= 0):
            return f, P
        log.warning("generated quadratic negative on a sample point; regenerating")
    raise RuntimeError("could not generate a nonnegative quadratic")


# -- revenue maximization ----------------------------------------------------


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: tuple  # sorted (i, j) pairs with i < j

    @property
    def adjacency(self):
        adj = np.zeros((self.n_vertices, self.n_vertices), dtype=bool)
        if self.edges:
            e = np.array(self.edges)
            adj[e[:, 0], e[:, 1]] = True
            adj[e[:, 1], e[:, 0]] = True
        return adj


def load_graph(path):
    """Parse a whitespace-delimited edge list; ``#`` lines are comments.

    Vertex ids are relabeled densely to ``0..n-1`` in order of first appearance.
    Self-loops are dropped and duplicate undirected edges merged.
    """
    labels = {}
    edges = set()
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) < 2:
                raise ValueError(f"{path}:{lineno}: expected 'u v', got {s!r}")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: vertex ids must be integers: {s!r}") from None
            i = labels.setdefault(a, len(labels))
            j = labels.setdefault(b, len(labels))
            if i != j:
                edges.add((min(i, j), max(i, j)))
    return Graph(len(labels), tuple(sorted(edges)))


def sample_round_objective(graph, rng, k=20, weight=100.0, p=0.002, B=5.0):
    """Revenue objective on ``k`` uniformly chosen vertices' induced edges."""
    if graph.n_vertices < k:
        raise ValueError(f"graph has {graph.n_vertices} vertices, need at least {k}")
    chosen = rng.choice(graph.n_vertices, size=k, replace=False)
    mask = np.zeros(graph.n_vertices, dtype=bool)
    mask[chosen] = True
    W = np.where(graph.adjacency & mask[:, None] & mask[None, :], weight, 0.0)
    return RevenueObjective(W, p, B)


def gen_revenue_constraints(n, m, rng):
    """Random ``A`` (m rows, entries U[0,1]), ``b = 1``, plus the row ``sum x <= 1``."""
    A = np.vstack([rng.uniform(0.0, 1.0, size=(m, n)), np.ones((1, n))])
    return DownClosedPolytope(A, np.ones(m + 1), np.ones(n))
