"""Down-closed polytopes ``{x >= 0 : Ax <= b, x <= u}`` with nonnegative data.

Provides membership, exact linear maximization (dense simplex), Euclidean
projection, the inner radius of the nonnegative ball inside the set, and the
shrunk delta-interior used for safe one-point probing.
"""

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .simplex import LPError, simplex_max

__all__ = [
    "DownClosedPolytope",
    "InteriorShrink",
    "LPError",
    "ProjectionError",
    "box",
]


class ProjectionError(RuntimeError):
    """Projection hit its iteration cap before the duality gap reached tol."""

    def __init__(self, message, gap, best):
        super().__init__(message)
        self.gap = gap
        self.best = best


def _vec(x, n, name="x"):
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"{name} has shape {x.shape}, expected ({n},)")
    return x


@dataclass(frozen=True, eq=False)
class DownClosedPolytope:
    A: np.ndarray
    b: np.ndarray
    u: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        u = np.array(self.u, dtype=float).ravel()
        n = u.size
        A = np.array(self.A, dtype=float).reshape(-1, n)
        b = np.array(self.b, dtype=float).ravel()
        if n == 0:
            raise ValueError("polytope dimension must be positive")
        if b.size != A.shape[0]:
            raise ValueError(f"A has {A.shape[0]} rows but b has {b.size} entries")
        if np.any(A < 0) or np.any(b < 0):
            raise ValueError("A and b must be entrywise nonnegative")
        if np.any(u <= 0) or np.any(u > 1):
            raise ValueError("upper bounds must lie in (0, 1]")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("A and b must be finite")
        for arr in (A, b, u):
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "n", n)

    @property
    def m(self):
        return self.A.shape[0]

    def zero(self):
        return np.zeros(self.n)

    def contains(self, x, tol=0.0):
        x = _vec(x, self.n)
        if np.any(x < -tol) or np.any(x > self.u + tol):
            return False
        if self.m and np.any(self.A @ x > self.b + tol):
            return False
        return True

    # -- linear maximization -------------------------------------------------

    @cached_property
    def _lp_data(self):
        G = np.vstack([self.A, np.eye(self.n)])
        h = np.concatenate([self.b, self.u])
        return G, h

    def linear_maximize(self, c):
        """Return a vertex maximizing ``<c, x>``; ``c = 0`` gives the origin."""
        c = _vec(c, self.n, "c")
        if not np.all(np.isfinite(c)):
            raise ValueError("objective must be finite")
        G, h = self._lp_data
        return simplex_max(c, G, h)

    # -- projection ------------------------------------------------------------

    @cached_property
    def _proj_data(self):
        # rows with b_i = 0 pin every coordinate they touch to zero
        pinned = np.zeros(self.n, dtype=bool)
        for i in np.flatnonzero(self.b == 0):
            pinned |= self.A[i] > 0
        u_eff = np.where(pinned, 0.0, self.u)
        A = np.where(pinned[None, :], 0.0, self.A)
        keep = (self.b > 0) & np.any(A > 0, axis=1)
        A, b = A[keep], self.b[keep]
        lip = float(np.linalg.norm(A, 2) ** 2) if A.size else 0.0
        return A, b, u_eff, lip

    def project(self, z, tol=1e-10, max_iter=20000):
        """Euclidean projection of ``z``.

        The returned point is feasible and its squared distance to ``z`` is
        within ``tol`` of the minimum, certified by a primal-dual gap.
        """
        if tol <= 0:
            raise ValueError("tol must be positive")
        z = _vec(z, self.n, "z")
        A, b, u, lip = self._proj_data
        x = np.clip(z, 0.0, u)
        if A.shape[0] == 0 or np.all(A @ x <= b):
            return x
        return _project_dual(z, A, b, u, lip, tol, max_iter)

    # -- geometry ------------------------------------------------------------

    def inner_radius(self):
        """Largest r with the nonnegative part of the r-ball inside the set."""
        r = float(self.u.min())
        norms = np.linalg.norm(self.A, axis=1)
        rows = norms > 0
        if rows.any():
            r = min(r, float(np.min(self.b[rows] / norms[rows])))
        return r

    def shrink_interior(self, delta):
        return InteriorShrink(self, delta)

    @cached_property
    def _radius_diameter(self):
        rng = np.random.default_rng(20240917)
        dirs = [np.ones(self.n)]
        dirs.extend(np.eye(self.n))
        dirs.extend(rng.uniform(0.0, 1.0, size=(32, self.n)))
        dirs.extend(rng.standard_normal(size=(32, self.n)))
        verts = [self.zero()] + [self.linear_maximize(d) for d in dirs]
        V = np.unique(np.round(np.array(verts), 12), axis=0)
        cap = float(np.linalg.norm(self.u))
        radius = min(float(np.linalg.norm(V, axis=1).max()), cap)
        gram = V @ V.T
        sq = np.diag(gram)[:, None] + np.diag(gram)[None, :] - 2 * gram
        diam = min(math.sqrt(max(float(sq.max()), 0.0)), cap)
        return radius, max(diam, radius)

    def radius_diameter_bounds(self):
        """``(r(C), diam(C))`` estimated from LP vertices, capped by ``||u||``."""
        return self._radius_diameter

    @property
    def diameter(self):
        return self._radius_diameter[1]

    # -- serialization -------------------------------------------------------

    def to_dict(self):
        return {
            "n": self.n,
            "A": self.A.tolist(),
            "b": self.b.tolist(),
            "u": self.u.tolist(),
        }

    def to_json(self):
        def fmt(v):
            if isinstance(v, list):
                return "[" + ", ".join(fmt(e) for e in v) + "]"
            return format(float(v), ".17g")

        d = self.to_dict()
        return (
            "{"
            f'"n": {d["n"]}, "A": {fmt(d["A"])}, '
            f'"b": {fmt(d["b"])}, "u": {fmt(d["u"])}'
            "}"
        )

    @classmethod
    def from_dict(cls, d):
        n = int(d["n"])
        A = np.asarray(d.get("A") or np.zeros((0, n)), dtype=float).reshape(-1, n)
        P = cls(A, d.get("b") or [], d["u"])
        if P.n != n:
            raise ValueError(f"declared n={n} but u has {P.n} entries")
        return P

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def box(u):
    """Box ``[0, u]`` without extra rows; a scalar-free shorthand for tests."""
    u = np.asarray(u, dtype=float)
    return DownClosedPolytope(np.zeros((0, u.size)), np.zeros(0), u)


def _project_dual(z, A, b, u, lip, tol, max_iter):
    """Accelerated projected ascent on the dual of the row constraints.

    For multipliers ``lam >= 0`` the box-constrained Lagrangian minimizer is
    ``clip(z - A^T lam, 0, u)``.  Any such ``lam`` gives a lower bound on the
    optimal value; scaling the minimizer toward the origin gives a feasible
    point (the set is down-closed), hence an upper bound.  A semismooth Newton
    polish on the current active rows usually closes the gap exactly.
    """
    m = A.shape[0]
    lam = np.zeros(m)
    y = lam.copy()
    t = 1.0
    best_primal, best_x = np.inf, None
    best_dual = -np.inf

    def certify(lam_c, x_c=None):
        nonlocal best_primal, best_x, best_dual
        xl = np.clip(z - A.T @ lam_c, 0.0, u)
        viol = A @ xl - b
        dual = 0.5 * float(np.sum((xl - z) ** 2)) + float(lam_c @ viol)
        best_dual = max(best_dual, dual)
        for cand in (xl, x_c):
            if cand is None:
                continue
            feas = _scale_to_feasible(cand, A, b)
            primal = 0.5 * float(np.sum((feas - z) ** 2))
            if primal < best_primal:
                best_primal, best_x = primal, feas
        return 2.0 * (best_primal - best_dual)

    # primal-dual active set, starting from rows violated by the box projection
    active = A @ np.clip(z, 0.0, u) > b
    lam_as = np.zeros(m)
    for _ in range(2 * m + 2):
        mu, x_newton = _newton_polish(z, A, b, u, np.where(active, 1e-12, 0.0), lam_as)
        if mu is None:
            break
        if certify(mu, x_newton) <= tol:
            return best_x
        lam_as = mu
        nxt = (active & (mu > 0)) | (A @ x_newton > b + 1e-12)
        if np.array_equal(nxt, active):
            break
        active = nxt

    prev_dual = -np.inf
    for it in range(1, max_iter + 1):
        x = np.clip(z - A.T @ y, 0.0, u)
        lam_new = np.maximum(y + (A @ x - b) / lip, 0.0)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = lam_new + ((t - 1.0) / t_new) * (lam_new - lam)
        lam, t = lam_new, t_new
        if it % 10 == 0:
            if certify(lam) <= tol:
                return best_x
            mu, x_newton = _newton_polish(z, A, b, u, lam)
            if mu is not None and certify(mu, x_newton) <= tol:
                return best_x
            # restart momentum when the dual stalls
            if best_dual <= prev_dual:
                y, t = lam.copy(), 1.0
            prev_dual = best_dual
    gap = 2.0 * (best_primal - best_dual)
    raise ProjectionError(
        f"projection did not reach tol={tol:g} in {max_iter} iterations "
        f"(gap {gap:.3g})",
        gap,
        best_x,
    )


def _scale_to_feasible(x, A, b):
    ax = A @ x
    over = ax > b
    if not over.any():
        return x
    return x * float(np.min(b[over] / ax[over]))


def _newton_polish(z, A, b, u, lam, start=None, steps=8):
    active = lam > 0
    if not active.any():
        return None, None
    Ar, br = A[active], b[active]
    mu = (lam if start is None else np.maximum(start, lam))[active].copy()
    for _ in range(steps):
        w = z - Ar.T @ mu
        x = np.clip(w, 0.0, u)
        resid = Ar @ x - br
        if np.max(np.abs(resid)) < 1e-14:
            break
        free = (w > 0) & (w < u)
        J = Ar[:, free] @ Ar[:, free].T
        try:
            step = np.linalg.solve(J, resid)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(J, resid, rcond=None)
        mu = mu + step
    full = np.zeros_like(lam)
    full[active] = np.maximum(mu, 0.0)
    x = np.clip(z - Ar.T @ mu, 0.0, u)
    return full, x


@dataclass(frozen=True, eq=False)
class InteriorShrink:
    """The set ``(1 - alpha) C + delta 1`` with ``alpha = (sqrt(n)+1) delta / r``.

    Every point keeps a delta-ball inside ``C``.  LP and projection are solved
    over ``C`` and pushed through the affine map.
    """

    base: DownClosedPolytope
    delta: float
    alpha: float = field(init=False)
    radius: float = field(init=False)

    def __post_init__(self):
        r = self.base.inner_radius()
        bound = r / (math.sqrt(self.base.n) + 1.0)
        if not 0.0 < self.delta < bound:
            raise ValueError(
                f"delta={self.delta!r} must satisfy 0 < delta < r/(sqrt(n)+1) = {bound!r}"
            )
        object.__setattr__(self, "radius", r)
        object.__setattr__(self, "alpha", (math.sqrt(self.base.n) + 1.0) * self.delta / r)

    @property
    def n(self):
        return self.base.n

    def to_shrunk(self, x):
        return (1.0 - self.alpha) * np.asarray(x, dtype=float) + self.delta

    def to_base(self, y):
        return (np.asarray(y, dtype=float) - self.delta) / (1.0 - self.alpha)

    def zero(self):
        return np.full(self.n, self.delta)

    def contains(self, y, tol=0.0):
        return self.base.contains(self.to_base(_vec(y, self.n)), tol / (1.0 - self.alpha))

    def linear_maximize(self, c):
        return self.to_shrunk(self.base.linear_maximize(c))

    def project(self, z, tol=1e-10, max_iter=20000):
        scale = (1.0 - self.alpha) ** 2
        x = self.base.project(self.to_base(_vec(z, self.n, "z")), tol / scale, max_iter)
        return self.to_shrunk(x)

    @property
    def diameter(self):
        return (1.0 - self.alpha) * self.base.diameter
