"""Counting gradient/value oracles and the one-point gradient estimator."""

import numpy as np

CUBE_TOL = 1e-9


class OracleDomainError(ValueError):
    """A query point left the unit cube."""


def _in_cube(x, tol=CUBE_TOL):
    return bool(np.all(x >= -tol) and np.all(x <= 1.0 + tol))


class StochasticGradientOracle:
    """Exact gradient plus i.i.d. Gaussian noise of scale ``sigma`` per coordinate."""

    def __init__(self, objective, sigma=0.1, rng=None):
        if sigma < 0:
            raise ValueError("sigma must be nonnegative")
        self.objective = objective
        self.sigma = float(sigma)
        self.rng = rng if rng is not None else np.random.default_rng()
        self.call_count = 0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if not _in_cube(x):
            raise OracleDomainError("gradient query outside [0,1]^n")
        self.call_count += 1
        g = self.objective.grad(x)
        if self.sigma > 0:
            g = g + self.sigma * self.rng.standard_normal(g.shape)
        return g


def noisy_grad(oracle, x):
    return oracle(x)


class ValueOracle:
    """Returns exact rewards and counts every queried point."""

    def __init__(self, objective):
        self.objective = objective
        self.call_count = 0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if not _in_cube(x):
            raise OracleDomainError("value query outside [0,1]^n")
        self.call_count += 1
        return float(self.objective.value(x))

    def batch(self, X):
        X = np.asarray(X, dtype=float)
        if not _in_cube(X):
            raise OracleDomainError("value query outside [0,1]^n")
        self.call_count += X.shape[0]
        return self.objective.value(X)


def sample_sphere(n, rng, size=None):
    """Uniform draw(s) from the unit sphere in R^n by normalizing Gaussians."""
    if n < 1:
        raise ValueError("sphere dimension must be at least 1")
    shape = (n,) if size is None else (size, n)
    while True:
        g = rng.standard_normal(shape)
        norms = np.linalg.norm(g, axis=-1, keepdims=True)
        if np.all(norms > 0):
            return g / norms


def sample_ball(n, rng, size):
    """Uniform draws from the unit ball: sphere direction times U^(1/n)."""
    v = sample_sphere(n, rng, size)
    return v * rng.uniform(size=(size, 1)) ** (1.0 / n)


def one_point_estimate(oracle, x, delta, u):
    """``(n/delta) f(x + delta u) u``; one value query."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    probe = x + delta * u
    if not _in_cube(probe):
        raise OracleDomainError("probe point x + delta*u leaves [0,1]^n")
    return (x.size / delta) * oracle(probe) * u


def one_point_batch(oracle, x, delta, U):
    """Vectorized estimator over the rows of ``U``; one query per row."""
    x = np.asarray(x, dtype=float)
    U = np.asarray(U, dtype=float)
    vals = oracle.batch(x[None, :] + delta * U)
    return (x.size / delta) * vals[:, None] * U
