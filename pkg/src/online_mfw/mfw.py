"""Measured Frank-Wolfe online algorithms.

Three variants share the measured update ``x <- x + v * (1 - x) / K`` driven
by a bank of online linear oracles:

* :class:`MetaMFW` -- full information, K stochastic gradients per round.
* :class:`MonoMFW` -- one-shot: blocks of K rounds, one gradient per reward.
* :class:`BanditMFW` -- bandit feedback: blocks of L rounds, K of them spent
  exploring around the iterates with one-point gradient estimates.

:func:`offline_measured_greedy` is the single-round, exact-gradient special
case and serves as the offline reference solver.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _rng
from .online_linear import OracleBank
from .oracles import one_point_estimate, sample_sphere

log = logging.getLogger(__name__)

VARIANTS = ("meta32", "meta34", "mono", "bandit")
FEAS_TOL = 1e-9


class ScheduleError(ValueError):
    pass


class ProbeInfeasibleError(RuntimeError):
    """An exploration point left the feasible set; indicates a schedule bug."""


def measured_step(x, v, K):
    if K == 0:
        raise ValueError("K must be positive")
    return x + v * (1.0 - x) / K


def eta_meta(k):
    if k < 1:
        raise ValueError("step index starts at 1")
    return 2.0 / (k + 3) ** (2.0 / 3.0)


def eta_mono(k, K):
    if K % 2:
        raise ValueError(f"two-phase schedule needs even K, got {K}")
    if not 1 <= k <= K:
        raise ValueError(f"k={k} outside [1, {K}]")
    if k <= K // 2 + 1:
        return 2.0 / (k + 3) ** (2.0 / 3.0)
    return 1.5 / (K - k + 2) ** (2.0 / 3.0)


# -- schedules ---------------------------------------------------------------


@dataclass(frozen=True)
class Schedule:
    variant: str
    T: int
    K: int
    Q: int = 1
    L: int = 1
    delta: Optional[float] = None
    requested_T: Optional[int] = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ScheduleError(f"unknown variant {self.variant!r}")
        if self.T < 1 or self.K < 1:
            raise ScheduleError("T and K must be positive")
        if self.variant == "mono":
            if self.K % 2 or self.K * self.Q != self.T:
                raise ScheduleError("mono needs even K with K*Q == T")
        if self.variant == "bandit":
            if self.L * self.Q != self.T:
                raise ScheduleError("bandit needs L*Q == T")
            if 2 * self.K > self.L:
                raise ScheduleError(f"bandit needs K <= L/2 (K={self.K}, L={self.L})")
            if self.delta is None or self.delta <= 0:
                raise ScheduleError("bandit needs a positive probe radius delta")
        if self.requested_T is None:
            object.__setattr__(self, "requested_T", self.T)

    @property
    def oracle_horizon(self):
        """Number of payoff vectors each linear oracle will receive."""
        return self.T if self.variant.startswith("meta") else self.Q

    def to_dict(self):
        return {
            "variant": self.variant,
            "T": self.T,
            "requested_T": self.requested_T,
            "K": self.K,
            "Q": self.Q,
            "L": self.L,
            "delta": self.delta,
        }


def _ceil_power(T, e):
    v = T**e
    r = round(v)
    return int(r) if abs(v - r) <= 1e-9 * max(1.0, v) else math.ceil(v)


def _even_near(x, T):
    r = round(x)
    if abs(x - r) <= 1e-9 * max(1.0, x) and r % 2 == 0:
        cands = [int(r)]
    else:
        lo = 2 * math.floor(x / 2)
        cands = [lo, lo + 2]
    valid = [k for k in cands if 2 <= k <= T]
    if not valid:
        raise ScheduleError(f"T={T} too small for the one-shot schedule; nearest valid T is 2")
    divisors = [k for k in valid if T % k == 0]
    if len(divisors) == 1:
        return divisors[0]
    return min(valid, key=lambda k: (abs(k - x), k))


def make_schedule(T, variant, polytope=None, allow_meta32=False):
    """Parameter schedule for ``variant`` at horizon ``T``.

    Blocked variants truncate the horizon to a multiple of the block length;
    the played horizon is ``schedule.T`` and the request is kept in
    ``requested_T``.
    """
    T = int(T)
    if T < 1:
        raise ScheduleError("T must be at least 1")
    if variant == "meta32":
        if not allow_meta32:
            raise ScheduleError("meta32 uses K = T^(3/2) oracles per round; pass allow_meta32=True")
        K = _ceil_power(T, 1.5)
        warnings.warn(f"meta32 at T={T} makes {K} gradient calls per round", RuntimeWarning)
        return Schedule("meta32", T, K)
    if variant == "meta34":
        return Schedule("meta34", T, _ceil_power(T, 0.75))
    if variant == "mono":
        K = _even_near(T**0.6, T)
        Q = T // K
        if Q * K != T:
            log.info("mono: truncating horizon %d -> %d (K=%d, Q=%d)", T, Q * K, K, Q)
        return Schedule("mono", Q * K, K, Q=Q, requested_T=T)
    if variant == "bandit":
        if polytope is None:
            raise ScheduleError("bandit schedule needs the polytope (for its inner radius)")
        Q = max(1, round(T ** (2.0 / 9.0)))
        L = T // Q
        K = min(_ceil_power(T, 2.0 / 3.0), L // 2)
        if K < 1:
            raise ScheduleError(f"T={T} too small for the bandit schedule; nearest valid T is 2")
        n = polytope.n
        r = polytope.inner_radius()
        bound = r / (math.sqrt(n) + 1.0)
        delta = r / ((math.sqrt(n) + 2.0) * T ** (1.0 / 9.0))
        if delta >= bound:
            log.info("bandit: delta %.4g violates interior bound %.4g; clamping", delta, bound)
            delta = 0.99 * bound
        if L * Q != T:
            log.info("bandit: truncating horizon %d -> %d (L=%d, Q=%d)", T, L * Q, L, Q)
        return Schedule("bandit", L * Q, K, Q=Q, L=L, delta=delta, requested_T=T)
    raise ScheduleError(f"unknown variant {variant!r}; choose from {', '.join(VARIANTS)}")


# -- algorithms --------------------------------------------------------------


class MetaMFW:
    """Full-information Meta-MFW.  Call :meth:`round` once per reward function."""

    def __init__(self, polytope, schedule, seed=0):
        self.polytope = polytope
        self.schedule = schedule
        self.K = schedule.K
        self.bank = OracleBank(polytope, self.K, schedule.oracle_horizon)
        self.t = 0
        self.iterates = None
        self.momentum = None

    def _build_iterates(self):
        X = np.zeros((self.K + 1, self.polytope.n))
        for k in range(1, self.K + 1):
            X[k] = measured_step(X[k - 1], self.bank.get_action(k - 1), self.K)
        return X

    def round(self, grad_oracle):
        """Play ``y_t``, then spend K gradient queries to update the oracles."""
        if self.t >= self.schedule.T:
            raise RuntimeError("horizon exhausted")
        X = self._build_iterates()
        y = X[-1].copy()
        G = np.zeros((self.K, self.polytope.n))
        g = np.zeros(self.polytope.n)
        for k in range(1, self.K + 1):
            eta = eta_meta(k)
            g = (1.0 - eta) * g + eta * grad_oracle(X[k])
            G[k - 1] = g
            self.bank.feed(k - 1, g * (1.0 - X[k]))
        self.iterates, self.momentum = X, G
        self.t += 1
        return y


class MonoMFW:
    """One-shot Mono-MFW.  Call :meth:`block` with the K oracles of a block."""

    def __init__(self, polytope, schedule, seed=0):
        self.polytope = polytope
        self.schedule = schedule
        self.K = schedule.K
        self.seed = seed
        self.bank = OracleBank(polytope, self.K, schedule.oracle_horizon)
        self.q = 0
        self.iterates = None
        self.momentum = None
        self.permutation = None

    def block(self, grad_oracles):
        if self.q >= self.schedule.Q:
            raise RuntimeError("all blocks played")
        if len(grad_oracles) != self.K:
            raise ValueError(f"block needs exactly K={self.K} reward functions")
        K, n = self.K, self.polytope.n
        X = np.zeros((K + 1, n))
        for k in range(1, K + 1):
            X[k] = measured_step(X[k - 1], self.bank.get_action(k - 1), K)
        y = X[-1].copy()
        perm = _rng.substream(self.seed, _rng.PERMUTATION, self.q).permutation(K)
        G = np.zeros((K, n))
        g = np.zeros(n)
        for k in range(1, K + 1):
            eta = eta_mono(k, K)
            g = (1.0 - eta) * g + eta * grad_oracles[perm[k - 1]](X[k])
            G[k - 1] = g
            self.bank.feed(k - 1, (1.0 - X[k]) * g)
        self.iterates, self.momentum, self.permutation = X, G, perm
        self.q += 1
        return [y.copy() for _ in range(K)]


class BanditMFW:
    """Bandit-MFW over the delta-interior.  Call :meth:`block` with L value oracles."""

    def __init__(self, polytope, schedule, seed=0):
        self.polytope = polytope
        self.schedule = schedule
        self.K = schedule.K
        self.L = schedule.L
        self.delta = schedule.delta
        self.seed = seed
        self.interior = polytope.shrink_interior(self.delta)
        self.bank = OracleBank(self.interior, self.K, schedule.oracle_horizon)
        self.q = 0
        self.iterates = None
        self.momentum = None
        self.probes = []  # (round-in-block, probe point) of the last block
        self.feedback = []

    def block(self, value_oracles):
        if self.q >= self.schedule.Q:
            raise RuntimeError("all blocks played")
        if len(value_oracles) != self.L:
            raise ValueError(f"block needs exactly L={self.L} reward functions")
        K, n, delta = self.K, self.polytope.n, self.delta
        X = np.empty((K + 1, n))
        X[0] = delta
        for k in range(1, K + 1):
            v = self.bank.get_action(k - 1)
            v_tilde = (v - delta) / (1.0 - delta)
            X[k] = measured_step(X[k - 1], v_tilde, K)

        perm = _rng.substream(self.seed, _rng.PERMUTATION, self.q).permutation(self.L)
        plays = [X[-1].copy() for _ in range(self.L)]
        U = np.empty((K, n))
        self.probes = []
        for k in range(1, K + 1):
            U[k - 1] = sample_sphere(n, _rng.substream(self.seed, _rng.SPHERE, self.q, k))
            probe = X[k] + delta * U[k - 1]
            if not self.polytope.contains(probe, FEAS_TOL):
                raise ProbeInfeasibleError(
                    f"block {self.q}, k={k}: probe point left the feasible set"
                )
            plays[perm[k - 1]] = probe
            self.probes.append((int(perm[k - 1]), probe))

        G = np.zeros((K, n))
        g = np.zeros(n)
        self.feedback = []
        for k in range(1, K + 1):
            eta = eta_meta(k)
            est = one_point_estimate(value_oracles[perm[k - 1]], X[k], delta, U[k - 1])
            g = (1.0 - eta) * g + eta * est
            G[k - 1] = g
            x_tilde = (X[k] - delta) / (1.0 - delta)
            d = (1.0 - x_tilde) * g
            self.feedback.append(d)
            self.bank.feed(k - 1, d)
        self.iterates, self.momentum = X, G
        self.q += 1
        return plays


def make_algorithm(polytope, schedule, seed=0):
    cls = {"meta32": MetaMFW, "meta34": MetaMFW, "mono": MonoMFW, "bandit": BanditMFW}
    return cls[schedule.variant](polytope, schedule, seed)


def offline_measured_greedy(objective, polytope, K):
    """Measured continuous greedy with exact gradients; a 1/e-approximation."""
    if K < 1:
        raise ValueError("K must be positive")
    x = np.zeros(polytope.n)
    for _ in range(K):
        v = polytope.linear_maximize(objective.grad(x) * (1.0 - x))
        x = measured_step(x, v, K)
    return x
