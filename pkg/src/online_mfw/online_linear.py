"""Bank of independent online linear-maximization oracles.

Each oracle runs projected online gradient ascent over the shared domain with
step ``D / (G_hat sqrt(T))``, where ``G_hat`` is the running maximum payoff norm.
That gives the ``O(sqrt(t))`` regret the meta algorithms rely on.
"""

import math

import numpy as np

G_FLOOR = 1e-8


class OracleBank:
    def __init__(self, domain, K, T, proj_tol=1e-10):
        if K < 1:
            raise ValueError("need at least one oracle (K >= 1)")
        if T < 1:
            raise ValueError("horizon T must be at least 1")
        self.domain = domain
        self.K = int(K)
        self.T = int(T)
        self.proj_tol = proj_tol
        self.diameter = float(domain.diameter)
        start = domain.zero()
        self._actions = np.tile(start, (self.K, 1))
        self._g_hat = np.full(self.K, G_FLOOR)
        self.rounds = np.zeros(self.K, dtype=int)

    def _check(self, k):
        if not 0 <= k < self.K:
            raise IndexError(f"oracle index {k} out of range [0, {self.K})")

    def get_action(self, k):
        """Current action of oracle ``k`` (0-based); does not advance state."""
        self._check(k)
        return self._actions[k].copy()

    def step_size(self, k):
        return self.diameter / (self._g_hat[k] * math.sqrt(self.T))

    def feed(self, k, d):
        """Receive payoff vector ``d`` and take one projected ascent step."""
        self._check(k)
        d = np.asarray(d, dtype=float)
        if d.shape != self._actions[k].shape:
            raise ValueError(f"payoff has shape {d.shape}, expected {self._actions[k].shape}")
        if not np.all(np.isfinite(d)):
            raise ValueError("payoff vector must be finite")
        self._g_hat[k] = max(self._g_hat[k], float(np.linalg.norm(d)))
        self.rounds[k] += 1
        if not np.any(d):
            return
        z = self._actions[k] + self.step_size(k) * d
        self._actions[k] = self.domain.project(z, self.proj_tol)


def init_bank(domain, K, T):
    return OracleBank(domain, K, T)


def get_action(bank, k):
    return bank.get_action(k)


def feed_payoff_vector(bank, k, d):
    bank.feed(k, d)
