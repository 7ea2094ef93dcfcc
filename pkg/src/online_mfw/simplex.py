"""Dense primal simplex for small LPs with a feasible origin.

Solves ``max c.x  s.t.  G x <= h,  x >= 0`` where ``h >= 0``, so the slack
basis is feasible from the start and no phase one is needed.  Pivoting uses
Bland's rule, which cannot cycle.
"""

import numpy as np

PIVOT_TOL = 1e-9


class LPError(RuntimeError):
    """Raised when the simplex hits its iteration cap.

    ``incumbent`` holds the (feasible) basic solution at the last pivot.
    """

    def __init__(self, message, incumbent):
        super().__init__(message)
        self.incumbent = incumbent


def simplex_max(c, G, h, max_iter=None, tol=PIVOT_TOL):
    c = np.asarray(c, dtype=float)
    G = np.asarray(G, dtype=float)
    h = np.asarray(h, dtype=float)
    rows, n = G.shape
    if c.shape != (n,) or h.shape != (rows,):
        raise ValueError("dimension mismatch between c, G and h")
    if np.any(h < 0):
        raise ValueError("right-hand side must be nonnegative")
    if max_iter is None:
        max_iter = 50 * (rows + n) + 100

    width = n + rows
    tab = np.zeros((rows + 1, width + 1))
    tab[:rows, :n] = G
    tab[:rows, n:width] = np.eye(rows)
    tab[:rows, -1] = h
    tab[-1, :n] = -c
    basis = np.arange(n, width)

    for _ in range(max_iter):
        reduced = tab[-1, :width]
        candidates = np.flatnonzero(reduced < -tol)
        if candidates.size == 0:
            return _basic_solution(tab, basis, n)
        col = candidates[0]
        column = tab[:rows, col]
        ok = column > tol
        if not ok.any():
            # G has a nonnegative-free column; cannot happen with box rows present
            raise LPError("LP is unbounded", _basic_solution(tab, basis, n))
        ratios = np.full(rows, np.inf)
        ratios[ok] = tab[:rows, -1][ok] / column[ok]
        best = ratios.min()
        tied = np.flatnonzero(ratios <= best + tol * max(1.0, abs(best)))
        row = tied[np.argmin(basis[tied])]
        _pivot(tab, row, col)
        basis[row] = col

    raise LPError(
        f"simplex did not converge in {max_iter} pivots",
        _basic_solution(tab, basis, n),
    )


def _pivot(tab, row, col):
    tab[row] /= tab[row, col]
    factor = tab[:, col].copy()
    factor[row] = 0.0
    tab -= np.outer(factor, tab[row])
    # keep the basic solution primal feasible against round-off
    rhs = tab[:-1, -1]
    rhs[(rhs < 0) & (rhs > -1e-11)] = 0.0


def _basic_solution(tab, basis, n):
    x = np.zeros(n)
    rhs = tab[:-1, -1]
    mask = basis < n
    x[basis[mask]] = np.maximum(rhs[mask], 0.0)
    return x
