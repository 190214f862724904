# Revised simplex method for equality-form linear programs
#     optimize c.x  subject to  A x = b,  x >= 0
# Two phases (artificial variables first), Bland's rule against cycling.
from dataclasses import dataclass
from enum import Enum

import numpy as np

from regretbench import config
from regretbench.config import logger
from regretbench.errors import NumericalDegeneracy


class SimplexStatus(str, Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    UNBOUNDED = 'unbounded'


@dataclass
class SimplexResult:
    status: SimplexStatus
    x: np.ndarray
    objective: float
    multipliers: np.ndarray
    iterations: int


class SimplexSolver(object):
    """Solver for one equality-form LP.

    The multipliers of an optimal result are the dual values pi with
    pi.A_j <= c_j for every column j when minimizing (>= when maximizing),
    and pi.b equal to the optimum.
    """

    def __init__(self, A, b, c, maximize=False, pivot_tol=None,
                 opt_tol=None, max_iterations=None):
        self.A = np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float).reshape(-1)
        self.c = np.asarray(c, dtype=float).reshape(-1)
        self.maximize = maximize
        self.pivot_tol = pivot_tol or config.lp_pivot_tol
        self.opt_tol = opt_tol or config.lp_optimality_tol
        self.max_iterations = max_iterations or config.lp_max_iterations
        self._iterations = 0

    def _iterate(self, A, b, c, basis):
        """Pivot until no column prices out. Entering column: lowest index
        with negative reduced cost. Leaving row: minimum ratio, ties to
        the lowest basic index."""
        while self._iterations < self.max_iterations:
            B_inv = np.linalg.inv(A[:, basis])
            x_B = np.maximum(B_inv @ b, 0.0)
            pi = c[basis] @ B_inv
            reduced = c - pi @ A
            reduced[basis] = 0.0
            entering = np.flatnonzero(reduced < -self.opt_tol)
            if entering.size == 0:
                return basis, SimplexStatus.OPTIMAL
            j = int(entering[0])
            direction = B_inv @ A[:, j]
            rows = np.flatnonzero(direction > self.pivot_tol)
            if rows.size == 0:
                return basis, SimplexStatus.UNBOUNDED
            ratios = x_B[rows] / direction[rows]
            ties = rows[ratios <= ratios.min() + self.pivot_tol]
            leaving = min(ties, key=lambda r: basis[r])
            logger.debug(f"simplex pivot {self._iterations}: column {j} "
                         f"enters, column {basis[leaving]} leaves")
            basis[leaving] = j
            self._iterations += 1
        raise NumericalDegeneracy(
            f"simplex stalled: no optimum after {self.max_iterations} "
            f"pivots")

    def _drive_out_artificials(self, A1, n, basis):
        """Pivot zero-level artificials out of the phase-one basis; rows
        where that is impossible are redundant and get dropped."""
        keep = []
        for r in range(len(basis)):
            if basis[r] < n:
                keep.append(r)
                continue
            B_inv = np.linalg.inv(A1[:, basis])
            row = (B_inv @ A1[:, :n])[r]
            candidates = [j for j in np.flatnonzero(
                np.abs(row) > self.pivot_tol) if j not in basis]
            if candidates:
                basis[r] = int(candidates[0])
                keep.append(r)
        return keep

    def solve(self):
        A, b = self.A.copy(), self.b.copy()
        c = -self.c if self.maximize else self.c.copy()
        m, n = A.shape
        self._iterations = 0

        # rows with negative right-hand side are flipped
        flip = np.where(b < 0, -1.0, 1.0)
        A *= flip[:, None]
        b *= flip

        A1 = np.concatenate((A, np.eye(m)), axis=1)
        c1 = np.concatenate((np.zeros(n), np.ones(m)))
        basis = list(range(n, n + m))
        basis, _ = self._iterate(A1, b, c1, basis)
        x_B = np.linalg.solve(A1[:, basis], b)
        infeasibility = sum(x for j, x in zip(basis, x_B) if j >= n)
        if infeasibility > self.opt_tol:
            logger.debug(f"phase one ended with infeasibility "
                         f"{infeasibility}")
            return SimplexResult(SimplexStatus.INFEASIBLE, np.zeros(n),
                                 np.nan, np.zeros(m), self._iterations)

        keep = self._drive_out_artificials(A1, n, basis)
        if len(keep) < m:
            logger.debug(f"dropping {m - len(keep)} redundant rows")
        basis = [basis[r] for r in keep]
        A2, b2 = A[keep], b[keep]
        basis, status = self._iterate(A2, b2, c, basis)
        if status is SimplexStatus.UNBOUNDED:
            return SimplexResult(status, np.zeros(n), np.nan, np.zeros(m),
                                 self._iterations)

        B_inv = np.linalg.inv(A2[:, basis])
        x = np.zeros(n)
        x[basis] = np.maximum(B_inv @ b2, 0.0)
        pi = np.zeros(m)
        pi[keep] = c[basis] @ B_inv
        pi *= flip
        objective = float(c @ x)
        if self.maximize:
            pi, objective = -pi, -objective
        return SimplexResult(SimplexStatus.OPTIMAL, x, objective, pi,
                             self._iterations)
