# Level-set construction for general final data phi(xi, eta).
#
# For every level y, g(xi; y) is the unique eta with phi(xi, eta) = y
# (phi_eta >= c > 0). Each slice is carried back by the heat equation,
#     h(t, xi; y) = E[g(xi + sigma Z; y)],  sigma^2 = C (T - t),
# and u(t, xi, eta) is the y with h(t, xi; y) = eta. This needs h_y > 0.
from collections import namedtuple

import numpy as np
from scipy.interpolate import PchipInterpolator

from regretbench import config
from regretbench.config import logger
from regretbench.errors import (FoliationViolation, GridOutOfRange,
                                NumericalDegeneracy, ValidationError)
from regretbench.pde.finaldata import GeneralData
from regretbench.pde.heat import kernel_nodes
from regretbench.pde.solutions import PdePoint, PdeSolution
from regretbench.utils import parallel_map

SliceDerivatives = namedtuple(
    'SliceDerivatives', ['g', 'g_xi', 'g_y', 'g_xixi', 'g_xiy', 'g_yy'])

FieldDerivatives = namedtuple(
    'FieldDerivatives', ['h', 'h_xi', 'h_y', 'h_xixi', 'h_xiy', 'h_yy'])

_MAX_NEWTON = 100
_MAX_EXPANSIONS = 60


def solve_level(final, xi, y, guess=None, tol=None):
    """eta with phi(xi, eta) = y, vectorized.

    Newton steps are kept inside the bracket |eta - eta0| <= |phi(xi, eta0)
    - y| / c and replaced by bisection when they leave it.
    """
    tol = tol or config.root_tol
    xi, y = np.broadcast_arrays(np.asarray(xi, dtype=float),
                                np.asarray(y, dtype=float))
    eta = (np.zeros(xi.shape) if guess is None
           else np.array(np.broadcast_to(guess, xi.shape), dtype=float))
    f = final.phi(xi, eta) - y
    width = np.abs(f) / final.c
    lo, hi = eta - width, eta + width
    for _ in range(_MAX_NEWTON):
        slope = final.phi_eta(xi, eta)
        lo = np.where(f < 0, eta, lo)
        hi = np.where(f > 0, eta, hi)
        step = eta - f / slope
        outside = ~((step > lo) & (step < hi))
        new = np.where(outside & (f != 0), 0.5 * (lo + hi), step)
        new = np.where(f == 0, eta, new)
        done = np.abs(new - eta) <= tol * (1 + np.abs(eta))
        eta = new
        if np.all(done):
            return eta
        f = final.phi(xi, eta) - y
    raise NumericalDegeneracy(f"level-set root finding did not converge in "
                              f"{_MAX_NEWTON} iterations")


def slice_derivatives(final, xi, y):
    """g and its derivatives by implicit differentiation of phi(xi, g) = y"""
    g = solve_level(final, xi, y)
    xi = np.broadcast_to(np.asarray(xi, dtype=float), g.shape)
    p_xi = final.phi_xi(xi, g)
    p_eta = final.phi_eta(xi, g)
    p_xixi = final.phi_xixi(xi, g)
    p_xieta = final.phi_xieta(xi, g)
    p_etaeta = final.phi_etaeta(xi, g)
    g_xi = -p_xi / p_eta
    g_y = 1.0 / p_eta
    g_xixi = -(p_xixi + 2 * p_xieta * g_xi + p_etaeta * g_xi ** 2) / p_eta
    g_yy = -p_etaeta * g_y ** 2 / p_eta
    g_xiy = -(p_xieta + p_etaeta * g_xi) * g_y / p_eta
    return SliceDerivatives(g, g_xi, g_y, g_xixi, g_xiy, g_yy)


class LevelSetField(object):
    """The family h(t, xi; y) of heat solutions indexed by the level y"""

    def __init__(self, final, C, T, y_grid=None, order=None, threads=1):
        self.final = final
        self.C = float(C)
        self.T = float(T)
        self.y_grid = None if y_grid is None else np.sort(
            np.asarray(y_grid, dtype=float))
        self.order = order or config.quadrature_order
        self.threads = threads

    def g(self, xi, y):
        return solve_level(self.final, xi, y)

    def _nodes(self, t, xi):
        s = self.T - np.asarray(t, dtype=float)
        if np.any(s < 0):
            raise ValidationError(f"evaluation time after the final time "
                                  f"T={self.T}")
        sigma = np.sqrt(self.C * s)
        z, w = kernel_nodes(xi, sigma, order=self.order)
        return sigma, z, w

    def h(self, t, xi, y):
        t, xi, y = np.broadcast_arrays(np.asarray(t, dtype=float),
                                       np.asarray(xi, dtype=float),
                                       np.asarray(y, dtype=float))
        sigma, z, w = self._nodes(t, xi)
        pts = xi[..., None] + sigma[..., None] * z
        return np.sum(w * solve_level(self.final, pts, y[..., None]), axis=-1)

    def derivatives(self, t, xi, y):
        """h and its derivatives in xi and y at matching arrays t, xi, y"""
        t, xi, y = np.broadcast_arrays(np.asarray(t, dtype=float),
                                       np.asarray(xi, dtype=float),
                                       np.asarray(y, dtype=float))
        sigma, z, w = self._nodes(t, xi)
        pts = xi[..., None] + sigma[..., None] * z
        sd = slice_derivatives(self.final, pts, y[..., None])
        fd = FieldDerivatives(*(np.sum(w * v, axis=-1) for v in sd))
        if np.any(fd.h_y <= 0):
            raise FoliationViolation(
                f"h_y = {float(np.min(fd.h_y))} <= 0: the level sets no "
                f"longer foliate the plane")
        return fd

    def tabulate(self, t, xi):
        """h on the y-grid for every (t, xi): shape xi.shape + (len(grid),)"""
        columns = parallel_map(lambda y: self.h(t, xi, y), self.y_grid,
                               self.threads)
        H = np.stack(columns, axis=-1)
        if np.any(np.diff(H, axis=-1) <= 0):
            raise FoliationViolation("h is not increasing along the y-grid")
        return H


class LevelSetSolution(PdeSolution):
    """u(t, xi, eta) recovered from the level-set field by inversion in y"""

    def __init__(self, final, C, T, y_grid=None, order=None, threads=1):
        super().__init__(C, T, final)
        self.field = LevelSetField(final, C, T, y_grid, order, threads)

    def _grid_bracket(self, t, xi, eta):
        grid = self.field.y_grid
        H = self.field.tabulate(t, xi)
        flat_H = H.reshape(-1, grid.size)
        flat_eta = eta.ravel()
        if np.any(flat_eta < flat_H[:, 0]) or np.any(flat_eta > flat_H[:, -1]):
            raise GridOutOfRange(f"eta outside the range of h on the y-grid "
                                 f"[{grid[0]}, {grid[-1]}]")
        j = np.clip(np.sum(flat_H < flat_eta[:, None], axis=1), 1,
                    grid.size - 1)
        y0 = np.array([PchipInterpolator(row, grid)(v)
                       for row, v in zip(flat_H, flat_eta)])
        return (grid[j - 1].reshape(eta.shape), grid[j].reshape(eta.shape),
                y0.reshape(eta.shape))

    def _local_bracket(self, t, xi, eta):
        """Expanding bracket around phi(xi, eta), then a monotone cubic
        through five levels inside it"""
        center = self.final.phi(xi, eta)
        width = np.ones_like(center)
        lo, hi = center - width, center + width
        for _ in range(_MAX_EXPANSIONS):
            low_bad = self.field.h(t, xi, lo) > eta
            high_bad = self.field.h(t, xi, hi) < eta
            if not (np.any(low_bad) or np.any(high_bad)):
                break
            width = 2 * width
            lo = np.where(low_bad, center - width, lo)
            hi = np.where(high_bad, center + width, hi)
        else:
            raise GridOutOfRange("no level bracket found for eta")
        levels = lo[..., None] + (hi - lo)[..., None] * np.linspace(0, 1, 5)
        H = self.field.h(t[..., None], xi[..., None], levels)
        if np.any(np.diff(H, axis=-1) <= 0):
            raise FoliationViolation("h is not increasing in y")
        y0 = np.array([PchipInterpolator(row, level)(v) for row, level, v in
                       zip(H.reshape(-1, 5), levels.reshape(-1, 5),
                           eta.ravel())])
        return lo, hi, y0.reshape(eta.shape)

    def invert(self, t, xi, eta):
        """The level y with h(t, xi; y) = eta, and the field there"""
        if self.field.y_grid is not None:
            lo, hi, y = self._grid_bracket(t, xi, eta)
        else:
            lo, hi, y = self._local_bracket(t, xi, eta)
        for _ in range(_MAX_NEWTON):
            fd = self.field.derivatives(t, xi, y)
            f = fd.h - eta
            lo = np.where(f < 0, y, lo)
            hi = np.where(f > 0, y, hi)
            step = y - f / fd.h_y
            new = np.where((step > lo) & (step < hi), step, 0.5 * (lo + hi))
            new = np.where(f == 0, y, new)
            done = np.abs(new - y) <= config.root_tol * (1 + np.abs(y))
            y = new
            if np.all(done):
                return y, self.field.derivatives(t, xi, y)
        raise NumericalDegeneracy(f"inversion in y did not converge in "
                                  f"{_MAX_NEWTON} iterations")

    def value(self, t, xi, eta):
        t, xi, eta = np.broadcast_arrays(np.asarray(t, dtype=float),
                                         np.asarray(xi, dtype=float),
                                         np.asarray(eta, dtype=float))
        return self.invert(t, xi, eta)[0]

    def evaluate(self, t, xi, eta):
        t, xi, eta = np.broadcast_arrays(np.asarray(t, dtype=float),
                                         np.asarray(xi, dtype=float),
                                         np.asarray(eta, dtype=float))
        y, fd = self.invert(t, xi, eta)
        u_eta = 1.0 / fd.h_y
        u_xi = -fd.h_xi / fd.h_y
        u_etaeta = -fd.h_yy / fd.h_y ** 3
        u_xieta = -fd.h_xiy / fd.h_y ** 2 - u_etaeta * fd.h_xi
        u_xixi = (-(fd.h_xixi * fd.h_y - fd.h_xi * fd.h_xiy) / fd.h_y ** 2
                  - u_xieta * fd.h_xi)
        u_t = 0.5 * self.C * fd.h_xixi / fd.h_y
        return PdePoint(t, xi, eta, y, u_t, u_xi, u_eta, u_xixi, u_xieta,
                        u_etaeta)


def levelset_solve(final, C, T, y_grid=None, order=None, threads=1):
    """Solution for general final data through its level sets.

    :param final: GeneralData (separable data is converted)
    :param y_grid: optional grid of levels used to bracket the inversion;
        without it a local bracket is grown around phi(xi, eta)
    :param threads: worker threads for the per-level heat solves
    """
    if not isinstance(final, GeneralData):
        final = final.as_general()
    logger.debug(f"level-set solve of {final.name} with C={C}, T={T}")
    return LevelSetSolution(final, C, T, y_grid, order, threads)
