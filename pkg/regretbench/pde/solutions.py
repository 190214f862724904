# Solutions of the limiting equation
#     u_t + C D = 0,
#     D = (u_xixi u_eta^2 - 2 u_xieta u_xi u_eta + u_etaeta u_xi^2) / (2 u_eta^2)
# backward from u(T) = phi.
from abc import ABC, abstractmethod
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from regretbench.config import logger
from regretbench.errors import DerivativeUnavailable, ValidationError
from regretbench.graph.debruijn import DeBruijnGraph, enumerate_simple_cycles
from regretbench.pde import classic
from regretbench.pde.finaldata import (ClassicData, EnvelopeData, GeneralData,
                                       SeparableData)
from regretbench.pde.heat import heat_solve
from regretbench.strategy.cyclelp import diffusion_constants


@dataclass(frozen=True, eq=False)
class PdePoint:
    """u and its derivatives at (t, xi, eta); fields may be arrays"""
    t: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    u: np.ndarray
    u_t: np.ndarray
    u_xi: np.ndarray
    u_eta: np.ndarray
    u_xixi: np.ndarray
    u_xieta: np.ndarray
    u_etaeta: np.ndarray

    @property
    def D(self):
        return ((self.u_xixi * self.u_eta ** 2
                 - 2 * self.u_xieta * self.u_xi * self.u_eta
                 + self.u_etaeta * self.u_xi ** 2)
                / (2 * self.u_eta ** 2))

    @property
    def u_x1(self):
        return self.u_xi + self.u_eta

    @property
    def u_x2(self):
        return self.u_eta - self.u_xi

    @property
    def weights(self):
        """Weights (w_q, w_r) of the experts in the leading bid"""
        total = self.u_x1 + self.u_x2
        return self.u_x1 / total, self.u_x2 / total

    @property
    def gradient(self):
        return np.stack((self.u_xi, self.u_eta), axis=-1)

    @property
    def hessian(self):
        return np.stack((np.stack((self.u_xixi, self.u_xieta), axis=-1),
                         np.stack((self.u_xieta, self.u_etaeta), axis=-1)),
                        axis=-2)

    def residual(self, C):
        return self.u_t + C * self.D


class PdeSolution(ABC):

    def __init__(self, C, T, final):
        if not C > 0:
            raise ValidationError(f"diffusion constant must be > 0, got {C}")
        self.C = float(C)
        self.T = float(T)
        self.final = final

    @abstractmethod
    def evaluate(self, t, xi, eta):
        """PdePoint at (t, xi, eta), t <= T"""

    def value(self, t, xi, eta):
        return self.evaluate(t, xi, eta).u

    def __call__(self, t, xi, eta):
        return self.value(t, xi, eta)

    def __repr__(self):
        return f"{type(self).__name__}(C={self.C}, T={self.T})"


def _arrays(t, xi, eta):
    return np.broadcast_arrays(np.asarray(t, dtype=float),
                               np.asarray(xi, dtype=float),
                               np.asarray(eta, dtype=float))


class SeparableSolution(PdeSolution):
    """u = c eta + v(t, xi) with v the backward heat solution of phi_bar;
    D = v_xixi / 2"""

    def __init__(self, final, C, T, order=None, domain=None):
        super().__init__(C, T, final)
        self.heat = heat_solve(final.phi_bar, C, T, final.dphi_bar,
                               final.d2phi_bar, final.kinks, order, domain)

    def value(self, t, xi, eta):
        t, xi, eta = _arrays(t, xi, eta)
        return self.final.c * eta + self.heat.value(t, xi)

    def evaluate(self, t, xi, eta):
        t, xi, eta = _arrays(t, xi, eta)
        hd = self.heat.derivatives(t, xi)
        zero = np.zeros_like(xi)
        return PdePoint(t, xi, eta, self.final.c * eta + hd.v, hd.v_t,
                        hd.v_xi, self.final.c + zero, hd.v_xixi, zero, zero)


class ClassicSolution(PdeSolution):
    """u = eta/2 + sqrt(s) G(xi / sqrt(s)) + shift with s = T + delta - t.
    delta > 0 gives the smoothed solution u(t - delta), smooth up to t = T."""

    def __init__(self, C, T, delta=0.0, shift=0.0):
        if delta < 0:
            raise ValidationError(f"time shift must be >= 0, got {delta}")
        final = (ClassicData() if delta == 0 else
                 EnvelopeData(delta, 'below' if shift < 0 else 'above', C))
        super().__init__(C, T, final)
        self.delta = float(delta)
        self.shift = float(shift)

    def _s(self, t):
        s = self.T + self.delta - t
        if np.any(s < 0):
            raise ValidationError(f"evaluation time after T + delta = "
                                  f"{self.T + self.delta}")
        return s

    def value(self, t, xi, eta):
        t, xi, eta = _arrays(t, xi, eta)
        root = np.sqrt(self._s(t))
        safe = np.where(root > 0, root, 1.0)
        v = np.where(root > 0, root * classic.profile(xi / safe, self.C),
                     0.5 * np.abs(xi))
        return 0.5 * eta + v + self.shift

    def evaluate(self, t, xi, eta):
        t, xi, eta = _arrays(t, xi, eta)
        root = np.sqrt(self._s(t))
        if np.any(root == 0):
            raise DerivativeUnavailable("the classic solution has a kink at "
                                        "xi = 0 at the final time")
        z = xi / root
        v_xixi = classic.profile_d2(z, self.C) / root
        zero = np.zeros_like(xi)
        return PdePoint(t, xi, eta,
                        0.5 * eta + root * classic.profile(z, self.C)
                        + self.shift,
                        -0.5 * self.C * v_xixi,
                        classic.profile_d1(z, self.C),
                        0.5 + zero, v_xixi, zero, zero)


def classic_solution(C, T, delta=0.0, side='above'):
    """Exact solution for the classic data (eta + |xi|)/2.

    :param delta: time shift; delta > 0 gives a smooth solution lying above
        the classic one (side='above') or shifted below it (side='below')
    """
    if delta == 0:
        return ClassicSolution(C, T)
    shift = 0.0 if side == 'above' else -float(np.sqrt(C * delta
                                                        / (2 * np.pi)))
    return ClassicSolution(C, T, delta, shift)


def solve_pde(final, C, T, order=None, domain=None, y_grid=None, threads=1):
    """Pick the solver for the kind of final data: exact formula for the
    classic data and its envelopes, the heat fast path for separable data,
    the level-set construction otherwise."""
    if isinstance(final, ClassicData):
        return ClassicSolution(C, T)
    if isinstance(final, EnvelopeData):
        if final.C != C:
            logger.warning(f"envelope smoothed with C={final.C} solved with "
                           f"C={C}; using the heat path")
            return SeparableSolution(final, C, T, order, domain)
        return ClassicSolution(C, T, final.delta, final.shift)
    if isinstance(final, SeparableData):
        return SeparableSolution(final, C, T, order, domain)
    if isinstance(final, GeneralData):
        from regretbench.pde.levelset import levelset_solve
        return levelset_solve(final, C, T, y_grid=y_grid, order=order,
                              threads=threads)
    raise ValidationError(f"unknown final data {final!r}")


Bounds = namedtuple('Bounds', ['upper', 'lower', 'C_upper', 'C_lower'])


def bounding_solutions(e, final, T, cycles=None, **kwargs):
    """Upper and lower PDE solutions for an expert pair: the investor's
    constant bounds the value from above, the market's from below.

    :param e: ExpertPair
    :param final: FinalData
    :param cycles: simple-cycle inventory for e.d (enumerated when None)
    """
    if cycles is None:
        cycles = enumerate_simple_cycles(DeBruijnGraph(e.d))
    C_upper, C_lower = diffusion_constants(e, cycles)
    logger.info(f"d={e.d}: upper C={C_upper}, lower C={C_lower}")
    return Bounds(solve_pde(final, C_upper, T, **kwargs),
                  solve_pde(final, C_lower, T, **kwargs),
                  C_upper, C_lower)
