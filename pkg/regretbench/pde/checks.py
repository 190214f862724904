from dataclasses import dataclass, field

import numpy as np

from regretbench.config import logger
from regretbench.errors import ValidationError
from regretbench.utils import write_csv

GRID_FIELDS = ['t', 'xi', 'eta', 'u', 'u_t', 'u_xi', 'u_eta', 'D']


@dataclass
class ResidualReport:
    """Worst discrepancies over a sample set. pde_residual uses the
    solver's own derivatives; fd_residual the finite-difference ones."""
    points: int
    h: float
    pde_residual: float
    fd_residual: float
    derivative_errors: dict = field(default_factory=dict)

    @property
    def max_derivative_error(self):
        return max(self.derivative_errors.values())


@dataclass
class PropertyReport:
    min_u_eta: float
    max_slope_excess: float
    max_u_t: float


def _as_points(points):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[-1] != 3:
        raise ValidationError("sample points are rows (t, xi, eta)")
    return points[:, 0], points[:, 1], points[:, 2]


def finite_differences(sol, t, xi, eta, h):
    """Central differences of u: (u_t, u_xi, u_eta, u_xixi, u_xieta,
    u_etaeta)"""
    u = sol.value
    u0 = u(t, xi, eta)
    u_t = (u(t + h, xi, eta) - u(t - h, xi, eta)) / (2 * h)
    u_xp, u_xm = u(t, xi + h, eta), u(t, xi - h, eta)
    u_ep, u_em = u(t, xi, eta + h), u(t, xi, eta - h)
    u_xixi = (u_xp - 2 * u0 + u_xm) / h ** 2
    u_etaeta = (u_ep - 2 * u0 + u_em) / h ** 2
    u_xieta = (u(t, xi + h, eta + h) - u(t, xi + h, eta - h)
               - u(t, xi - h, eta + h) + u(t, xi - h, eta - h)) / (4 * h ** 2)
    return (u_t, (u_xp - u_xm) / (2 * h), (u_ep - u_em) / (2 * h),
            u_xixi, u_xieta, u_etaeta)


def residual_check(sol, points, h=1e-4):
    """Compare a solution's derivatives with central differences of its
    values and report the PDE residual u_t + C D both ways.

    :param sol: PdeSolution
    :param points: array of rows (t, xi, eta) with t < T - h
    :param h: difference step
    """
    t, xi, eta = _as_points(points)
    if np.any(t >= sol.T - h):
        raise ValidationError(f"sample times must be below T - h = "
                              f"{sol.T - h}")
    p = sol.evaluate(t, xi, eta)
    u_t, u_xi, u_eta, u_xixi, u_xieta, u_etaeta = finite_differences(
        sol, t, xi, eta, h)
    D = ((u_xixi * u_eta ** 2 - 2 * u_xieta * u_xi * u_eta
          + u_etaeta * u_xi ** 2) / (2 * u_eta ** 2))
    errors = {'u_t': float(np.max(np.abs(u_t - p.u_t))),
              'u_xi': float(np.max(np.abs(u_xi - p.u_xi))),
              'u_eta': float(np.max(np.abs(u_eta - p.u_eta))),
              'D': float(np.max(np.abs(D - p.D)))}
    report = ResidualReport(len(t), h,
                            float(np.max(np.abs(p.residual(sol.C)))),
                            float(np.max(np.abs(u_t + sol.C * D))),
                            errors)
    logger.debug(f"residual check on {len(t)} points: {report}")
    return report


def property_check(sol, points):
    """Sampled u_eta minimum, worst |u_xi| - u_eta and largest u_t"""
    t, xi, eta = _as_points(points)
    p = sol.evaluate(t, xi, eta)
    return PropertyReport(float(np.min(p.u_eta)),
                          float(np.max(np.abs(p.u_xi) - p.u_eta)),
                          float(np.max(p.u_t)))


def dump_grid(sol, path, t_values, xi_values, eta_values):
    """Write u, u_t, u_xi, u_eta and D on a tensor grid to CSV"""
    t, xi, eta = (a.ravel() for a in np.meshgrid(
        np.asarray(t_values, dtype=float), np.asarray(xi_values, dtype=float),
        np.asarray(eta_values, dtype=float), indexing='ij'))
    p = sol.evaluate(t, xi, eta)
    rows = ({'t': float(a), 'xi': float(b), 'eta': float(c), 'u': float(u),
             'u_t': float(ut), 'u_xi': float(ux), 'u_eta': float(ue),
             'D': float(d)}
            for a, b, c, u, ut, ux, ue, d in zip(t, xi, eta, p.u, p.u_t,
                                                 p.u_xi, p.u_eta, p.D))
    return write_csv(path, GRID_FIELDS, rows)
