# Backward heat equation v_t + (C/2) v_xixi = 0 with final data v(T) = f,
# solved exactly as a Gaussian convolution
#     v(t, xi) = E[f(xi + sigma Z)],  Z ~ N(0, 1),  sigma^2 = C (T - t)
# and evaluated by quadrature in z.
import warnings
from collections import namedtuple
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.legendre import leggauss

from regretbench import config
from regretbench.config import logger
from regretbench.errors import (DerivativeUnavailable, DomainTruncationWarning,
                                ValidationError)

HeatDerivatives = namedtuple('HeatDerivatives', ['v', 'v_xi', 'v_xixi', 'v_t'])


@lru_cache(maxsize=None)
def hermite_rule(order):
    """Nodes and weights of E[f(Z)] for a standard normal Z"""
    x, w = hermgauss(order)
    return np.sqrt(2.0) * x, w / np.sqrt(np.pi)


@lru_cache(maxsize=None)
def legendre_rule(order):
    return leggauss(order)


def kernel_nodes(xi, sigma, kinks=(), order=None):
    """Standardized nodes z and weights w (shape xi.shape + (K,)) such that
    sum(w * f(xi + sigma z)) approximates E[f(xi + sigma Z)].

    Without kinks a Gauss-Hermite rule is used. With kinks the window
    |z| <= truncation_sigmas is split at every kink and each piece gets a
    Gauss-Legendre rule weighted by the normal density.
    """
    order = order or config.quadrature_order
    xi = np.asarray(xi, dtype=float)
    if not kinks:
        z, w = hermite_rule(order)
        return (np.broadcast_to(z, xi.shape + z.shape),
                np.broadcast_to(w, xi.shape + w.shape))
    L = config.truncation_sigmas
    sigma = np.broadcast_to(np.asarray(sigma, dtype=float), xi.shape)
    with np.errstate(divide='ignore', invalid='ignore'):
        cuts = (np.asarray(kinks)[None, :] - xi.reshape(-1, 1)) \
            / sigma.reshape(-1, 1)
    cuts = np.clip(np.nan_to_num(cuts, nan=L), -L, L)
    bounds = np.full((xi.size, 1), L)
    edges = np.concatenate((-bounds, np.sort(cuts, axis=1), bounds), axis=1)
    a, b = edges[:, :-1, None], edges[:, 1:, None]
    x, w = legendre_rule(order)
    half = (b - a) / 2
    z = (a + b) / 2 + half * x
    weights = half * w * np.exp(-z ** 2 / 2) / np.sqrt(2 * np.pi)
    return (z.reshape(xi.shape + (-1,)), weights.reshape(xi.shape + (-1,)))


class HeatSolution(object):
    """Backward heat solution of one-dimensional final data.

    Derivatives use the highest derivative oracle supplied for f and
    differentiate the kernel for the rest:
        v_xi   = E[f'(xi + sigma Z)]   or E[f(xi + sigma Z) Z] / sigma
        v_xixi = E[f''(xi + sigma Z)]  or E[f'(.) Z] / sigma
                                        or E[f(.) (Z^2 - 1)] / sigma^2
    """

    def __init__(self, f, C, T, df=None, d2f=None, kinks=(), order=None,
                 domain=None):
        if not C > 0:
            raise ValidationError(f"diffusion constant must be > 0, got {C}")
        self.f = f
        self.df = df
        self.d2f = d2f
        self.C = float(C)
        self.T = float(T)
        self.kinks = tuple(kinks)
        self.order = order or config.quadrature_order
        self.domain = domain

    def _sigma(self, t):
        s = self.T - t
        if np.any(s < 0):
            raise ValidationError(f"evaluation time after the final time "
                                  f"T={self.T}")
        return np.sqrt(self.C * s)

    def _warn_truncation(self, xi, sigma):
        if self.domain is None:
            return
        lo, hi = self.domain
        reach = config.truncation_warning_sigmas * sigma
        near = (xi - reach < lo) | (xi + reach > hi)
        if np.any(near):
            message = (f"kernel window of {config.truncation_warning_sigmas} "
                       f"sigma leaves the data domain [{lo}, {hi}] at "
                       f"{int(np.count_nonzero(near))} points")
            logger.warning(message)
            warnings.warn(message, DomainTruncationWarning, stacklevel=3)

    def _points(self, t, xi):
        t, xi = np.broadcast_arrays(np.asarray(t, dtype=float),
                                    np.asarray(xi, dtype=float))
        sigma = self._sigma(t)
        self._warn_truncation(xi, sigma)
        z, w = kernel_nodes(xi, sigma, self.kinks, self.order)
        return t, xi, sigma, z, w, xi[..., None] + sigma[..., None] * z

    def value(self, t, xi):
        t, xi, sigma, z, w, pts = self._points(t, xi)
        v = np.sum(w * self.f(pts), axis=-1)
        final = sigma == 0
        if np.any(final):
            v = np.where(final, self.f(xi), v)
        return v

    def __call__(self, t, xi):
        return self.value(t, xi)

    def derivatives(self, t, xi):
        t, xi, sigma, z, w, pts = self._points(t, xi)
        final = sigma == 0
        if np.any(final) and (self.df is None or self.d2f is None):
            raise DerivativeUnavailable(
                "derivatives of non-smooth final data requested at the "
                "final time")
        safe = np.where(final, 1.0, sigma)[..., None]
        fv = self.f(pts)
        v = np.sum(w * fv, axis=-1)
        if self.df is not None:
            dfv = self.df(pts)
            v_xi = np.sum(w * dfv, axis=-1)
        else:
            v_xi = np.sum(w * fv * z / safe, axis=-1)
        if self.d2f is not None:
            v_xixi = np.sum(w * self.d2f(pts), axis=-1)
        elif self.df is not None:
            v_xixi = np.sum(w * dfv * z / safe, axis=-1)
        else:
            v_xixi = np.sum(w * fv * (z ** 2 - 1) / safe ** 2, axis=-1)
        if np.any(final):
            v = np.where(final, self.f(xi), v)
            v_xi = np.where(final, self.df(xi), v_xi)
            v_xixi = np.where(final, self.d2f(xi), v_xixi)
        return HeatDerivatives(v, v_xi, v_xixi, -0.5 * self.C * v_xixi)

    def residual(self, t, xi):
        """v_t + (C/2) v_xixi, with v_t from centered differences in t"""
        h = 1e-4
        dv = (self.value(np.asarray(t) + h, xi)
              - self.value(np.asarray(t) - h, xi)) / (2 * h)
        return dv + 0.5 * self.C * self.derivatives(t, xi).v_xixi


def heat_solve(f, C, T, df=None, d2f=None, kinks=(), order=None,
               domain=None):
    """Backward heat solution with final data f at time T.

    :param f: vectorized final data
    :param C: diffusion constant (> 0)
    :param df, d2f: optional derivative oracles of f
    :param kinks: points where f is not smooth
    :param order: quadrature order
    :param domain: optional (lo, hi) where f is trusted; evaluations whose
        kernel window reaches its edge issue a DomainTruncationWarning
    """
    return HeatSolution(f, C, T, df, d2f, kinks, order, domain)
