# Final-time data phi(xi, eta) of the limiting PDE.
#
# Structural conditions checked on sample points:
#   phi_eta >= c > 0                (monotone in eta)
#   |phi_xi| <= phi_eta             (bounded slope in xi)
#   phi_xixi phi_eta^2 - 2 phi_xieta phi_xi phi_eta + phi_etaeta phi_xi^2 >= 0
#                                   (level sets concave; optional)
import json
from collections import namedtuple

import numpy as np

from regretbench.errors import (ConfigError, DerivativeUnavailable,
                                FinalDataViolation)
from regretbench.pde import classic

FinalDerivatives = namedtuple(
    'FinalDerivatives', ['phi', 'xi', 'eta', 'xixi', 'xieta', 'etaeta'])


def level_set_convexity(der):
    """The quantity that must stay >= 0 for u_t <= 0"""
    return (der.xixi * der.eta ** 2 - 2 * der.xieta * der.xi * der.eta
            + der.etaeta * der.xi ** 2)


class FinalData(object):
    kind = None

    def __init__(self, c, name=None):
        if not c > 0:
            raise FinalDataViolation(f"phi_eta >= c > 0 required; got c={c}")
        self.c = float(c)
        self.name = name or self.kind

    def value(self, xi, eta):
        raise NotImplementedError

    def derivatives(self, xi, eta):
        raise NotImplementedError

    def check(self, xi, eta, convexity=False, tol=1e-12):
        """Validate the structural conditions on sample points; raise
        FinalDataViolation naming the first failing condition.

        :param xi, eta: arrays of sample coordinates (broadcast together)
        :param convexity: also require concave level sets
        """
        xi, eta = np.broadcast_arrays(np.asarray(xi, dtype=float),
                                      np.asarray(eta, dtype=float))
        der = self.derivatives(xi, eta)
        checks = [('phi_eta >= c', der.eta - self.c),
                  ('|phi_xi| <= phi_eta', der.eta - np.abs(der.xi))]
        if convexity:
            checks.append(('level sets concave (convexity condition)',
                           level_set_convexity(der)))
        for label, margin in checks:
            margin = np.broadcast_to(margin, xi.shape)
            bad = np.flatnonzero(margin.ravel() < -tol)
            if bad.size:
                i = bad[0]
                raise FinalDataViolation(
                    f"{self.name}: {label} fails at xi={xi.ravel()[i]}, "
                    f"eta={eta.ravel()[i]}")
        return True

    def __repr__(self):
        return f"{type(self).__name__}({self.name}, c={self.c})"


class SeparableData(FinalData):
    """phi(xi, eta) = c eta + phi_bar(xi). kinks lists the points where
    phi_bar is not smooth; quadrature splits there."""
    kind = 'separable'

    def __init__(self, c, phi_bar, dphi_bar=None, d2phi_bar=None, kinks=(),
                 name=None):
        super().__init__(c, name)
        self.phi_bar = phi_bar
        self.dphi_bar = dphi_bar
        self.d2phi_bar = d2phi_bar
        self.kinks = tuple(float(k) for k in kinks)

    def value(self, xi, eta):
        return self.c * np.asarray(eta, dtype=float) + self.phi_bar(
            np.asarray(xi, dtype=float))

    def derivatives(self, xi, eta):
        if self.dphi_bar is None or self.d2phi_bar is None:
            raise DerivativeUnavailable(
                f"{self.name}: no second derivative of phi_bar")
        xi = np.asarray(xi, dtype=float)
        zero = np.zeros_like(xi + np.asarray(eta, dtype=float))
        return FinalDerivatives(self.value(xi, eta),
                                self.dphi_bar(xi) + zero,
                                self.c + zero,
                                self.d2phi_bar(xi) + zero,
                                zero, zero)

    def check(self, xi, eta, convexity=False, tol=1e-12):
        if self.d2phi_bar is None and self.dphi_bar is not None:
            slope = np.abs(self.dphi_bar(np.asarray(xi, dtype=float)))
            if np.any(slope > self.c + tol):
                raise FinalDataViolation(
                    f"{self.name}: |phi_xi| <= phi_eta fails")
            return True
        return super().check(xi, eta, convexity, tol)

    def as_general(self):
        """The same data seen as a general phi (for the level-set path)"""
        c = self.c

        def zeros(xi, eta):
            return np.zeros(np.broadcast(np.asarray(xi),
                                         np.asarray(eta)).shape)

        return GeneralData(
            phi=self.value,
            phi_xi=lambda xi, eta: self.dphi_bar(xi) + zeros(xi, eta),
            phi_eta=lambda xi, eta: c + zeros(xi, eta),
            phi_xixi=lambda xi, eta: self.d2phi_bar(xi) + zeros(xi, eta),
            phi_xieta=zeros,
            phi_etaeta=zeros,
            c=c, name=f"{self.name} (general)")


class ClassicData(SeparableData):
    """(eta + |xi|) / 2 = max(x1, x2): regret against the better expert"""
    kind = 'classic'

    def __init__(self):
        super().__init__(0.5,
                         phi_bar=lambda xi: 0.5 * np.abs(xi),
                         dphi_bar=lambda xi: 0.5 * np.sign(xi),
                         d2phi_bar=None,
                         kinks=(0.0,),
                         name='classic')


class EnvelopeData(SeparableData):
    """Classic solution at time T - delta used as smooth final data. It lies
    above the classic data; side='below' shifts it down by its largest gap
    sqrt(C delta / 2pi), which puts it below."""
    kind = 'envelope'

    def __init__(self, delta, side='above', C=1.0):
        if not delta > 0:
            raise FinalDataViolation(f"smoothing scale must be > 0, got "
                                     f"{delta}")
        if side not in ('above', 'below'):
            raise FinalDataViolation(f"side must be above or below, got "
                                     f"{side}")
        self.delta = float(delta)
        self.side = side
        self.C = float(C)
        root = np.sqrt(self.delta)
        self.shift = (0.0 if side == 'above'
                      else -float(np.sqrt(C * delta / (2 * np.pi))))
        super().__init__(
            0.5,
            phi_bar=lambda xi: root * classic.profile(xi / root, C)
            + self.shift,
            dphi_bar=lambda xi: classic.profile_d1(xi / root, C),
            d2phi_bar=lambda xi: classic.profile_d2(xi / root, C) / root,
            kinks=(0.0,),
            name=f"classic envelope ({side}, delta={delta})")


class GeneralData(FinalData):
    """phi given with its derivatives up to second order, all vectorized
    over numpy arrays"""
    kind = 'general'

    def __init__(self, phi, phi_xi, phi_eta, phi_xixi, phi_xieta,
                 phi_etaeta, c, name=None):
        super().__init__(c, name)
        self.phi = phi
        self.phi_xi = phi_xi
        self.phi_eta = phi_eta
        self.phi_xixi = phi_xixi
        self.phi_xieta = phi_xieta
        self.phi_etaeta = phi_etaeta

    def value(self, xi, eta):
        return self.phi(np.asarray(xi, dtype=float),
                        np.asarray(eta, dtype=float))

    def derivatives(self, xi, eta):
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        return FinalDerivatives(self.phi(xi, eta),
                                self.phi_xi(xi, eta),
                                self.phi_eta(xi, eta),
                                self.phi_xixi(xi, eta),
                                self.phi_xieta(xi, eta),
                                self.phi_etaeta(xi, eta))


def classic_data():
    return ClassicData()


def smooth_classic_envelope(delta, side='above', C=1.0):
    """Smooth final data bracketing the classic data.

    :param delta: smoothing time scale
    :param side: 'above' or 'below' the classic data
    :param C: diffusion constant of the smoothing heat flow
    """
    return EnvelopeData(delta, side, C)


def linear_data(c=1.0):
    """phi = c eta; every level set is flat"""
    return GeneralData(
        phi=lambda xi, eta: c * eta + 0.0 * xi,
        phi_xi=lambda xi, eta: 0.0 * (xi + eta),
        phi_eta=lambda xi, eta: c + 0.0 * (xi + eta),
        phi_xixi=lambda xi, eta: 0.0 * (xi + eta),
        phi_xieta=lambda xi, eta: 0.0 * (xi + eta),
        phi_etaeta=lambda xi, eta: 0.0 * (xi + eta),
        c=c, name='linear')


def smooth_abs_data(a=0.5, width=1.0, c=0.5):
    """c eta + a sqrt(width^2 + xi^2), a smooth stand-in for a |xi|"""
    if a > c:
        raise FinalDataViolation(f"|phi_xi| <= phi_eta needs a <= c; got "
                                 f"a={a}, c={c}")
    w2 = width ** 2
    return SeparableData(
        c,
        phi_bar=lambda xi: a * np.sqrt(w2 + xi ** 2),
        dphi_bar=lambda xi: a * xi / np.sqrt(w2 + xi ** 2),
        d2phi_bar=lambda xi: a * w2 / (w2 + xi ** 2) ** 1.5,
        name=f"smooth-abs(a={a}, width={width}, c={c})")


def log_cosh_data(a=0.3, k=0.25):
    """eta + k log cosh(eta) + a sqrt(1 + xi^2); phi_eta >= 1 - k"""
    if not 0 <= k < 1 or a > 1 - k:
        raise FinalDataViolation(f"log-cosh data needs 0 <= k < 1 and "
                                 f"a <= 1 - k; got a={a}, k={k}")

    def phi(xi, eta):
        return (eta + k * np.logaddexp(eta, -eta) - k * np.log(2)
                + a * np.sqrt(1 + xi ** 2))

    return GeneralData(
        phi=phi,
        phi_xi=lambda xi, eta: a * xi / np.sqrt(1 + xi ** 2) + 0 * eta,
        phi_eta=lambda xi, eta: 1 + k * np.tanh(eta) + 0 * xi,
        phi_xixi=lambda xi, eta: a / (1 + xi ** 2) ** 1.5 + 0 * eta,
        phi_xieta=lambda xi, eta: 0.0 * (xi + eta),
        phi_etaeta=lambda xi, eta: k / np.cosh(eta) ** 2 + 0 * xi,
        c=1 - k, name=f"log-cosh(a={a}, k={k})")


def composite_data(a=0.5, k=0.5):
    """F(eta + a sqrt(1 + xi^2)) with F(s) = s + k tanh(s). Its level sets
    are those of eta + a sqrt(1 + xi^2), so u = F(eta + heat solution of
    a sqrt(1 + xi^2))."""
    if k < 0 or a > 1:
        raise FinalDataViolation(f"composite data needs k >= 0 and a <= 1; "
                                 f"got a={a}, k={k}")

    def parts(xi, eta):
        root = np.sqrt(1 + xi ** 2)
        s = eta + a * root
        sech2 = 1 / np.cosh(s) ** 2
        return (s, 1 + k * sech2, -2 * k * sech2 * np.tanh(s),
                a * xi / root, a / root ** 3)

    def phi(xi, eta):
        s = parts(xi, eta)[0]
        return s + k * np.tanh(s)

    def phi_xixi(xi, eta):
        _, F1, F2, p1, p2 = parts(xi, eta)
        return F2 * p1 ** 2 + F1 * p2

    return GeneralData(
        phi=phi,
        phi_xi=lambda xi, eta: parts(xi, eta)[1] * parts(xi, eta)[3],
        phi_eta=lambda xi, eta: parts(xi, eta)[1],
        phi_xixi=phi_xixi,
        phi_xieta=lambda xi, eta: parts(xi, eta)[2] * parts(xi, eta)[3],
        phi_etaeta=lambda xi, eta: parts(xi, eta)[2],
        c=1.0, name=f"composite(a={a}, k={k})")


FAMILIES = {
    'classic': classic_data,
    'envelope': smooth_classic_envelope,
    'linear': linear_data,
    'smooth-abs': smooth_abs_data,
    'log-cosh': log_cosh_data,
    'composite': composite_data,
}


def final_from_json(payload):
    """Final data from {"kind": <family>, <parameters>...}"""
    payload = dict(payload)
    kind = payload.pop('kind', None)
    if kind not in FAMILIES:
        raise ConfigError(f"final data kind must be one of "
                          f"{sorted(FAMILIES)}, got {kind!r}")
    try:
        return FAMILIES[kind](**payload)
    except TypeError as e:
        raise ConfigError(f"bad parameters for final data {kind}: {e}") \
            from e


def load_final(path):
    try:
        with open(path, 'r') as f:
            payload = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read final data {path}: {e}") from e
    return final_from_json(payload)
