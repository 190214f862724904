# Similarity profile of the classic problem: with final data |xi|/2 the
# heat solution is sqrt(s) * G(xi / sqrt(s)), s = T - t, where
#     G(z) = sqrt(C / 2pi) exp(-z^2 / 2C) + (z / 2) erf(z / sqrt(2C))
# solves G - z G' - C G'' = 0 and G(z) / z -> 1/2 as z -> infinity.
import numpy as np
from scipy.special import erf


def profile(z, C):
    z = np.asarray(z, dtype=float)
    return (np.sqrt(C / (2 * np.pi)) * np.exp(-z ** 2 / (2 * C))
            + 0.5 * z * erf(z / np.sqrt(2 * C)))


def profile_d1(z, C):
    z = np.asarray(z, dtype=float)
    return 0.5 * erf(z / np.sqrt(2 * C))


def profile_d2(z, C):
    z = np.asarray(z, dtype=float)
    return np.exp(-z ** 2 / (2 * C)) / np.sqrt(2 * np.pi * C)


def profile_d3(z, C):
    return -np.asarray(z, dtype=float) / C * profile_d2(z, C)


def ode_residual(z, C):
    """G - z G' - C G'', zero for the exact profile"""
    return profile(z, C) - z * profile_d1(z, C) - C * profile_d2(z, C)
