# Shared test fixtures: expert pairs, smooth final data, sample points
import json

import numpy as np

from regretbench.experts import ExpertPair
from regretbench.pde.finaldata import (composite_data, log_cosh_data,
                                       smooth_abs_data)

# gamma = (1.0, 0.36): M = 0.68 on both sides
uneven_pair = ExpertPair(1, (0.5, 0.3), (-0.5, -0.3))

# history-independent experts with q - r = 1 and q + r = 0: the game value
# with classic data is eps E|S_N| / 2 for a simple random walk S_N
coin_pair = ExpertPair(1, (0.5, 0.5), (-0.5, -0.5))


def quantized_pair(d, rng, denominator=8):
    """Experts on the grid k / denominator, |k| < denominator"""
    n = 2 ** d
    while True:
        q = rng.integers(-denominator + 1, denominator, size=n) / denominator
        r = rng.integers(-denominator + 1, denominator, size=n) / denominator
        if np.any(q != r):
            return ExpertPair(d, tuple(q.tolist()), tuple(r.tolist()))


def smooth_fixtures():
    """Three smooth final data satisfying the structural conditions: one
    separable, two handled by the level-set construction"""
    return [smooth_abs_data(a=0.5, width=1.0, c=0.5),
            log_cosh_data(a=0.3, k=0.25),
            composite_data(a=0.5, k=0.5)]


def sample_points(T=1.0, times=(0.0, 0.25, 0.5, 0.75),
                  xis=(-2.0, -1.0, 0.0, 0.5, 1.5), etas=(-1.0, 0.0, 1.0)):
    """Rows (t, xi, eta) on a small tensor grid below T"""
    grid = np.meshgrid(np.asarray(times) * T, xis, etas, indexing='ij')
    return np.stack([a.ravel() for a in grid], axis=-1)


def write_experts(path, e):
    with open(path, 'w') as f:
        json.dump(e.to_json(), f)
    return path


def complemented(e):
    """The pair read through the complemented history: state m of the
    result plays as state 2^d - 1 - m of e"""
    return ExpertPair(e.d, e.q[::-1], e.r[::-1])


# q(m) and r(m) depend only on the unordered bits of m: the complemented
# history sees the same experts
palindromic_pair = ExpertPair(2, (0.5, 0.25, 0.25, 0.5),
                              (-0.25, 0.0, 0.0, -0.25))
