# The two history-dependent experts q and r.
# Each expert bids a value in (-1, 1) as a function of the current state m.
import json
import math
from dataclasses import dataclass

import numpy as np

from regretbench import config
from regretbench.config import logger
from regretbench.errors import BoundViolation, ConfigError, IdenticalExperts


def _depth_of(values):
    n = len(values)
    d = int(round(math.log2(n))) if n > 0 else 0
    if n < 2 or 2 ** d != n:
        raise ConfigError(f"expert maps need 2^d entries with d >= 1, "
                          f"got {n}")
    return d


@dataclass(frozen=True)
class ExpertPair:
    d: int
    q: tuple
    r: tuple

    def __post_init__(self):
        for name, values in (('q', self.q), ('r', self.r)):
            if len(values) != 2 ** self.d:
                raise ConfigError(f"{name} has {len(values)} entries, "
                                  f"expected 2^{self.d} = {2 ** self.d}")
            for m, v in enumerate(values):
                if not math.isfinite(v) or abs(v) >= 1:
                    raise BoundViolation(
                        f"|{name}(m)| < 1 required for every state; "
                        f"{name}[{m}] = {v}")
        if all(a == b for a, b in zip(self.q, self.r)):
            raise IdenticalExperts(
                "q(m) != r(m) required for at least one state m; "
                "the experts agree everywhere")

    @property
    def state_count(self):
        return 2 ** self.d

    @property
    def gamma(self):
        """gamma_m = (q(m) - r(m))^2 as a numpy vector"""
        return self.spreads ** 2

    @property
    def spreads(self):
        return np.asarray(self.q) - np.asarray(self.r)

    @property
    def drifts(self):
        return np.asarray(self.q) + np.asarray(self.r)

    def spread(self, m):
        """q(m) - r(m): the xi increment per unit market move"""
        return self.q[m] - self.r[m]

    def drift(self, m):
        """q(m) + r(m): the eta increment per unit move, before the bid"""
        return self.q[m] + self.r[m]

    def swapped(self):
        return ExpertPair(self.d, self.r, self.q)

    def negated(self):
        return ExpertPair(self.d,
                          tuple(-v for v in self.q),
                          tuple(-v for v in self.r))

    def scaled(self, lam):
        """A pair whose gamma is lam * gamma (scales both bids by sqrt(lam))"""
        s = math.sqrt(lam)
        return ExpertPair(self.d,
                          tuple(s * v for v in self.q),
                          tuple(s * v for v in self.r))

    def to_json(self):
        return {'d': self.d, 'q': list(self.q), 'r': list(self.r)}

    @classmethod
    def from_json(cls, payload):
        try:
            return validate(payload['q'], payload['r'], payload.get('d'))
        except (KeyError, TypeError) as e:
            raise ConfigError(f"expert JSON needs d, q and r: {e}") from e


def validate(q, r, d=None):
    """Check the experts' admissibility and freeze them.

    :param q: 2^d bids of the first expert, indexed by state id
    :param r: 2^d bids of the second expert
    :param d: history depth; inferred from len(q) when None
    """
    q = tuple(float(v) for v in q)
    r = tuple(float(v) for v in r)
    inferred = _depth_of(q)
    if d is not None and d != inferred:
        raise ConfigError(f"d={d} but q has {len(q)} entries")
    return ExpertPair(inferred, q, r)


def gamma(e):
    return e.gamma


def random_pair(d, seed, bound=None):
    """Experts drawn uniformly in (-bound, bound), deterministic per seed.

    :param d: history depth
    :param seed: integer seed of the numpy generator
    :param bound: margin bound in (0, 1)
    """
    bound = config.random_expert_bound if bound is None else bound
    if not 0 < bound < 1:
        raise ConfigError(f"random expert bound must lie in (0, 1), "
                          f"got {bound}")
    rng = np.random.default_rng(seed)
    while True:
        q = rng.uniform(-bound, bound, size=2 ** d)
        r = rng.uniform(-bound, bound, size=2 ** d)
        if np.any(q != r):
            return ExpertPair(d, tuple(q.tolist()), tuple(r.tolist()))


def load_experts(path):
    try:
        with open(path, 'r') as f:
            payload = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read experts file {path}: {e}") from e
    e = ExpertPair.from_json(payload)
    logger.info(f"Loaded experts with d={e.d} from {path}")
    return e
