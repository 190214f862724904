# The scaled game: N = (T - t0) / eps^2 rounds. At round k in state m the
# investor bids f, the market answers b = +-1, and
#     xi  <- xi  + eps b (q(m) - r(m))
#     eta <- eta + eps b (q(m) + r(m) - 2 f)
#     m   <- m_b
# where xi = x1 - x2 and eta = x1 + x2 for the regrets x1, x2 with respect to
# the experts q and r.
from collections import namedtuple
from dataclasses import dataclass, field
from fractions import Fraction

from regretbench.errors import ConfigError
from regretbench.experts import ExpertPair
from regretbench.graph.debruijn import successor
from regretbench.pde.finaldata import ClassicData, FinalData
from regretbench.utils import parse_fraction

Step = namedtuple('Step', ['k', 't', 'm', 'xi', 'eta', 'f', 'b', 'clamped'])


@dataclass(frozen=True)
class RegretPoint:
    xi: float = 0.0
    eta: float = 0.0

    @property
    def x1(self):
        """Regret with respect to expert q"""
        return (self.eta + self.xi) / 2

    @property
    def x2(self):
        return (self.eta - self.xi) / 2

    @classmethod
    def from_regrets(cls, x1, x2):
        return cls(x1 - x2, x1 + x2)

    def classic_value(self):
        """max(x1, x2) = (eta + |xi|) / 2"""
        return max(self.x1, self.x2)


@dataclass(frozen=True, eq=False)
class GameConfig:
    experts: ExpertPair
    epsilon: Fraction
    T: Fraction = Fraction(1)
    t0: Fraction = Fraction(0)
    final: FinalData = field(default_factory=ClassicData)

    def __post_init__(self):
        eps = parse_fraction(self.epsilon)
        T, t0 = parse_fraction(self.T), parse_fraction(self.t0)
        if eps <= 0:
            raise ConfigError(f"epsilon must be > 0, got {eps}")
        if T < t0:
            raise ConfigError(f"start time {t0} after final time {T}")
        N = (T - t0) / eps ** 2
        if N.denominator != 1:
            raise ConfigError(f"N = (T - t0) / eps^2 = {N} must be an "
                              f"integer")
        object.__setattr__(self, 'epsilon', eps)
        object.__setattr__(self, 'T', T)
        object.__setattr__(self, 't0', t0)

    @property
    def N(self):
        return int((self.T - self.t0) / self.epsilon ** 2)

    @property
    def eps(self):
        return float(self.epsilon)

    @property
    def d(self):
        return self.experts.d

    def time(self, k):
        return float(self.t0 + k * self.epsilon ** 2)

    def with_epsilon(self, epsilon):
        return GameConfig(self.experts, epsilon, self.T, self.t0, self.final)

    def to_json(self):
        return {'experts': self.experts.to_json(),
                'epsilon': str(self.epsilon),
                'T': str(self.T),
                't0': str(self.t0),
                'N': self.N,
                'final': self.final.name}


def advance(e, eps, m, xi, eta, f, b):
    """State after the market answers b to the bid f"""
    return (successor(m, b, e.d),
            xi + eps * b * e.spread(m),
            eta + eps * b * (e.drift(m) - 2 * f))


def game_config(experts, epsilon, T=1, t0=0, final=None):
    """GameConfig from loose values; epsilon, T and t0 may be strings such
    as "1/64"."""
    return GameConfig(experts, parse_fraction(epsilon), parse_fraction(T),
                      parse_fraction(t0), final or ClassicData())
