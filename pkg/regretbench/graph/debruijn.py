# De Bruijn state graph on two symbols.
# A state m in [0, 2^d) encodes the last d market moves, oldest move in the
# high bit and most recent move in the low bit (bit 1 <=> b = +1).
from dataclasses import dataclass

import networkx as nx

from regretbench import config
from regretbench.config import logger
from regretbench.errors import DepthExceeded, InvalidWalk, ValidationError


def check_state(m, d):
    if d < 1:
        raise ValidationError(f"history depth must be >= 1, got {d}")
    if not 0 <= m < 2 ** d:
        raise ValidationError(f"state {m} outside [0, {2 ** d}) for d={d}")
    return m


def next_states(m, d):
    """The two successors (m_plus, m_minus) of state m: the state reached
    when the market plays b = +1, resp. b = -1.

    :param m: state id in [0, 2^d)
    :param d: history depth
    """
    check_state(m, d)
    n = 2 ** d
    return (2 * m + 1) % n, (2 * m) % n


def successor(m, b, d):
    m_plus, m_minus = next_states(m, d)
    return m_plus if b > 0 else m_minus


def edge_sign(m, w, d):
    """+1 if w is reached from m by the + edge, -1 for the - edge"""
    m_plus, m_minus = next_states(m, d)
    if w == m_plus:
        return 1
    if w == m_minus:
        return -1
    raise InvalidWalk(f"no edge {m} -> {w} in the d={d} de Bruijn graph")


@dataclass(frozen=True)
class DeBruijnGraph:
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValidationError(f"history depth must be >= 1, got {self.d}")

    @property
    def vertex_count(self):
        return 2 ** self.d

    @property
    def edge_count(self):
        return 2 ** (self.d + 1)

    @property
    def edges(self):
        """(m_plus, m_minus) for every vertex m, indexed by m"""
        return tuple(next_states(m, self.d) for m in range(self.vertex_count))

    def edge_list(self):
        return [(m, w, b)
                for m, pair in enumerate(self.edges)
                for w, b in zip(pair, (1, -1))]

    def to_networkx(self):
        digraph = nx.DiGraph()
        digraph.add_nodes_from(range(self.vertex_count))
        for m, w, b in self.edge_list():
            digraph.add_edge(m, w, sign=b)
        return digraph


@dataclass(frozen=True)
class SimpleCycle:
    """A cycle without repeated vertices, stored in canonical rotation
    (smallest vertex first). signs[i] is the move leaving vertices[i]."""
    vertices: tuple
    signs: tuple
    d: int

    @classmethod
    def from_vertices(cls, vertices, d):
        vertices = tuple(int(v) for v in vertices)
        if not vertices:
            raise InvalidWalk("a cycle needs at least one vertex")
        if len(set(vertices)) != len(vertices):
            raise InvalidWalk(f"repeated vertex in cycle {vertices}")
        start = vertices.index(min(vertices))
        vertices = vertices[start:] + vertices[:start]
        signs = tuple(edge_sign(v, w, d)
                      for v, w in zip(vertices, vertices[1:] + vertices[:1]))
        return cls(vertices, signs, d)

    @property
    def length(self):
        return len(self.vertices)

    @property
    def label(self):
        sep = '' if 2 ** self.d <= 10 else '-'
        return sep.join(str(v) for v in self.vertices + self.vertices[:1])

    def average(self, values):
        """Average of a per-state vector over the vertices of the cycle"""
        return sum(values[v] for v in self.vertices) / self.length

    def sort_key(self):
        return self.length, self.vertices

    def to_json(self):
        return {'vertices': list(self.vertices), 'signs': list(self.signs)}


def enumerate_simple_cycles(g, max_depth=None):
    """All simple cycles of g, one canonical rotation each, ordered by
    length then vertex list (Johnson's algorithm through networkx).

    :param g: a DeBruijnGraph
    :param max_depth: refuse depths above this; defaults to the config bound
    """
    max_depth = config.max_cycle_depth if max_depth is None else max_depth
    if g.d > max_depth:
        raise DepthExceeded(f"cycle enumeration refused for d={g.d}: "
                            f"configured bound is d <= {max_depth}")
    cycles = {SimpleCycle.from_vertices(c, g.d)
              for c in nx.simple_cycles(g.to_networkx())}
    cycles = sorted(cycles, key=SimpleCycle.sort_key)
    logger.info(f"Found {len(cycles)} simple cycles for d={g.d}")
    return cycles


def eulerian_circuit(g, start=0):
    """Closed walk through every edge of g exactly once (Hierholzer).
    Unused edges are taken + edge first, so the circuit is deterministic.

    :param g: a DeBruijnGraph
    :param start: first (and last) vertex of the circuit
    """
    check_state(start, g.d)
    unused = {m: list(pair) for m, pair in enumerate(g.edges)}
    stack, circuit = [start], []
    while stack:
        v = stack[-1]
        if unused[v]:
            stack.append(unused[v].pop(0))
        else:
            circuit.append(stack.pop())
    circuit.reverse()
    return tuple(circuit)


def cycles_to_json(cycles, d):
    return {'d': d,
            'count': len(cycles),
            'cycles': [c.to_json() for c in cycles]}


def cycles_from_json(payload):
    d = payload['d']
    cycles = [SimpleCycle.from_vertices(c['vertices'], d)
              for c in payload['cycles']]
    for c, raw in zip(cycles, payload['cycles']):
        if 'signs' in raw and tuple(raw['signs']) != c.signs:
            raise InvalidWalk(f"signs of cycle {c.label} do not match its "
                              f"vertices")
    return sorted(cycles, key=SimpleCycle.sort_key)
