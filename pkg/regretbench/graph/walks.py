# Walks on the de Bruijn graph: closing an open walk along the Eulerian
# circuit, and factoring a closed walk into simple cycles.
from collections import Counter
from dataclasses import dataclass

from regretbench.errors import InvalidWalk, NotClosedWalk
from regretbench.graph.debruijn import (SimpleCycle, check_state, edge_sign,
                                        eulerian_circuit)


def validate_walk(walk, g):
    """Return the walk as a tuple after checking every step is an edge"""
    walk = tuple(int(v) for v in walk)
    if not walk:
        raise InvalidWalk("empty walk")
    for v in walk:
        check_state(v, g.d)
    for v, w in zip(walk, walk[1:]):
        edge_sign(v, w, g.d)
    return walk


def is_closed(walk):
    return walk[0] == walk[-1]


def walk_signs(walk, d):
    """The market moves b_k that produce the walk"""
    return tuple(edge_sign(v, w, d) for v, w in zip(walk, walk[1:]))


def extend_to_closed_walk(walk, g):
    """Close an open walk by following the Eulerian circuit from its last
    vertex until its first vertex is reached. The extension has at most
    2^(d+1) steps. Closed walks are returned unchanged.

    :param walk: sequence of states
    :param g: the DeBruijnGraph the walk lives on
    """
    walk = validate_walk(walk, g)
    if is_closed(walk):
        return walk
    circuit = eulerian_circuit(g)[:-1]
    i = circuit.index(walk[-1])
    extension = []
    while not extension or extension[-1] != walk[0]:
        i = (i + 1) % len(circuit)
        extension.append(circuit[i])
    return walk + tuple(extension)


@dataclass(frozen=True)
class CycleInstance:
    """One removal of the factorization: the cycle, the vertex order in
    which the walk went round it, and the walk steps it consumed."""
    cycle: SimpleCycle
    path: tuple
    steps: tuple

    @property
    def start_step(self):
        return self.steps[0]

    @property
    def end_step(self):
        return self.steps[-1]


@dataclass(frozen=True)
class WalkDecomposition:
    instances: tuple
    walk_length: int

    @property
    def cycles(self):
        """(cycle, start-step index) in removal order"""
        return [(inst.cycle, inst.start_step) for inst in self.instances]

    @property
    def multiplicities(self):
        return Counter(inst.cycle for inst in self.instances)

    @property
    def total_length(self):
        return sum(inst.cycle.length for inst in self.instances)

    def is_non_interleaving(self):
        """Each instance of a cycle ends before the next instance starts"""
        by_cycle = {}
        for inst in self.instances:
            by_cycle.setdefault(inst.cycle, []).append(inst)
        for insts in by_cycle.values():
            insts = sorted(insts, key=lambda i: i.start_step)
            for a, b in zip(insts, insts[1:]):
                if a.end_step >= b.start_step:
                    return False
        return True

    def reconstruct(self):
        """Replay the removals and give back the original walk"""
        edges = {}
        for inst in self.instances:
            path = inst.path + inst.path[:1]
            for j, step in enumerate(inst.steps):
                edges[step] = (path[j], path[j + 1])
        if not edges:
            return ()
        return ((edges[0][0],)
                + tuple(edges[k][1] for k in range(self.walk_length)))


def decompose_walk(walk, g):
    """Factor a closed walk into simple cycles by repeatedly cutting out the
    loop closed by the first repeated vertex. Cycles are listed in the order
    they are removed.

    :param walk: closed sequence of states (first == last)
    :param g: the DeBruijnGraph the walk lives on
    """
    walk = validate_walk(walk, g)
    if not is_closed(walk):
        raise NotClosedWalk(f"walk starts at {walk[0]} but ends at "
                            f"{walk[-1]}")
    stack, left_at = [walk[0]], []
    position = {walk[0]: 0}
    instances = []
    for k, v in enumerate(walk[1:], start=1):
        # step k-1 leaves the top of the stack
        left_at.append(k - 1)
        if v in position:
            i = position[v]
            path = tuple(stack[i:])
            cycle = SimpleCycle.from_vertices(path, g.d)
            instances.append(CycleInstance(cycle, path,
                                           tuple(left_at[i:])))
            for w in stack[i + 1:]:
                del position[w]
            del stack[i + 1:]
            del left_at[i:]
        else:
            position[v] = len(stack)
            stack.append(v)
    return WalkDecomposition(tuple(instances), len(walk) - 1)


def random_closed_walk(g, length, rng):
    """A random walk of the given number of moves, closed along the
    Eulerian circuit.

    :param rng: a numpy Generator
    """
    m = int(rng.integers(g.vertex_count))
    walk = [m]
    for b in rng.choice((1, -1), size=length):
        m_plus, m_minus = g.edges[walk[-1]]
        walk.append(m_plus if b > 0 else m_minus)
    return extend_to_closed_walk(walk, g)


def euler_cycle_usage(g):
    """How many times each simple cycle occurs in the factorization of the
    Eulerian circuit"""
    return decompose_walk(eulerian_circuit(g), g).multiplicities
