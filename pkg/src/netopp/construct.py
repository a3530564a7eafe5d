"""Deterministic constructors for the special graphs the analysis needs.

Every constructor audits its own output (degree sequence, girth, component
split) before returning, so a successful return is a verified certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from .core import GraphError, Network

KINDS = ("matching", "complete", "regular", "girth5_regular", "two_component", "path", "cycle", "star")


class GirthRetryError(RuntimeError):
    """Randomized girth-5 search exhausted its retry budget."""

    def __init__(self, attempts: int):
        super().__init__(f"no girth-5 regular graph found after {attempts} attempts")
        self.attempts = attempts


@dataclass(frozen=True)
class ConstructionSpec:
    """Recipe for one special graph.

    kind: one of KINDS.  d is the target degree for regular kinds;
    (d1, d2, lam) describe a two-component split with a d1-regular part of
    roughly lam*n individuals and a d2-regular remainder.
    """

    kind: str
    n: int
    d: int | None = None
    d1: int | None = None
    d2: int | None = None
    lam: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise GraphError(f"unknown construction kind {self.kind!r}; expected one of {KINDS}")
        if self.n < 0:
            raise GraphError(f"n must be nonnegative; got {self.n}")


def girth(net: Network):
    """Length of the shortest cycle, or math.inf for forests.

    BFS from every individual; a non-tree edge seen at depths (du, dv) closes
    a cycle of length du + dv + 1, and the minimum over all roots is exact.
    """
    best = math.inf
    for root in range(net.n):
        depth = {root: 0}
        parent = {root: -1}
        frontier = [root]
        while frontier:
            nxt = []
            for u in frontier:
                for v in net.neighbors(u):
                    if v not in depth:
                        depth[v] = depth[u] + 1
                        parent[v] = u
                        nxt.append(v)
                    elif v != parent[u] and depth[v] >= depth[u]:
                        best = min(best, depth[u] + depth[v] + 1)
            frontier = nxt
            if frontier and 2 * depth[frontier[0]] - 1 >= best:
                break
    return best


def matching_graph(n: int) -> Network:
    """Perfect matching for even n; maximal matching (one isolate) for odd n."""
    edges = [(2 * k, 2 * k + 1) for k in range(n // 2)]
    return Network(n, edges)


def complete_graph(n: int) -> Network:
    return Network(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def path_graph(n: int) -> Network:
    return Network(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Network:
    if n < 3:
        raise GraphError(f"cycle needs n >= 3; got {n}")
    return Network(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(n: int) -> Network:
    if n < 1:
        raise GraphError(f"star needs n >= 1; got {n}")
    return Network(n, [(0, i) for i in range(1, n)])


def circulant_regular(n: int, d: int) -> Network:
    """Deterministic d-regular graph: offsets 1..floor(d/2), plus the antipodal
    chord when d is odd (which requires even n)."""
    if d == 0:
        return Network(n)
    if not (0 < d < n):
        raise GraphError(f"regular graph needs 0 <= d < n; got d={d}, n={n}")
    if (n * d) % 2 != 0:
        raise GraphError(f"regular graph needs n*d even; got n={n}, d={d}")
    edges = set()
    for off in range(1, d // 2 + 1):
        for i in range(n):
            edges.add(tuple(sorted((i, (i + off) % n))))
    if d % 2 == 1:
        half = n // 2
        for i in range(half):
            edges.add((i, i + half))
    net = Network(n, edges)
    if not np.all(net.degrees == d):
        raise GraphError(f"circulant construction failed for n={n}, d={d}")
    return net


def petersen_graph() -> Network:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    return Network(10, outer + inner + spokes)


def disjoint_union(parts: list[Network]) -> Network:
    n = sum(g.n for g in parts)
    edges = []
    off = 0
    for g in parts:
        edges.extend((i + off, j + off) for i, j in g.edges)
        off += g.n
    return Network(n, edges)


def random_regular(n: int, d: int, rng: Generator, max_tries: int = 200) -> Network:
    """Random d-regular graph by the pairing model.

    Colliding stubs (self-loops, repeated pairs) are re-shuffled and re-paired
    rather than restarting from scratch, so feasible (n, d) succeed quickly
    even when a fully simple pairing is rare.
    """
    if d == 0:
        return Network(n)
    if (n * d) % 2 != 0:
        raise GraphError(f"regular graph needs n*d even; got n={n}, d={d}")
    if not (0 <= d < n):
        raise GraphError(f"regular graph needs 0 <= d < n; got d={d}, n={n}")

    def pairable(edges, leftovers) -> bool:
        if not leftovers:
            return True
        nodes = sorted(leftovers)
        return any(
            s1 != s2 and (s1, s2) not in edges for k, s1 in enumerate(nodes) for s2 in nodes[k + 1 :]
        )

    for _ in range(max_tries):
        edges: set = set()
        stubs = list(range(n)) * d
        while stubs:
            shuffled = rng.permutation(np.array(stubs, dtype=np.int64)).tolist()
            leftovers: dict[int, int] = {}
            it = iter(shuffled)
            for s1, s2 in zip(it, it):
                if s1 > s2:
                    s1, s2 = s2, s1
                if s1 != s2 and (s1, s2) not in edges:
                    edges.add((s1, s2))
                else:
                    leftovers[s1] = leftovers.get(s1, 0) + 1
                    leftovers[s2] = leftovers.get(s2, 0) + 1
            if not pairable(edges, leftovers):
                edges = None  # dead end; restart the whole pairing
                break
            stubs = [node for node, count in leftovers.items() for _ in range(count)]
        if edges is not None:
            return Network(n, edges)
    raise GirthRetryError(max_tries)


def _shortest_cycle_edges(net: Network, max_len: int):
    """Some edge lying on a cycle of length <= max_len, or None."""
    for root in range(net.n):
        depth = {root: 0}
        parent = {root: -1}
        frontier = [root]
        while frontier and depth[frontier[0]] < max_len:
            nxt = []
            for u in frontier:
                for v in net.neighbors(u):
                    if v not in depth:
                        depth[v] = depth[u] + 1
                        parent[v] = u
                        nxt.append(v)
                    elif v != parent[u] and depth[u] + depth[v] + 1 <= max_len:
                        return (u, v)
            frontier = nxt
    return None


def _on_short_cycle(net: Network, u: int, v: int, max_len: int) -> bool:
    """True iff edge (u, v) lies on a cycle of length <= max_len, i.e. an
    alternate u-v path of length <= max_len - 1 exists."""
    depth = {u: 0}
    frontier = [u]
    while frontier and depth[frontier[0]] < max_len - 1:
        nxt = []
        for a in frontier:
            for b in net.neighbors(a):
                if a == u and b == v:
                    continue
                if b == v:
                    return True
                if b not in depth:
                    depth[b] = depth[a] + 1
                    nxt.append(b)
        frontier = nxt
    return False


def girth5_regular(n: int, d: int, seed: int = 0, max_attempts: int = 10_000) -> Network:
    """d-regular graph with girth >= 5.

    d <= 1 uses matchings, d = 2 a long cycle, d = 3 disjoint Petersen copies
    (n must be a multiple of 10).  For d >= 4 a random regular graph is
    repaired by degree-preserving edge switches until no 3- or 4-cycle
    remains, within `max_attempts` switches.
    """
    if d == 0:
        return Network(n)
    if d == 1:
        if n % 2 != 0:
            raise GraphError(f"1-regular graph needs even n; got n={n}")
        return matching_graph(n)
    if d == 2:
        if n < 5:
            raise GraphError(f"girth-5 2-regular graph needs n >= 5; got n={n}")
        return cycle_graph(n)
    if d == 3:
        if n % 10 != 0 or n == 0:
            raise GraphError(f"girth-5 3-regular construction uses Petersen copies; n must be a positive multiple of 10, got n={n}")
        return disjoint_union([petersen_graph() for _ in range(n // 10)])
    if n < d * d + 1:
        raise GraphError(f"girth-5 d-regular graph needs n >= d^2+1 = {d * d + 1}; got n={n}")
    if (n * d) % 2 != 0:
        raise GraphError(f"regular graph needs n*d even; got n={n}, d={d}")

    rng = Generator(Philox(key=np.uint64(seed)))
    net = random_regular(n, d, rng)
    attempts = 0
    restarts = 0
    while attempts < max_attempts and restarts <= 100:
        bad = _shortest_cycle_edges(net, 4)
        if bad is None:
            assert girth(net) >= 5
            return net
        attempts += 1
        # switch the offending edge with another edge; degrees are preserved and
        # the switch is accepted only if neither replacement edge lands on a
        # short cycle, so each accepted switch strictly reduces the short-cycle count
        a, b = bad
        edge_list = net.edges
        for _ in range(200):
            c, e = edge_list[int(rng.integers(len(edge_list)))]
            if rng.integers(2):
                c, e = e, c
            if len({a, b, c, e}) < 4 or net.has_edge(a, c) or net.has_edge(b, e):
                continue
            cand = net.with_changes(add=[(a, c), (b, e)], remove=[(a, b), (c, e)])
            if _on_short_cycle(cand, a, c, 4) or _on_short_cycle(cand, b, e, 4):
                continue
            net = cand
            break
        else:
            net = random_regular(n, d, rng)  # descent stalled; fresh start
            restarts += 1
    raise GirthRetryError(attempts)


def two_component_regular(n: int, d1: int, d2: int, lam: float) -> Network:
    """Disjoint d1-regular part of about lam*n individuals plus a d2-regular rest.

    The split point is the largest feasible size <= floor(lam*n) (regularity
    needs each part's n*d even and n > d).
    """
    if not (0.0 <= lam <= 1.0):
        raise GraphError(f"lam must lie in [0, 1]; got {lam}")
    target = int(math.floor(lam * n))
    n1 = None
    for cand in range(target, -1, -1):
        n2 = n - cand
        ok1 = cand == 0 or (cand > d1 and (cand * d1) % 2 == 0 and not (d1 == 2 and cand < 3))
        ok2 = n2 == 0 or (n2 > d2 and (n2 * d2) % 2 == 0 and not (d2 == 2 and n2 < 3))
        if ok1 and ok2:
            n1 = cand
            break
    if n1 is None:
        raise GraphError(f"no feasible split for n={n}, d1={d1}, d2={d2}, lam={lam}")
    parts = []
    if n1 > 0:
        parts.append(circulant_regular(n1, d1))
    if n - n1 > 0:
        parts.append(circulant_regular(n - n1, d2))
    return disjoint_union(parts)


def build(spec: ConstructionSpec) -> Network:
    """Build and audit the graph described by `spec`."""
    k = spec.kind
    if k == "matching":
        net = matching_graph(spec.n)
        assert set(net.degrees.tolist()) <= {0, 1}
        return net
    if k == "complete":
        return complete_graph(spec.n)
    if k == "path":
        return path_graph(spec.n)
    if k == "cycle":
        return cycle_graph(spec.n)
    if k == "star":
        return star_graph(spec.n)
    if k == "regular":
        if spec.d is None:
            raise GraphError("regular construction needs d")
        net = circulant_regular(spec.n, spec.d)
        assert np.all(net.degrees == spec.d)
        return net
    if k == "girth5_regular":
        if spec.d is None:
            raise GraphError("girth5_regular construction needs d")
        net = girth5_regular(spec.n, spec.d, seed=spec.seed)
        if spec.d >= 2 and girth(net) < 5:
            raise GraphError("girth audit failed")
        assert np.all(net.degrees == spec.d)
        return net
    if k == "two_component":
        if spec.d1 is None or spec.d2 is None or spec.lam is None:
            raise GraphError("two_component construction needs d1, d2 and lam")
        return two_component_regular(spec.n, spec.d1, spec.d2, spec.lam)
    raise GraphError(f"unknown construction kind {k!r}")


__all__ = [
    "KINDS",
    "ConstructionSpec",
    "GirthRetryError",
    "girth",
    "matching_graph",
    "complete_graph",
    "path_graph",
    "cycle_graph",
    "star_graph",
    "circulant_regular",
    "petersen_graph",
    "disjoint_union",
    "random_regular",
    "girth5_regular",
    "two_component_regular",
    "build",
]
