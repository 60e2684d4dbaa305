"""Shared random generators and independent oracles for the test suite.

The oracles here (BFS flood fill, brute-force aggregation) are written
against different algorithms than the library so agreement is meaningful.
"""

from __future__ import annotations

import random
from collections import deque

from patchnet import Adjacency, NetDocument, PetriNet, Trace


def make_random_net(rng: random.Random, max_places: int = 50,
                    max_transitions: int = 100) -> PetriNet:
    n_places = rng.randint(1, max_places)
    n_transitions = rng.randint(0, max_transitions)
    places = tuple(f"P{i}" for i in range(n_places))
    transitions = tuple(f"t{i}" for i in range(n_transitions))
    input_w = {}
    output_w = {}
    for t in transitions:
        for p in rng.sample(places, k=min(len(places), rng.randint(0, 3))):
            input_w[(p, t)] = rng.randint(1, 3)
        for p in rng.sample(places, k=min(len(places), rng.randint(0, 3))):
            output_w[(t, p)] = rng.randint(1, 3)
    return PetriNet(places, transitions, input_w, output_w)


def make_random_doc(rng: random.Random, max_places: int = 50,
                    max_transitions: int = 100) -> NetDocument:
    net = make_random_net(rng, max_places, max_transitions)
    marking = {p: rng.randint(0, 200) for p in net.places if rng.random() < 0.7}
    rates = {t: rng.choice([0.1, 0.5, 1.0, 2.5, rng.random() + 1e-6])
             for t in net.transitions}
    return NetDocument(net, marking, rates, f"doc{rng.randint(0, 999)}")


def make_random_trace(rng: random.Random) -> Trace:
    places = tuple(f"P{i}" for i in range(rng.randint(1, 12)))
    rows = []
    t = 0.0
    for _ in range(rng.randint(0, 30)):
        rows.append((t, tuple(rng.randint(0, 500) for _ in places)))
        t += rng.random() * 3 + 1e-9
    return Trace(places=places, rows=tuple(rows))


def make_random_adjacency(rng: random.Random, max_nodes: int = 20,
                          edge_prob: float = 0.3) -> Adjacency:
    n = rng.randint(1, max_nodes)
    nodes = tuple(sorted(f"n{i}" for i in range(n)))
    edges = set()
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                edges.add((nodes[i], nodes[j]))
    return Adjacency(nodes, frozenset(edges))


def bfs_component_reach(nodes, edges, seeds) -> set:
    """Flood fill over an undirected edge set from the seed set."""
    neighbors = {n: set() for n in nodes}
    for a, b in edges:
        neighbors[a].add(b)
        neighbors[b].add(a)
    seen = set(seeds)
    queue = deque(seen)
    while queue:
        for other in neighbors[queue.popleft()]:
            if other not in seen:
                seen.add(other)
                queue.append(other)
    return seen


def bfs_lattice_clusters(lat, offsets) -> list[set[int]]:
    """Connected components of occupied cells under the given offsets."""
    n = lat.n
    occupied = lat.occupied
    seen = [False] * (n * n)
    clusters = []
    for start in range(n * n):
        if not occupied[start] or seen[start]:
            continue
        cluster = {start}
        seen[start] = True
        queue = deque([start])
        while queue:
            idx = queue.popleft()
            r, c = divmod(idx, n)
            for dr, dc in offsets:
                r2, c2 = r + dr, c + dc
                j = r2 * n + c2
                if 0 <= r2 < n and 0 <= c2 < n and occupied[j] and not seen[j]:
                    seen[j] = True
                    cluster.add(j)
                    queue.append(j)
        clusters.append(cluster)
    return clusters


MOORE_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))
VON_NEUMANN_OFFSETS = ((-1, 0), (0, -1), (0, 1), (1, 0))
