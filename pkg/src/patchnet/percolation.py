"""Site-percolation instrumentation: lattices, spanning, and thresholds.

A lattice is an n-by-n grid whose cells are independently occupied with
probability p.  ``spans`` answers side-to-side connectivity (left column to
right column) with a union-find oracle; ``percolate_via_net`` answers the
same question by building the fire-spread net over the lattice, running it
to quiescence, and checking whether fire reached the right column.  The two
must agree exactly, which is the headline validation of the net semantics.

``estimate_threshold`` sweeps occupation probabilities, measures spanning
frequency, and reports the density where it crosses one half, the standard
finite-size estimate of the critical density.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import run_to_quiescence
from .errors import NoCrossingError
from .rng import SplitMix64, derive_seed
from .spatial import MOORE, VON_NEUMANN, Patch, PatchGrid, neighbors
from .templates import assemble_fire

ORACLE = "oracle"
NET = "net"

_HALF_OFFSETS = {
    MOORE: ((0, 1), (1, -1), (1, 0), (1, 1)),
    VON_NEUMANN: ((0, 1), (1, 0)),
}


@dataclass(frozen=True)
class Lattice:
    """Square lattice occupancy, row-major; cell (r, c) is index r*n + c."""

    n: int
    occupied: tuple[bool, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"side length must be >= 1, got {self.n}")
        object.__setattr__(self, "occupied", tuple(bool(o) for o in self.occupied))
        if len(self.occupied) != self.n * self.n:
            raise ValueError(
                f"occupancy length {len(self.occupied)} != n*n = {self.n * self.n}")


def sample_occupancy(n: int, p: float, seed: int) -> Lattice:
    """Occupy each cell independently with probability p (portable RNG)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"occupation probability must be in [0, 1], got {p}")
    uniforms = SplitMix64(seed).uniforms(n * n)
    return Lattice(n, tuple(bool(u) for u in (uniforms < p)))


class UnionFind:
    """Disjoint sets over 0..count-1, path compression and union by size."""

    __slots__ = ("parent", "size")

    def __init__(self, count: int):
        self.parent = list(range(count))
        self.size = [1] * count

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def _union_neighbors(uf: UnionFind, lat: Lattice, mode: str) -> None:
    if mode not in _HALF_OFFSETS:
        raise ValueError(f"mode must be one of {sorted(_HALF_OFFSETS)}, got {mode!r}")
    n = lat.n
    occupied = lat.occupied
    offsets = _HALF_OFFSETS[mode]
    for r in range(n):
        base = r * n
        for c in range(n):
            if not occupied[base + c]:
                continue
            for dr, dc in offsets:
                r2, c2 = r + dr, c + dc
                if 0 <= r2 < n and 0 <= c2 < n and occupied[r2 * n + c2]:
                    uf.union(base + c, r2 * n + c2)


def spans(lat: Lattice, mode: str = MOORE) -> bool:
    """True iff occupied cells connect the left column to the right column."""
    n = lat.n
    left, right = n * n, n * n + 1
    uf = UnionFind(n * n + 2)
    _union_neighbors(uf, lat, mode)
    for r in range(n):
        if lat.occupied[r * n]:
            uf.union(left, r * n)
        if lat.occupied[r * n + n - 1]:
            uf.union(right, r * n + n - 1)
    return uf.find(left) == uf.find(right)


def mean_cluster_size(lat: Lattice, mode: str = MOORE) -> float:
    """Size-weighted mean cluster size, sum(s^2)/sum(s); 0 for an empty lattice."""
    uf = UnionFind(lat.n * lat.n)
    _union_neighbors(uf, lat, mode)
    total = 0
    squares = 0
    for i, occ in enumerate(lat.occupied):
        if occ and uf.find(i) == i:
            s = uf.size[i]
            total += s
            squares += s * s
    if total == 0:
        return 0.0
    return squares / total


def lattice_grid(n: int) -> PatchGrid:
    """The full n-by-n unit grid underlying a lattice."""
    patches = tuple(
        Patch(f"p_{r}_{c}", r, c, (c + 0.5, r + 0.5))
        for r in range(n) for c in range(n))
    return PatchGrid(patches, 1.0, (0.0, 0.0))


def percolate_via_net(lat: Lattice, mode: str = MOORE) -> bool:
    """Decide spanning by burning the fire-spread net to quiescence.

    Occupied cells are fuel, the occupied left column is the seed set, and
    the lattice spans iff fire reaches an occupied right-column cell.
    Agrees exactly with :func:`spans`.
    """
    n = lat.n
    adj = neighbors(lattice_grid(n), mode)
    occupied = []
    seeds = []
    targets = []
    for i, occ in enumerate(lat.occupied):
        if not occ:
            continue
        col = i % n
        pid = f"p_{i // n}_{col}"
        occupied.append(pid)
        if col == 0:
            seeds.append(pid)
        if col == n - 1:
            targets.append(pid)
    net, m0 = assemble_fire(adj, occupied, seeds)
    final, _count = run_to_quiescence(net, m0, 8 * n * n)
    return any(final.get(f"Fire_{pid}", 0) > 0 for pid in targets)


@dataclass(frozen=True)
class ThresholdEstimate:
    """Spanning probability per density and the interpolated 0.5 crossing."""

    p_grid: tuple[float, ...]
    spanning_prob: tuple[float, ...]
    p_c_estimate: float
    trials: int
    mean_cluster: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "p_grid", tuple(self.p_grid))
        object.__setattr__(self, "spanning_prob", tuple(self.spanning_prob))
        if len(self.p_grid) != len(self.spanning_prob):
            raise ValueError("p_grid and spanning_prob lengths differ")
        if not self.p_grid[0] <= self.p_c_estimate <= self.p_grid[-1]:
            raise ValueError("p_c estimate outside the probability grid")


def crossing_of_half(p_grid, spanning_prob) -> float:
    """First density where spanning probability reaches one half."""
    for i, prob in enumerate(spanning_prob):
        if prob == 0.5:
            return p_grid[i]
        if i + 1 < len(spanning_prob) and prob < 0.5 < spanning_prob[i + 1]:
            span = spanning_prob[i + 1] - prob
            return p_grid[i] + (0.5 - prob) * (p_grid[i + 1] - p_grid[i]) / span
    raise NoCrossingError(
        "spanning probability never crosses 0.5; widen the probability grid")


def estimate_threshold(n: int, p_grid, trials: int, seed: int,
                       mode: str = MOORE, engine: str = ORACLE,
                       collect_cluster_sizes: bool = False) -> ThresholdEstimate:
    """Measure spanning probability over a density grid and locate p_c.

    Trial (ip, k) uses the seed ``derive_seed(seed, ip * trials + k)``, so
    results do not depend on evaluation order and the two engines see
    identical lattices for identical arguments.
    """
    p_grid = tuple(float(p) for p in p_grid)
    if not p_grid or any(b <= a for a, b in zip(p_grid, p_grid[1:])):
        raise ValueError("p_grid must be non-empty and sorted strictly ascending")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if engine not in (ORACLE, NET):
        raise ValueError(f"engine must be {ORACLE!r} or {NET!r}, got {engine!r}")
    decide = spans if engine == ORACLE else percolate_via_net

    probs = []
    clusters = []
    for ip, p in enumerate(p_grid):
        hits = 0
        cluster_acc = 0.0
        for k in range(trials):
            lat = sample_occupancy(n, p, derive_seed(seed, ip * trials + k))
            if decide(lat, mode):
                hits += 1
            if collect_cluster_sizes:
                cluster_acc += mean_cluster_size(lat, mode)
        probs.append(hits / trials)
        if collect_cluster_sizes:
            clusters.append(cluster_acc / trials)
    p_c = crossing_of_half(p_grid, probs)
    return ThresholdEstimate(p_grid, tuple(probs), p_c, trials,
                             tuple(clusters) if collect_cluster_sizes else None)
