"""Stochastic simulation of net documents (exact direct-method SSA).

Transitions fire as a continuous-time Markov jump process with mass-action
propensities: ``rate * prod(C(tokens(p), weight(p)))`` over input places.
Each step draws the waiting time from an exponential with mean ``1/A``
(A = total propensity), then selects the firing transition with one uniform
draw against the cumulative propensity array in canonical transition order.
Both draws come from the portable RNG, so a (document, config) pair
determines the trace exactly.

Markings are recorded sample-and-hold on a fixed grid: every multiple of
``record_dt`` gets the latest marking at or before that time.  When the
total propensity reaches zero the remaining grid points repeat the frozen
marking; hitting ``max_events`` instead truncates the trace and flags it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .core import PetriNet
from .formats import NetDocument
from .rng import SplitMix64

_TOTAL_REFRESH_EVENTS = 4096  # full propensity-sum refresh cadence


@dataclass(frozen=True)
class SimConfig:
    """Run configuration; ``seed`` fully determines the trajectory."""

    t_end: float
    record_dt: float = 1.0
    seed: int = 0
    max_events: int = 1_000_000

    def __post_init__(self):
        if self.t_end <= 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.record_dt <= 0 or self.record_dt > self.t_end:
            raise ValueError(
                f"record_dt must be in (0, t_end], got {self.record_dt}")
        if not 0 <= self.seed <= 0xFFFFFFFFFFFFFFFF:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.max_events < 1:
            raise ValueError(f"max_events must be >= 1, got {self.max_events}")


@dataclass(frozen=True)
class Trace:
    """Recorded trajectory: (time, token counts in canonical place order).

    ``truncated`` and ``firings`` are run metadata and do not take part in
    equality, so round-tripping through CSV preserves trace identity.
    """

    places: tuple[str, ...]
    rows: tuple[tuple[float, tuple[int, ...]], ...]
    truncated: bool = field(default=False, compare=False)
    firings: tuple[tuple[float, str], ...] | None = field(
        default=None, compare=False, repr=False)

    def __post_init__(self):
        previous = None
        for time, counts in self.rows:
            if time < 0 or (previous is not None and time <= previous):
                raise ValueError("trace times must be strictly increasing")
            previous = time
            if len(counts) != len(self.places):
                raise ValueError("trace row width does not match place count")


def propensity(net: PetriNet, marking: Mapping[str, int], t: str, rate: float) -> float:
    """Mass-action propensity of ``t``; zero when the transition is disabled.

    A transition with no input places has propensity equal to its rate.
    """
    acc = float(rate)
    for p, w in net.inputs_of(t):
        tokens = marking.get(p, 0)
        if tokens < w:
            return 0.0
        acc *= tokens if w == 1 else math.comb(tokens, w)
    return acc


def sample_exponential(rng: SplitMix64, mean: float) -> float:
    """Strictly positive exponential variate drawn from ``rng``."""
    return rng.exponential(mean)


def simulate_ssa(doc: NetDocument, cfg: SimConfig, log_firings: bool = False) -> Trace:
    """Run the direct-method SSA on a document and return its trace.

    With ``log_firings`` the trace also carries the (time, transition)
    event log, which lets callers replay the run through ``core.fire``.
    """
    net = doc.net
    places = net.places
    transitions = net.transitions
    rng = SplitMix64(cfg.seed)
    marking = dict(doc.marking)

    n_t = len(transitions)
    inputs = [net.inputs_of(t) for t in transitions]
    rates = [doc.rates[t] for t in transitions]
    # Net token change per firing, and the propensities it may invalidate.
    deltas: list[list[tuple[str, int]]] = []
    affected: list[tuple[int, ...]] = []
    consumer_index: dict[str, list[int]] = {p: [] for p in places}
    for i, t in enumerate(transitions):
        for p, _w in inputs[i]:
            consumer_index[p].append(i)
    for i, t in enumerate(transitions):
        change: dict[str, int] = {}
        for p, w in inputs[i]:
            change[p] = change.get(p, 0) - w
        for p, w in net.outputs_of(t):
            change[p] = change.get(p, 0) + w
        delta = [(p, d) for p, d in change.items() if d != 0]
        deltas.append(delta)
        touched: set[int] = set()
        for p, _d in delta:
            touched.update(consumer_index[p])
        touched.add(i)
        affected.append(tuple(sorted(touched)))

    def prop_of(i: int) -> float:
        acc = rates[i]
        for p, w in inputs[i]:
            tokens = marking[p]
            if tokens < w:
                return 0.0
            acc *= tokens if w == 1 else math.comb(tokens, w)
        return acc

    props = [prop_of(i) for i in range(n_t)]
    total = math.fsum(props)

    n_grid = math.floor(cfg.t_end / cfg.record_dt + 1e-9)
    rows: list[tuple[float, tuple[int, ...]]] = [
        (0.0, tuple(marking[p] for p in places))]
    next_k = 1

    def fill_remaining() -> None:
        nonlocal next_k
        snapshot = tuple(marking[p] for p in places)
        while next_k <= n_grid:
            rows.append((next_k * cfg.record_dt, snapshot))
            next_k += 1

    firings: list[tuple[float, str]] = []
    t_now = 0.0
    events = 0
    truncated = False
    while True:
        if total <= 0.0:
            fill_remaining()
            break
        if events >= cfg.max_events:
            truncated = True
            break
        t_next = t_now + rng.exponential(1.0 / total)
        if t_next > cfg.t_end:
            fill_remaining()
            break
        while next_k <= n_grid and next_k * cfg.record_dt < t_next:
            rows.append((next_k * cfg.record_dt,
                         tuple(marking[p] for p in places)))
            next_k += 1

        threshold = rng.uniform() * total
        acc = 0.0
        chosen = -1
        for i in range(n_t):
            p_i = props[i]
            if p_i > 0.0:
                acc += p_i
                chosen = i
                if acc > threshold:
                    break
        if chosen < 0:  # stale running total; no transition is really enabled
            total = math.fsum(props)
            continue

        for p, d in deltas[chosen]:
            marking[p] += d
        t_now = t_next
        events += 1
        if log_firings:
            firings.append((t_now, transitions[chosen]))
        for i in affected[chosen]:
            old = props[i]
            new = prop_of(i)
            if new != old:
                props[i] = new
                total += new - old
        if events % _TOTAL_REFRESH_EVENTS == 0:
            total = math.fsum(props)

    return Trace(places=places, rows=tuple(rows), truncated=truncated,
                 firings=tuple(firings) if log_firings else None)
