"""Multi-patch model templates instantiated over an adjacency.

Two templates are provided.  The SIR template gives every patch its own
susceptible/infected/recovered compartments with local infection and
recovery, plus a pair of cross-infection transitions per neighbor edge
(the infecting population acts as a conserved catalyst, so total token
count is invariant).  The fire template models site percolation: occupied
patches carry one tree that is alive or burning, and fire spreads
deterministically between occupied neighbors.

Initialization follows fixed defaults: token counts default to zero, arc
weights default to one, and when no init spec is given the net starts with
100 tokens in its first place.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .core import Marking, PetriNet
from .errors import IdentifierError, ParseError
from .spatial import Adjacency

DEFAULT_FIRST_PLACE_TOKENS = 100

SIR_RATE_NAMES = ("infect", "recover", "cross_infect")


@dataclass(frozen=True)
class SirParams:
    """Default SIR rates with optional per-patch overrides.

    ``overrides`` maps patch id to a partial map over rate names
    ("infect", "recover", "cross_infect"), typically produced by
    ``layers.derive_rates``.  Cross-infection transitions take the rate of
    the patch being infected.
    """

    infect: float = 0.1
    recover: float = 0.05
    cross_infect: float = 0.01
    overrides: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        for name in SIR_RATE_NAMES:
            if getattr(self, name) <= 0:
                raise ValueError(f"rate {name} must be positive")
        for pid, per_patch in self.overrides.items():
            for name, value in per_patch.items():
                if name not in SIR_RATE_NAMES:
                    raise IdentifierError(
                        f"override for patch {pid!r} names unknown rate {name!r}")
                if value <= 0:
                    raise ValueError(f"override {name} for patch {pid!r} must be positive")

    def rate(self, name: str, patch: str) -> float:
        per_patch = self.overrides.get(patch, {})
        return float(per_patch.get(name, getattr(self, name)))


def assemble_sir(adj: Adjacency, params: SirParams) -> tuple[PetriNet, dict[str, float]]:
    """Build the multi-patch SIR net and its transition rate map.

    Per patch i (sorted by id): places S_i, I_i, R_i, transitions
    infect_i (S_i + I_i -> 2 I_i) and recover_i (I_i -> R_i).  Per edge
    {i, j}: cross_i_j (S_i + I_j -> I_i + I_j) and the mirror cross_j_i.
    Place count is 3k, transition count 2k + 2|edges|.
    """
    if not adj.nodes:
        raise ValueError("adjacency has no nodes")
    patches = sorted(adj.nodes)
    unknown = [p for p in params.overrides if p not in set(patches)]
    if unknown:
        raise IdentifierError(f"rate overrides for unknown patches: {sorted(unknown)}")

    places: list[str] = []
    transitions: list[str] = []
    input_w: dict[tuple[str, str], int] = {}
    output_w: dict[tuple[str, str], int] = {}
    rates: dict[str, float] = {}

    for pid in patches:
        s, i, r = f"S_{pid}", f"I_{pid}", f"R_{pid}"
        places += [s, i, r]
        infect, recover = f"infect_{pid}", f"recover_{pid}"
        transitions += [infect, recover]
        input_w[(s, infect)] = 1
        input_w[(i, infect)] = 1
        output_w[(infect, i)] = 2
        input_w[(i, recover)] = 1
        output_w[(recover, r)] = 1
        rates[infect] = params.rate("infect", pid)
        rates[recover] = params.rate("recover", pid)

    for a, b in sorted(adj.edges):
        for dst, src in ((a, b), (b, a)):
            name = f"cross_{dst}_{src}"
            transitions.append(name)
            input_w[(f"S_{dst}", name)] = 1
            input_w[(f"I_{src}", name)] = 1
            output_w[(name, f"I_{dst}")] = 1
            output_w[(name, f"I_{src}")] = 1
            rates[name] = params.rate("cross_infect", dst)

    net = PetriNet(tuple(places), tuple(transitions), input_w, output_w)
    return net, rates


def assemble_fire(adj: Adjacency, occupied: Iterable[str],
                  seeds: Iterable[str]) -> tuple[PetriNet, Marking]:
    """Build the fire-spread net over occupied patches and its initial marking.

    Occupied patch i gets places Alive_i and Fire_i; each edge between
    occupied patches gets spread_i_j (Fire_i + Alive_j -> Fire_i + Fire_j)
    and the mirror.  Seeds start burning, other occupied patches alive;
    unoccupied patches contribute nothing.
    """
    occupied = set(occupied)
    seeds = set(seeds)
    node_set = set(adj.nodes)
    stray = occupied - node_set
    if stray:
        raise IdentifierError(f"occupied patches not in adjacency: {sorted(stray)}")
    unseeded = seeds - occupied
    if unseeded:
        raise ValueError(f"seeds must be occupied: {sorted(unseeded)}")

    patches = sorted(occupied)
    places: list[str] = []
    for pid in patches:
        places += [f"Alive_{pid}", f"Fire_{pid}"]

    transitions: list[str] = []
    input_w: dict[tuple[str, str], int] = {}
    output_w: dict[tuple[str, str], int] = {}
    for a, b in sorted(adj.edges):
        if a not in occupied or b not in occupied:
            continue
        for src, dst in ((a, b), (b, a)):
            name = f"spread_{src}_{dst}"
            transitions.append(name)
            input_w[(f"Fire_{src}", name)] = 1
            input_w[(f"Alive_{dst}", name)] = 1
            output_w[(name, f"Fire_{src}")] = 1
            output_w[(name, f"Fire_{dst}")] = 1

    marking = {place: 0 for place in places}
    for pid in patches:
        marking[f"Fire_{pid}" if pid in seeds else f"Alive_{pid}"] = 1
    net = PetriNet(tuple(places), tuple(transitions), input_w, output_w)
    return net, marking


@dataclass(frozen=True)
class InitSpec:
    """Explicit initial tokens and arc-weight overrides.

    ``arc_weights`` is keyed by (place, transition, direction) with
    direction "in" (place -> transition) or "out" (transition -> place).
    """

    place_tokens: Mapping[str, int] = field(default_factory=dict)
    arc_weights: Mapping[tuple[str, str, str], int] = field(default_factory=dict)

    def __post_init__(self):
        for pid, tokens in self.place_tokens.items():
            if not isinstance(tokens, int) or tokens < 0:
                raise ValueError(f"tokens for {pid!r} must be a non-negative integer")
        for (p, t, direction), w in self.arc_weights.items():
            if direction not in ("in", "out"):
                raise ValueError(f"arc direction must be 'in' or 'out', got {direction!r}")
            if not isinstance(w, int) or w < 1:
                raise ValueError(f"arc weight for ({p!r}, {t!r}) must be >= 1")


def apply_init(net: PetriNet, spec: InitSpec | None = None) -> tuple[PetriNet, Marking]:
    """Apply an init spec (or the no-spec defaults) to a templated net.

    With a spec: the marking is the place overrides over an all-zero
    baseline and arc overrides replace (or add) individual weights.
    Without one: 100 tokens in the net's first place, everything else
    zero, weights untouched.
    """
    if spec is None:
        marking = {p: 0 for p in net.places}
        if net.places:
            marking[net.places[0]] = DEFAULT_FIRST_PLACE_TOKENS
        return net, marking

    bad = [p for p in spec.place_tokens if p not in set(net.places)]
    place_set = set(net.places)
    transition_set = set(net.transitions)
    for (p, t, _direction) in spec.arc_weights:
        if p not in place_set:
            bad.append(p)
        if t not in transition_set:
            bad.append(t)
    if bad:
        raise IdentifierError(f"init spec references unknown ids: {sorted(set(bad))}")

    marking = {p: 0 for p in net.places}
    marking.update(spec.place_tokens)
    if not spec.arc_weights:
        return net, marking
    input_w = dict(net.input_weights)
    output_w = dict(net.output_weights)
    for (p, t, direction), w in spec.arc_weights.items():
        if direction == "in":
            input_w[(p, t)] = w
        else:
            output_w[(t, p)] = w
    return PetriNet(net.places, net.transitions, input_w, output_w), marking


def parse_init_csv(text: str) -> InitSpec:
    """Parse the init CSV: header ``kind,id,value``.

    ``kind`` is place, arc_in, or arc_out; arc rows name the arc as
    ``place:transition``.  Errors carry the physical row number.
    """
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["kind", "id", "value"]:
        raise ParseError("init CSV must start with header 'kind,id,value'", line=1)
    place_tokens: dict[str, int] = {}
    arc_weights: dict[tuple[str, str, str], int] = {}
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, got {len(row)}", line=line_no)
        kind, ident, value_s = (c.strip() for c in row)
        try:
            value = int(value_s)
        except ValueError as exc:
            raise ParseError(f"value {value_s!r} is not an integer", line=line_no) from exc
        if kind == "place":
            if value < 0:
                raise ParseError(f"token count must be >= 0, got {value}", line=line_no)
            place_tokens[ident] = value
        elif kind in ("arc_in", "arc_out"):
            if ":" not in ident:
                raise ParseError(
                    f"arc id {ident!r} must look like place:transition", line=line_no)
            place, transition = (part.strip() for part in ident.split(":", 1))
            if value < 1:
                raise ParseError(f"arc weight must be >= 1, got {value}", line=line_no)
            arc_weights[(place, transition, kind.removeprefix("arc_"))] = value
        else:
            raise ParseError(f"unknown kind {kind!r}", line=line_no)
    return InitSpec(place_tokens, arc_weights)
