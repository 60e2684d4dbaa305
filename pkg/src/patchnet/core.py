"""Petri net data model and untimed firing semantics.

A net is the static structure: places, transitions, and weighted arcs
between them.  State lives in a marking, a plain ``dict`` mapping place id
to a non-negative token count (absent places read as zero).  All operations
here are pure functions; nets and markings are never mutated in place.

Declaration order of places and transitions is the canonical ordering.
Serialization, trace columns, and "first place" defaults all follow it.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

from .errors import IdentifierError, NonQuiescentError, SemanticsError

# Token counts per place; absent keys read as zero.
Marking = dict[str, int]

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def is_identifier(name: str) -> bool:
    """True if ``name`` is usable unescaped in every serialization format."""
    return isinstance(name, str) and _IDENT_RE.match(name) is not None


def _check_identifiers(kind: str, ids: tuple[str, ...]) -> None:
    seen = set()
    for name in ids:
        if not is_identifier(name):
            raise IdentifierError(f"invalid {kind} id {name!r}")
        if name in seen:
            raise IdentifierError(f"duplicate {kind} id {name!r}")
        seen.add(name)


@dataclass(frozen=True)
class PetriNet:
    """Immutable net structure.

    ``input_weights`` maps (place, transition) to the arc weight consumed
    when the transition fires; ``output_weights`` maps (transition, place)
    to the weight produced.  Absent pairs mean "no arc"; stored weights are
    always >= 1.
    """

    places: tuple[str, ...]
    transitions: tuple[str, ...]
    input_weights: Mapping[tuple[str, str], int]
    output_weights: Mapping[tuple[str, str], int]

    def __post_init__(self):
        object.__setattr__(self, "places", tuple(self.places))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        object.__setattr__(self, "input_weights", dict(self.input_weights))
        object.__setattr__(self, "output_weights", dict(self.output_weights))
        _check_identifiers("place", self.places)
        _check_identifiers("transition", self.transitions)
        overlap = set(self.places) & set(self.transitions)
        if overlap:
            raise IdentifierError(
                f"ids used as both place and transition: {sorted(overlap)}")
        place_set = set(self.places)
        transition_set = set(self.transitions)
        for (p, t), w in self.input_weights.items():
            if p not in place_set:
                raise IdentifierError(f"input arc references unknown place {p!r}")
            if t not in transition_set:
                raise IdentifierError(f"input arc references unknown transition {t!r}")
            if not isinstance(w, int) or w < 1:
                raise ValueError(f"input arc weight for ({p!r}, {t!r}) must be >= 1, got {w!r}")
        for (t, p), w in self.output_weights.items():
            if t not in transition_set:
                raise IdentifierError(f"output arc references unknown transition {t!r}")
            if p not in place_set:
                raise IdentifierError(f"output arc references unknown place {p!r}")
            if not isinstance(w, int) or w < 1:
                raise ValueError(f"output arc weight for ({t!r}, {p!r}) must be >= 1, got {w!r}")

    @cached_property
    def _place_index(self) -> dict[str, int]:
        return {p: i for i, p in enumerate(self.places)}

    @cached_property
    def _transition_index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.transitions)}

    @cached_property
    def _inputs(self) -> dict[str, tuple[tuple[str, int], ...]]:
        """Per transition: (place, weight) pairs in canonical place order."""
        by_t: dict[str, list[tuple[str, int]]] = {t: [] for t in self.transitions}
        for (p, t), w in self.input_weights.items():
            by_t[t].append((p, w))
        order = self._place_index
        return {t: tuple(sorted(pairs, key=lambda pw: order[pw[0]]))
                for t, pairs in by_t.items()}

    @cached_property
    def _outputs(self) -> dict[str, tuple[tuple[str, int], ...]]:
        """Per transition: (place, weight) pairs in canonical place order."""
        by_t: dict[str, list[tuple[str, int]]] = {t: [] for t in self.transitions}
        for (t, p), w in self.output_weights.items():
            by_t[t].append((p, w))
        order = self._place_index
        return {t: tuple(sorted(pairs, key=lambda pw: order[pw[0]]))
                for t, pairs in by_t.items()}

    @cached_property
    def _consumers(self) -> dict[str, tuple[str, ...]]:
        """Per place: transitions that consume from it (enabling watchers)."""
        by_p: dict[str, list[str]] = {p: [] for p in self.places}
        for (p, t) in self.input_weights:
            by_p[p].append(t)
        return {p: tuple(ts) for p, ts in by_p.items()}

    def inputs_of(self, t: str) -> tuple[tuple[str, int], ...]:
        """Input (place, weight) pairs of ``t`` in canonical place order."""
        self._require_transition(t)
        return self._inputs[t]

    def outputs_of(self, t: str) -> tuple[tuple[str, int], ...]:
        """Output (place, weight) pairs of ``t`` in canonical place order."""
        self._require_transition(t)
        return self._outputs[t]

    def _require_transition(self, t: str) -> None:
        if t not in self._transition_index:
            raise IdentifierError(f"unknown transition {t!r}")

    def require_places(self, ids) -> None:
        """Raise IdentifierError listing every id that is not a place."""
        unknown = [p for p in ids if p not in self._place_index]
        if unknown:
            raise IdentifierError(f"unknown places: {sorted(unknown)}")


def validate_marking(net: PetriNet, marking: Mapping[str, int]) -> None:
    """Check that a marking only names declared places with counts >= 0."""
    net.require_places(marking.keys())
    for p, n in marking.items():
        if not isinstance(n, int) or n < 0:
            raise ValueError(f"marking of {p!r} must be a non-negative integer, got {n!r}")


def is_enabled(net: PetriNet, marking: Mapping[str, int], t: str) -> bool:
    """True iff every input place of ``t`` holds at least the arc weight.

    A transition with no input places is always enabled.
    """
    net._require_transition(t)
    for p, w in net._inputs[t]:
        if marking.get(p, 0) < w:
            return False
    return True


def fire(net: PetriNet, marking: Mapping[str, int], t: str) -> Marking:
    """Fire ``t`` and return the successor marking; inputs are untouched.

    Raises SemanticsError if ``t`` is not enabled in ``marking``.
    """
    if not is_enabled(net, marking, t):
        raise SemanticsError(f"transition {t!r} is not enabled")
    result = dict(marking)
    for p, w in net._inputs[t]:
        result[p] = result.get(p, 0) - w
    for p, w in net._outputs[t]:
        result[p] = result.get(p, 0) + w
    return result


def enabled_set(net: PetriNet, marking: Mapping[str, int]) -> list[str]:
    """All enabled transitions, in canonical net order."""
    validate_marking(net, marking)
    return [t for t in net.transitions if is_enabled(net, marking, t)]


def run_to_quiescence(net: PetriNet, m0: Mapping[str, int],
                      max_firings: int) -> tuple[Marking, int]:
    """Fire the first enabled transition (canonical order) until none is.

    Returns the final marking and the number of firings.  For monotone nets
    the result is independent of firing order; the fixed rule exists purely
    for reproducibility.  Raises NonQuiescentError (carrying the partial
    marking) if ``max_firings`` is exhausted while work remains.
    """
    if max_firings < 1:
        raise ValueError(f"max_firings must be >= 1, got {max_firings}")
    validate_marking(net, m0)
    marking = dict(m0)
    inputs = net._inputs
    outputs = net._outputs
    consumers = net._consumers
    t_index = net._transition_index

    # Candidate heap keyed by canonical index. Every enabled transition is
    # always present: a transition is (re)queued whenever one of its input
    # places changes count, which is the only way its status can flip.
    heap: list[int] = []
    queued = set()
    for i, t in enumerate(net.transitions):
        if all(marking.get(p, 0) >= w for p, w in inputs[t]):
            heap.append(i)
            queued.add(i)
    heapq.heapify(heap)

    transitions = net.transitions
    count = 0
    while heap:
        i = heapq.heappop(heap)
        queued.discard(i)
        t = transitions[i]
        if not all(marking.get(p, 0) >= w for p, w in inputs[t]):
            continue
        if count >= max_firings:
            raise NonQuiescentError(
                f"{max_firings} firings exhausted with transitions still enabled",
                marking, count)
        touched = []
        for p, w in inputs[t]:
            marking[p] = marking.get(p, 0) - w
            touched.append(p)
        for p, w in outputs[t]:
            marking[p] = marking.get(p, 0) + w
            touched.append(p)
        count += 1
        # The fired transition may still be enabled (e.g. pure self-loops
        # whose net token change is zero), so it is requeued unconditionally.
        if i not in queued:
            heapq.heappush(heap, i)
            queued.add(i)
        for p in touched:
            for watcher in consumers[p]:
                j = t_index[watcher]
                if j not in queued:
                    heapq.heappush(heap, j)
                    queued.add(j)
    return marking, count
