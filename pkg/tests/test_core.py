import random

import pytest
from hypothesis import given, settings, strategies as st

from patchnet import (IdentifierError, NonQuiescentError, PetriNet,
                      SemanticsError, enabled_set, fire, is_enabled,
                      run_to_quiescence)
from patchnet.templates import assemble_fire
from patchnet.spatial import Adjacency

from helpers import bfs_component_reach, make_random_net


def sir_single_patch() -> PetriNet:
    return PetriNet(
        places=("S", "I", "R"),
        transitions=("infect", "recover"),
        input_weights={("S", "infect"): 1, ("I", "infect"): 1, ("I", "recover"): 1},
        output_weights={("infect", "I"): 2, ("recover", "R"): 1},
    )


# construction ---------------------------------------------------------------

def test_rejects_duplicate_and_shared_ids():
    with pytest.raises(IdentifierError):
        PetriNet(("a", "a"), (), {}, {})
    with pytest.raises(IdentifierError):
        PetriNet(("a",), ("a",), {}, {})
    with pytest.raises(IdentifierError):
        PetriNet(("a",), ("t",), {("b", "t"): 1}, {})
    with pytest.raises(IdentifierError):
        PetriNet(("9bad",), (), {}, {})


def test_rejects_non_positive_weights():
    with pytest.raises(ValueError):
        PetriNet(("a",), ("t",), {("a", "t"): 0}, {})
    with pytest.raises(ValueError):
        PetriNet(("a",), ("t",), {}, {("t", "a"): -1})


# is_enabled -----------------------------------------------------------------

def test_enabled_at_weight_one():
    net = PetriNet(("S",), ("t",), {("S", "t"): 1}, {})
    assert is_enabled(net, {"S": 1}, "t") is True
    assert is_enabled(net, {"S": 0}, "t") is False


def test_enabled_boundary_weight_two():
    net = PetriNet(("P",), ("t",), {("P", "t"): 2}, {})
    assert is_enabled(net, {"P": 2}, "t") is True
    assert is_enabled(net, {"P": 1}, "t") is False


def test_no_input_transition_always_enabled():
    net = PetriNet(("P",), ("t",), {}, {("t", "P"): 1})
    assert is_enabled(net, {}, "t") is True


def test_unknown_transition_named_in_error():
    net = sir_single_patch()
    with pytest.raises(IdentifierError, match="nope"):
        is_enabled(net, {}, "nope")


# fire -----------------------------------------------------------------------

def test_fire_infection_stoichiometry():
    net = sir_single_patch()
    m = {"S": 10, "I": 1, "R": 0}
    assert fire(net, m, "infect") == {"S": 9, "I": 2, "R": 0}
    assert m == {"S": 10, "I": 1, "R": 0}  # input untouched


def test_fire_recovery():
    net = sir_single_patch()
    assert fire(net, {"S": 9, "I": 2, "R": 0}, "recover") == {"S": 9, "I": 1, "R": 1}


def test_fire_self_loop_identity():
    net = PetriNet(("P",), ("t",), {("P", "t"): 1}, {("t", "P"): 1})
    assert fire(net, {"P": 1}, "t") == {"P": 1}


def test_fire_disabled_raises():
    net = sir_single_patch()
    with pytest.raises(SemanticsError):
        fire(net, {"S": 10, "I": 0, "R": 0}, "infect")


# enabled_set ----------------------------------------------------------------

def test_enabled_set_in_canonical_order():
    net = sir_single_patch()
    assert enabled_set(net, {"S": 10, "I": 1, "R": 0}) == ["infect", "recover"]
    assert enabled_set(net, {"S": 10, "I": 0, "R": 0}) == []
    assert enabled_set(net, {"S": 0, "I": 3, "R": 0}) == ["recover"]


def test_enabled_set_rejects_unknown_marking_key():
    with pytest.raises(IdentifierError):
        enabled_set(sir_single_patch(), {"X": 1})


# run_to_quiescence ----------------------------------------------------------

def test_quiescence_drains_chain():
    net = PetriNet(("A", "B"), ("t",), {("A", "t"): 1}, {("t", "B"): 1})
    assert run_to_quiescence(net, {"A": 3, "B": 0}, 100) == ({"A": 0, "B": 3}, 3)


def test_quiescence_nothing_enabled():
    net = sir_single_patch()
    m0 = {"S": 5, "I": 0, "R": 0}
    final, count = run_to_quiescence(net, m0, 10)
    assert final == {"S": 5, "I": 0, "R": 0} and count == 0
    assert m0 == {"S": 5, "I": 0, "R": 0}


def test_quiescence_three_cell_fire_chain():
    adj = Adjacency(("a", "b", "c"), frozenset({("a", "b"), ("b", "c")}))
    net, m0 = assemble_fire(adj, {"a", "b", "c"}, {"a"})
    expected = bfs_component_reach(("a", "b", "c"), {("a", "b"), ("b", "c")}, {"a"})
    final, count = run_to_quiescence(net, m0, 100)
    burning = {p.removeprefix("Fire_") for p, v in final.items()
               if p.startswith("Fire_") and v}
    assert burning == expected == {"a", "b", "c"}
    assert count == 2


def test_quiescence_bound_exhausted_keeps_partial_marking():
    net = PetriNet(("P",), ("t",), {("P", "t"): 1}, {("t", "P"): 1})
    with pytest.raises(NonQuiescentError) as exc:
        run_to_quiescence(net, {"P": 1}, 5)
    assert exc.value.firings == 5
    assert exc.value.marking == {"P": 1}


def test_quiescence_confluence_on_fire_nets():
    # random firing orders reach the same final marking as the fixed rule
    rng = random.Random(99)
    for _ in range(10):
        n = rng.randint(2, 6)
        nodes = tuple(sorted(f"c{i}" for i in range(n)))
        edges = {(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1:]
                 if rng.random() < 0.5}
        adj = Adjacency(nodes, frozenset(edges))
        occupied = {x for x in nodes if rng.random() < 0.8}
        seeds = {x for x in occupied if rng.random() < 0.4}
        net, m0 = assemble_fire(adj, occupied, seeds)
        reference, _ = run_to_quiescence(net, m0, 10_000)
        for trial in range(10):
            order_rng = random.Random(trial)
            m = dict(m0)
            for _step in range(10_000):
                enabled = enabled_set(net, m)
                if not enabled:
                    break
            # random order instead of canonical-first
                m = fire(net, m, order_rng.choice(enabled))
            assert m == reference


# property tests over random nets --------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 9), st.data())
def test_firing_balance_property(seed, data):
    rng = random.Random(seed)
    net = make_random_net(rng, max_places=8, max_transitions=10)
    marking = {p: rng.randint(0, 6) for p in net.places}
    for t in net.transitions:
        if not is_enabled(net, marking, t):
            continue
        after = fire(net, marking, t)
        for p in net.places:
            delta = (dict(net.outputs_of(t)).get(p, 0)
                     - dict(net.inputs_of(t)).get(p, 0))
            assert after.get(p, 0) == marking.get(p, 0) + delta
            assert after.get(p, 0) >= 0


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10), st.integers(0, 10))
def test_enabling_flips_exactly_at_weight(weight, tokens):
    net = PetriNet(("P",), ("t",), {("P", "t"): weight}, {})
    assert is_enabled(net, {"P": tokens}, "t") == (tokens >= weight)
