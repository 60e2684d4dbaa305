import random

import pytest

from patchnet import (FormatError, IdentifierError, ParseError, SchemaError,
                      Trace)
from patchnet.core import PetriNet
from patchnet.formats import (NetDocument, emit_andl, emit_sbml, fmt_number,
                              parse_andl, parse_sbml, read_trace_csv,
                              write_trace_csv)
from patchnet.spatial import Adjacency
from patchnet.templates import SirParams, apply_init, assemble_sir

from helpers import make_random_doc, make_random_trace


def minimal_doc() -> NetDocument:
    net = PetriNet(("P",), (), {}, {})
    return NetDocument(net, {"P": 5}, {}, "m")


def sir_doc() -> NetDocument:
    net, rates = assemble_sir(Adjacency(("p0",), frozenset()), SirParams())
    net, marking = apply_init(net)
    return NetDocument(net, marking, rates, "sir1")


# NetDocument ----------------------------------------------------------------

def test_document_marking_stored_dense():
    doc = NetDocument(PetriNet(("A", "B"), (), {}, {}), {"A": 3}, {}, "d")
    assert doc.marking == {"A": 3, "B": 0}


def test_document_requires_rate_for_every_transition():
    net = PetriNet(("A",), ("t",), {}, {("t", "A"): 1})
    with pytest.raises(IdentifierError):
        NetDocument(net, {}, {}, "d")
    with pytest.raises(ValueError):
        NetDocument(net, {}, {"t": 0.0}, "d")
    with pytest.raises(IdentifierError):
        NetDocument(net, {}, {"t": 1.0, "ghost": 1.0}, "d")


# ANDL -----------------------------------------------------------------------

def test_emit_minimal_document():
    assert emit_andl(minimal_doc()) == "spn [m]\n{\nplaces:\n  P = 5;\ntransitions:\n}\n"


def test_emit_sir_default_init_line():
    text = emit_andl(sir_doc())
    assert "  S_p0 = 100;\n" in text
    assert "  infect_p0 : [S_p0 - 1]&[I_p0 - 1] : [I_p0 + 2] : 0.1;\n" in text


def test_emit_empty_arc_sides():
    net = PetriNet(("A",), ("src", "sink"), {("A", "sink"): 1}, {("src", "A"): 1})
    text = emit_andl(NetDocument(net, {}, {"src": 1.0, "sink": 2.0}, "d"))
    assert "  src : [] : [A + 1] : 1.0;\n" in text
    assert "  sink : [A - 1] : [] : 2.0;\n" in text


def test_andl_round_trip_random_docs():
    rng = random.Random(101)
    for _ in range(300):
        doc = make_random_doc(rng, max_places=20, max_transitions=30)
        assert parse_andl(emit_andl(doc)) == doc


def test_andl_parse_is_whitespace_tolerant():
    text = "spn   [m]\n{\nplaces:\n   P=5 ;\ntransitions:\n}\n"
    assert parse_andl(text) == minimal_doc()


def test_andl_missing_semicolon_reports_position():
    bad = "spn [m]\n{\nplaces:\n  P = 5\ntransitions:\n}\n"
    with pytest.raises(ParseError) as exc:
        parse_andl(bad)
    assert exc.value.line == 5


def test_andl_duplicate_place_names_id():
    bad = "spn [m]\n{\nplaces:\n  P = 5;\n  P = 6;\ntransitions:\n}\n"
    with pytest.raises(IdentifierError, match="P"):
        parse_andl(bad)


def test_andl_unknown_arc_place():
    bad = ("spn [m]\n{\nplaces:\n  P = 5;\ntransitions:\n"
           "  t : [Q - 1] : [] : 1.0;\n}\n")
    with pytest.raises(IdentifierError, match="Q"):
        parse_andl(bad)


def test_andl_wrong_sign_on_input_side():
    bad = ("spn [m]\n{\nplaces:\n  P = 5;\ntransitions:\n"
           "  t : [P + 1] : [] : 1.0;\n}\n")
    with pytest.raises(ParseError):
        parse_andl(bad)


def test_emit_deterministic():
    doc = make_random_doc(random.Random(5))
    assert emit_andl(doc) == emit_andl(doc)


# SBML -----------------------------------------------------------------------

def test_sbml_single_species():
    text = emit_sbml(minimal_doc())
    assert text.count("<species ") == 1
    assert '<species id="P" initialAmount="5" />' in text


def test_sbml_stoichiometry_mapping():
    text = emit_sbml(sir_doc())
    assert '<speciesReference species="S_p0" stoichiometry="1" />' in text
    assert '<speciesReference species="I_p0" stoichiometry="2" />' in text
    assert '<localParameter id="rate" value="0.1" />' in text


def test_sbml_emit_byte_identical():
    doc = make_random_doc(random.Random(6))
    assert emit_sbml(doc) == emit_sbml(doc)


def test_sbml_round_trip_random_docs():
    rng = random.Random(103)
    for _ in range(300):
        doc = make_random_doc(rng, max_places=20, max_transitions=30)
        assert parse_sbml(emit_sbml(doc)) == doc


def test_sbml_species_without_id_is_schema_error():
    text = emit_sbml(minimal_doc()).replace('id="P" ', "")
    with pytest.raises(SchemaError, match="species.*id"):
        parse_sbml(text)


def test_sbml_unknown_element_warns_but_parses():
    doc = sir_doc()
    text = emit_sbml(doc).replace(
        "<listOfSpecies>", "<annotation>meta</annotation>\n    <listOfSpecies>")
    with pytest.warns(UserWarning, match="annotation"):
        assert parse_sbml(text) == doc


def test_sbml_malformed_xml_reports_position():
    with pytest.raises(ParseError):
        parse_sbml("<sbml><model id='x'>")


def test_sbml_missing_rate_parameter():
    text = emit_sbml(sir_doc()).replace('id="rate"', 'id="notrate"')
    with pytest.raises(SchemaError, match="rate"):
        parse_sbml(text)


# trace CSV ------------------------------------------------------------------

def test_trace_csv_empty_trace_is_header_only():
    net = PetriNet(("A", "B"), (), {}, {})
    trace = Trace(places=("A", "B"), rows=())
    assert write_trace_csv(trace, net) == "time,A,B\n"


def test_trace_csv_first_row_matches_default_init():
    doc = sir_doc()
    trace = Trace(places=doc.net.places, rows=((0.0, (100, 0, 0)),))
    text = write_trace_csv(trace, doc.net)
    assert text.splitlines()[1] == "0,100,0,0"


def test_trace_csv_round_trip_random():
    rng = random.Random(107)
    for _ in range(300):
        trace = make_random_trace(rng)
        net = PetriNet(trace.places, (), {}, {})
        assert read_trace_csv(write_trace_csv(trace, net)) == trace


def test_trace_csv_non_increasing_time_rejected():
    with pytest.raises(FormatError, match="row 3"):
        read_trace_csv("time,A\n1,5\n0.5,6\n")


def test_trace_csv_place_order_must_match_net():
    net = PetriNet(("A", "B"), (), {}, {})
    trace = Trace(places=("B", "A"), rows=())
    with pytest.raises(IdentifierError):
        write_trace_csv(trace, net)


def test_fmt_number_shortest_forms():
    assert fmt_number(0.0) == "0"
    assert fmt_number(2.0) == "2"
    assert fmt_number(0.5) == "0.5"
    assert float(fmt_number(1 / 3)) == 1 / 3
