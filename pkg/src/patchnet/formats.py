"""Serialization of net documents: ANDL text, SBML XML, and trace CSV.

A :class:`NetDocument` bundles a net with its initial marking, per-transition
rates, and a name.  Emission is byte-stable (equal documents give identical
text) and each emitter has a parser that is its exact inverse on the emitted
subset, so documents survive a round trip structurally unchanged.

The ANDL dialect written here is a small, fully specified subset in the
spirit of the Spike tool's net description language:

    spn [<name>]
    {
    places:
      <id> = <tokens>;
    transitions:
      <id> : [<p> - <w>]&... : [<p> + <w>]&... : <rate>;
    }

Empty arc sides are written ``[]``.  The SBML dialect is an equally small
level-3/version-1 subset: species with ``initialAmount``, reactions with
reactant/product ``speciesReference`` stoichiometries, and the rate kept as
a local parameter named ``rate`` (no compartments, units, or MathML).
"""

from __future__ import annotations

import warnings
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Mapping, TYPE_CHECKING

from .core import Marking, PetriNet, is_identifier, validate_marking
from .errors import (FormatError, IdentifierError, ParseError, SchemaError)

if TYPE_CHECKING:  # pragma: no cover - import cycle guard, sim imports formats
    from .sim import Trace

SBML_NS = "http://www.sbml.org/sbml/level3/version1/core"


@dataclass(frozen=True)
class NetDocument:
    """A net plus everything needed to simulate or serialize it.

    The marking is stored densely (one entry per place, zeros explicit) so
    structural equality is well defined after round trips.
    """

    net: PetriNet
    marking: Marking
    rates: Mapping[str, float]
    name: str = "net"

    def __post_init__(self):
        if not is_identifier(self.name):
            raise IdentifierError(f"document name {self.name!r} is not a valid identifier")
        validate_marking(self.net, self.marking)
        object.__setattr__(
            self, "marking", {p: self.marking.get(p, 0) for p in self.net.places})
        rates = {t: float(r) for t, r in self.rates.items()}
        missing = [t for t in self.net.transitions if t not in rates]
        if missing:
            raise IdentifierError(f"rates missing for transitions: {missing}")
        unknown = [t for t in rates if t not in set(self.net.transitions)]
        if unknown:
            raise IdentifierError(f"rates given for unknown transitions: {sorted(unknown)}")
        for t, r in rates.items():
            if not 0.0 < r < float("inf"):
                raise ValueError(f"rate for {t!r} must be positive and finite, got {r}")
        object.__setattr__(self, "rates", rates)


def fmt_number(value: float) -> str:
    """Shortest decimal that round-trips; integral values drop the point."""
    if value == int(value):
        return str(int(value))
    return repr(value)


# ---------------------------------------------------------------------------
# ANDL


def emit_andl(doc: NetDocument) -> str:
    lines = [f"spn [{doc.name}]", "{", "places:"]
    for p in doc.net.places:
        lines.append(f"  {p} = {doc.marking[p]};")
    lines.append("transitions:")
    for t in doc.net.transitions:
        ins = "&".join(f"[{p} - {w}]" for p, w in doc.net.inputs_of(t)) or "[]"
        outs = "&".join(f"[{p} + {w}]" for p, w in doc.net.outputs_of(t)) or "[]"
        lines.append(f"  {t} : {ins} : {outs} : {doc.rates[t]!r};")
    lines.append("}")
    return "\n".join(lines) + "\n"


class _Token:
    __slots__ = ("kind", "value", "line", "col")

    def __init__(self, kind, value, line, col):
        self.kind = kind
        self.value = value
        self.line = line
        self.col = col


def _lex_andl(text: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        start_col = col
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and (text[j].isdigit() or text[j] in ".eE"
                             or (text[j] in "+-" and text[j - 1] in "eE")):
                j += 1
            word = text[i:j]
            kind = "int" if word.isdigit() else "number"
            tokens.append(_Token(kind, word, line, start_col))
            col += j - i
            i = j
            continue
        if ch in "[]{}=;:&+-":
            tokens.append(_Token(ch, ch, line, start_col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line=line, column=col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _AndlParser:
    def __init__(self, text: str):
        self.tokens = _lex_andl(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self, kind: str, value=None) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != kind or (value is not None and tok.value != value):
            want = value if value is not None else kind
            raise ParseError(f"expected {want!r}, found {tok.value!r}",
                             line=tok.line, column=tok.col)
        self.pos += 1
        return tok

    def take_keyword(self, word: str) -> None:
        tok = self.take("ident")
        if tok.value != word:
            raise ParseError(f"expected {word!r}, found {tok.value!r}",
                             line=tok.line, column=tok.col)

    def parse(self) -> NetDocument:
        self.take_keyword("spn")
        self.take("[")
        name = self.take("ident").value
        self.take("]")
        self.take("{")
        self.take_keyword("places")
        self.take(":")

        places: list[str] = []
        marking: dict[str, int] = {}
        while self.peek().kind == "ident" and self.peek().value != "transitions":
            tok = self.take("ident")
            if tok.value in marking:
                raise IdentifierError(
                    f"duplicate place {tok.value!r} on line {tok.line}")
            self.take("=")
            count = int(self.take("int").value)
            self.take(";")
            places.append(tok.value)
            marking[tok.value] = count

        self.take_keyword("transitions")
        self.take(":")
        place_set = set(places)
        transitions: list[str] = []
        input_w: dict[tuple[str, str], int] = {}
        output_w: dict[tuple[str, str], int] = {}
        rates: dict[str, float] = {}
        while self.peek().kind == "ident":
            tok = self.take("ident")
            t = tok.value
            if t in rates:
                raise IdentifierError(f"duplicate transition {t!r} on line {tok.line}")
            self.take(":")
            for p, w in self.parse_side("-", place_set):
                input_w[(p, t)] = w
            self.take(":")
            for p, w in self.parse_side("+", place_set):
                output_w[(t, p)] = w
            self.take(":")
            rate_tok = self.peek()
            if rate_tok.kind not in ("int", "number"):
                raise ParseError(f"expected a rate, found {rate_tok.value!r}",
                                 line=rate_tok.line, column=rate_tok.col)
            self.pos += 1
            self.take(";")
            transitions.append(t)
            try:
                rates[t] = float(rate_tok.value)
            except ValueError:
                raise ParseError(f"bad rate literal {rate_tok.value!r}",
                                 line=rate_tok.line, column=rate_tok.col) from None

        self.take("}")
        self.take("eof")
        net = PetriNet(tuple(places), tuple(transitions), input_w, output_w)
        return NetDocument(net, marking, rates, name)

    def parse_side(self, sign: str, place_set: set[str]) -> list[tuple[str, int]]:
        terms: list[tuple[str, int]] = []
        seen = set()
        while True:
            self.take("[")
            if self.peek().kind == "]" and not terms:
                self.take("]")
                return terms  # empty side: "[]"
            tok = self.take("ident")
            if tok.value not in place_set:
                raise IdentifierError(
                    f"arc references unknown place {tok.value!r} on line {tok.line}")
            if tok.value in seen:
                raise IdentifierError(
                    f"duplicate arc place {tok.value!r} on line {tok.line}")
            seen.add(tok.value)
            self.take(sign)
            weight = int(self.take("int").value)
            if weight < 1:
                raise ParseError(f"arc weight must be >= 1, got {weight}",
                                 line=tok.line, column=tok.col)
            self.take("]")
            terms.append((tok.value, weight))
            if self.peek().kind != "&":
                return terms
            self.take("&")


def parse_andl(text: str) -> NetDocument:
    """Inverse of :func:`emit_andl` on its output; tolerant of extra whitespace."""
    return _AndlParser(text).parse()


# ---------------------------------------------------------------------------
# SBML


def emit_sbml(doc: NetDocument) -> str:
    root = ET.Element("sbml", {"xmlns": SBML_NS, "level": "3", "version": "1"})
    model = ET.SubElement(root, "model", {"id": doc.name})
    if doc.net.places:
        species_list = ET.SubElement(model, "listOfSpecies")
        for p in doc.net.places:
            ET.SubElement(species_list, "species",
                          {"id": p, "initialAmount": str(doc.marking[p])})
    if doc.net.transitions:
        reactions = ET.SubElement(model, "listOfReactions")
        for t in doc.net.transitions:
            reaction = ET.SubElement(reactions, "reaction", {"id": t})
            inputs = doc.net.inputs_of(t)
            outputs = doc.net.outputs_of(t)
            if inputs:
                reactants = ET.SubElement(reaction, "listOfReactants")
                for p, w in inputs:
                    ET.SubElement(reactants, "speciesReference",
                                  {"species": p, "stoichiometry": str(w)})
            if outputs:
                products = ET.SubElement(reaction, "listOfProducts")
                for p, w in outputs:
                    ET.SubElement(products, "speciesReference",
                                  {"species": p, "stoichiometry": str(w)})
            law = ET.SubElement(reaction, "kineticLaw")
            params = ET.SubElement(law, "listOfLocalParameters")
            ET.SubElement(params, "localParameter",
                          {"id": "rate", "value": repr(doc.rates[t])})
    ET.indent(root, space="  ")
    body = ET.tostring(root, encoding="unicode")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n"


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _attr(elem: ET.Element, name: str) -> str:
    value = elem.get(name)
    if value is None:
        raise SchemaError(f"element {_local(elem.tag)!r} is missing attribute {name!r}")
    return value


def _children(elem: ET.Element, known: tuple[str, ...]) -> dict[str, list[ET.Element]]:
    found: dict[str, list[ET.Element]] = {k: [] for k in known}
    for child in elem:
        tag = _local(child.tag)
        if tag in found:
            found[tag].append(child)
        else:
            warnings.warn(f"ignoring unknown element {tag!r} inside {_local(elem.tag)!r}")
    return found


def _int_attr(elem: ET.Element, name: str, minimum: int) -> int:
    raw = _attr(elem, name)
    try:
        value = int(raw)
    except ValueError as exc:
        raise SchemaError(f"attribute {name!r} must be an integer, got {raw!r}") from exc
    if value < minimum:
        raise SchemaError(f"attribute {name!r} must be >= {minimum}, got {value}")
    return value


def parse_sbml(text: str) -> NetDocument:
    """Inverse of :func:`emit_sbml`; unknown elements are ignored with a warning."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, col = exc.position
        raise ParseError(f"malformed XML: {exc.msg.split(':')[0]}",
                         line=line, column=col) from exc
    if _local(root.tag) != "sbml":
        raise FormatError(f"root element must be 'sbml', got {_local(root.tag)!r}")
    models = _children(root, ("model",))["model"]
    if not models:
        raise SchemaError("element 'sbml' is missing a 'model' child")
    model = models[0]
    name = _attr(model, "id")

    sections = _children(model, ("listOfSpecies", "listOfReactions"))
    places: list[str] = []
    marking: dict[str, int] = {}
    for lst in sections["listOfSpecies"]:
        for species in _children(lst, ("species",))["species"]:
            pid = _attr(species, "id")
            if pid in marking:
                raise IdentifierError(f"duplicate species {pid!r}")
            places.append(pid)
            marking[pid] = _int_attr(species, "initialAmount", 0)

    place_set = set(places)
    transitions: list[str] = []
    rates: dict[str, float] = {}
    input_w: dict[tuple[str, str], int] = {}
    output_w: dict[tuple[str, str], int] = {}
    for lst in sections["listOfReactions"]:
        for reaction in _children(lst, ("reaction",))["reaction"]:
            t = _attr(reaction, "id")
            if t in rates:
                raise IdentifierError(f"duplicate reaction {t!r}")
            parts = _children(reaction,
                              ("listOfReactants", "listOfProducts", "kineticLaw"))
            for side, weights, key in (
                    ("listOfReactants", input_w, lambda p: (p, t)),
                    ("listOfProducts", output_w, lambda p: (t, p))):
                for elem in parts[side]:
                    for ref in _children(elem, ("speciesReference",))["speciesReference"]:
                        p = _attr(ref, "species")
                        if p not in place_set:
                            raise IdentifierError(
                                f"reaction {t!r} references unknown species {p!r}")
                        weights[key(p)] = _int_attr(ref, "stoichiometry", 1)
            rate = None
            for law in parts["kineticLaw"]:
                for plist in _children(law, ("listOfLocalParameters",))["listOfLocalParameters"]:
                    for param in _children(plist, ("localParameter",))["localParameter"]:
                        if _attr(param, "id") == "rate":
                            rate = float(_attr(param, "value"))
            if rate is None:
                raise SchemaError(f"reaction {t!r} has no local parameter named 'rate'")
            transitions.append(t)
            rates[t] = rate

    net = PetriNet(tuple(places), tuple(transitions), input_w, output_w)
    return NetDocument(net, marking, rates, name)


# ---------------------------------------------------------------------------
# Trace CSV


def write_trace_csv(trace, net: PetriNet) -> str:
    """Trace as CSV: header ``time,<places>``, one row per record time."""
    if tuple(trace.places) != net.places:
        raise IdentifierError("trace place order does not match the net")
    lines = ["time," + ",".join(net.places)]
    for time, counts in trace.rows:
        lines.append(fmt_number(time) + "," + ",".join(str(c) for c in counts))
    return "\n".join(lines) + "\n"


def read_trace_csv(text: str):
    """Inverse of :func:`write_trace_csv`."""
    from .sim import Trace  # deferred: sim imports this module at load time

    lines = text.splitlines()
    if not lines or not lines[0].startswith("time"):
        raise FormatError("trace CSV must start with a 'time,...' header")
    header = lines[0].split(",")
    places = tuple(header[1:])
    for p in places:
        if not is_identifier(p):
            raise IdentifierError(f"invalid place id {p!r} in trace header")
    rows = []
    previous = None
    for row_no, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != len(places) + 1:
            raise FormatError(
                f"row {row_no}: expected {len(places) + 1} fields, got {len(fields)}")
        try:
            time = float(fields[0])
            counts = tuple(int(c) for c in fields[1:])
        except ValueError as exc:
            raise FormatError(f"row {row_no}: {exc}") from exc
        if previous is not None and time <= previous:
            raise FormatError(f"row {row_no}: time {time} is not increasing")
        previous = time
        rows.append((time, counts))
    return Trace(places=places, rows=tuple(rows))
