"""Bind per-location information layers to patches and derive local rates.

A layer is a flat list of records, either point-keyed (x, y, value) or
patch-id-keyed (id, value).  Binding assigns records to grid patches and
aggregates collisions; rate derivation applies a per-rate affine rule with
clamping, the single audited mapping from layer values to model rates.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import FormatError, IdentifierError, ParseError
from .spatial import PatchGrid

POINT = "point"
BY_ID = "id"

AGGREGATES = {
    "mean": lambda vals: sum(vals) / len(vals),
    "sum": sum,
    "max": max,
}

# patch id -> layer name -> value
PatchAttributes = dict[str, dict[str, float]]


@dataclass(frozen=True)
class InfoLayer:
    """One named attribute dataset; records are homogeneous in kind."""

    name: str
    kind: str  # POINT or BY_ID
    records: tuple[tuple[object, float], ...]
    default: float = 0.0

    def __post_init__(self):
        if self.kind not in (POINT, BY_ID):
            raise ValueError(f"layer kind must be {POINT!r} or {BY_ID!r}, got {self.kind!r}")
        normalized = []
        for key, value in self.records:
            if self.kind == POINT:
                x, y = key
                key = (float(x), float(y))
            elif not isinstance(key, str):
                raise ValueError(f"id-keyed layer {self.name!r} has non-string key {key!r}")
            normalized.append((key, float(value)))
        object.__setattr__(self, "records", tuple(normalized))

    @classmethod
    def from_points(cls, name: str, records: Iterable[tuple[float, float, float]],
                    default: float = 0.0) -> "InfoLayer":
        return cls(name, POINT, tuple(((x, y), v) for x, y, v in records), default)

    @classmethod
    def from_ids(cls, name: str, records: Iterable[tuple[str, float]],
                 default: float = 0.0) -> "InfoLayer":
        return cls(name, BY_ID, tuple(records), default)


def load_layers_csv(text: str) -> list[InfoLayer]:
    """Read layers from CSV.

    Header ``layer,x,y,value`` gives point-keyed layers, ``layer,patch_id,value``
    id-keyed ones; rows are grouped into layers by the first column.
    """
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise FormatError("layer CSV is empty")
    header = [c.strip() for c in rows[0]]
    if header == ["layer", "x", "y", "value"]:
        kind = POINT
    elif header == ["layer", "patch_id", "value"]:
        kind = BY_ID
    else:
        raise FormatError(f"unrecognized layer CSV header {','.join(header)!r}")
    grouped: dict[str, list] = {}
    for line_no, row in enumerate(rows[1:], start=2):
        row = [c.strip() for c in row]
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", line=line_no)
        try:
            if kind == POINT:
                record = ((float(row[1]), float(row[2])), float(row[3]))
            else:
                record = (row[1], float(row[2]))
        except ValueError as exc:
            raise ParseError(f"bad numeric field: {exc}", line=line_no) from exc
        grouped.setdefault(row[0], []).append(record)
    return [InfoLayer(name, kind, tuple(records)) for name, records in grouped.items()]


def bind_layers(grid: PatchGrid | Iterable[str], layers: Iterable[InfoLayer],
                aggregate: str = "mean") -> PatchAttributes:
    """Attach layer values to every patch of the grid.

    Point records land in the cell containing them; records outside every
    kept cell are dropped (a warning reports the count).  Records that share
    a patch are combined with ``aggregate``; patches without a record carry
    the layer default.  Empty layers are skipped with a warning.

    ``grid`` may also be a bare collection of patch ids (e.g. adjacency
    nodes), in which case only id-keyed layers can bind.
    """
    if aggregate not in AGGREGATES:
        raise ValueError(f"aggregate must be one of {sorted(AGGREGATES)}, got {aggregate!r}")
    combine = AGGREGATES[aggregate]
    if isinstance(grid, PatchGrid):
        ids = grid.ids()
        by_rc = grid.by_row_col()
        ox, oy = grid.origin
        cell = grid.cell_size
    else:
        ids = tuple(grid)
        by_rc = None
    id_set = set(ids)
    attrs: PatchAttributes = {pid: {} for pid in ids}
    seen_names = set()
    for layer in layers:
        if layer.name in seen_names:
            raise IdentifierError(f"duplicate layer name {layer.name!r}")
        seen_names.add(layer.name)
        if not layer.records:
            warnings.warn(f"layer {layer.name!r} has no records and was omitted")
            continue
        if layer.kind == POINT and by_rc is None:
            raise ValueError(
                f"point-keyed layer {layer.name!r} requires a grid, not bare patch ids")
        collected: dict[str, list[float]] = {}
        dropped = 0
        for key, value in layer.records:
            if layer.kind == POINT:
                x, y = key
                pid = by_rc.get((math.floor((y - oy) / cell), math.floor((x - ox) / cell)))
                if pid is None:
                    dropped += 1
                    continue
            else:
                pid = key
                if pid not in id_set:
                    raise IdentifierError(
                        f"layer {layer.name!r} references unknown patch id {pid!r}")
            collected.setdefault(pid, []).append(value)
        if dropped:
            warnings.warn(
                f"layer {layer.name!r}: dropped {dropped} point(s) outside every kept cell")
        for pid in ids:
            values = collected.get(pid)
            attrs[pid][layer.name] = combine(values) if values else layer.default
    return attrs


@dataclass(frozen=True)
class RateRule:
    """Affine rule with clamping: rate = scale * layer + offset in [lo, hi]."""

    layer: str
    scale: float
    offset: float
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"clamp bounds inverted: [{self.lo}, {self.hi}]")

    def apply(self, value: float) -> float:
        return min(self.hi, max(self.lo, self.scale * value + self.offset))


def derive_rates(attrs: PatchAttributes,
                 rules: Mapping[str, RateRule]) -> dict[str, dict[str, float]]:
    """Per-patch rate values from layer attributes.

    Every rule references a layer present in ``attrs``; a patch missing that
    layer contributes 0.0 before the rule (bind_layers output is always
    complete, so this only matters for hand-built attribute maps).
    """
    known_layers = set()
    for per_patch in attrs.values():
        known_layers.update(per_patch)
    for rate_name, rule in rules.items():
        if rule.layer not in known_layers:
            raise IdentifierError(
                f"rate {rate_name!r} references unknown layer {rule.layer!r}")
    return {
        pid: {rate_name: rule.apply(per_patch.get(rule.layer, 0.0))
              for rate_name, rule in rules.items()}
        for pid, per_patch in attrs.items()
    }


def parse_rate_rule(text: str) -> tuple[str, RateRule]:
    """Parse the CLI rule syntax ``name=SCALE*LAYER+OFFSET@LO:HI``.

    Example: ``infect=0.1*humidity+0.02@0.001:1.0``.
    """
    try:
        name, rest = text.split("=", 1)
        expr, clamp = rest.split("@", 1)
        scale_s, rest2 = expr.split("*", 1)
        layer, offset_s = rest2.split("+", 1)
        lo_s, hi_s = clamp.split(":", 1)
        return name.strip(), RateRule(layer.strip(), float(scale_s), float(offset_s),
                                      float(lo_s), float(hi_s))
    except ValueError as exc:
        raise FormatError(
            f"bad rate rule {text!r}; expected name=SCALE*LAYER+OFFSET@LO:HI") from exc
