"""Parameter sweeps: expansion, batched execution, and result merging.

A sweep is the Cartesian product of value axes over a base document, times
a replicate count.  Every run gets a deterministic id and seed derived from
its position, so expanding the same spec twice (or executing it at any
parallelism level) produces identical outputs.  Runs write one trace CSV
each plus a manifest; merging folds them into a single long-format CSV and
a per-run, per-place summary (final/min/max/mean).
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product
from pathlib import Path

from .errors import FormatError, IdentifierError, MergeError, ParseError
from .formats import (NetDocument, fmt_number, parse_andl, parse_sbml,
                      read_trace_csv, write_trace_csv)
from .rng import derive_seed
from .sim import SimConfig, simulate_ssa

MANIFEST_NAME = "manifest.csv"

Axis = tuple[str, tuple[float, ...]]


@dataclass(frozen=True)
class SweepSpec:
    """Declarative parameter space over a base document.

    Axis paths address the document with a two-segment dotted form:
    ``rates.<transition>`` or ``marking.<place>``.
    """

    base: NetDocument
    axes: tuple[Axis, ...] = ()
    replicates: int = 1
    base_seed: int = 0
    name: str = "sweep"

    def __post_init__(self):
        axes = tuple((str(path), tuple(values)) for path, values in self.axes)
        object.__setattr__(self, "axes", axes)
        if self.replicates < 1:
            raise ValueError(f"replicates must be >= 1, got {self.replicates}")
        seen = set()
        for path, values in axes:
            if path in seen:
                raise ValueError(f"duplicate axis {path!r}")
            seen.add(path)
            if not values:
                raise ValueError(f"axis {path!r} has no values")
            _resolve_path(self.base, path)


def _resolve_path(doc: NetDocument, path: str) -> tuple[str, str]:
    head, _sep, ident = path.partition(".")
    if head == "rates" and ident in doc.rates:
        return head, ident
    if head == "marking" and ident in doc.marking:
        return head, ident
    raise IdentifierError(f"unresolvable parameter path {path!r}")


def apply_assignment(doc: NetDocument, params) -> NetDocument:
    """A copy of ``doc`` with the (path, value) assignments applied."""
    rates = dict(doc.rates)
    marking = dict(doc.marking)
    for path, value in params:
        head, ident = _resolve_path(doc, path)
        if head == "rates":
            rates[ident] = float(value)
        else:
            count = int(value)
            if count != value or count < 0:
                raise ValueError(
                    f"marking value for {path!r} must be a non-negative integer")
            marking[ident] = count
    return NetDocument(doc.net, marking, rates, doc.name)


@dataclass(frozen=True)
class RunRecord:
    """One planned (or finished) simulation of the sweep."""

    run_id: str
    params: tuple[tuple[str, float], ...]
    seed: int
    file: str
    status: str
    spec: SweepSpec = field(repr=False)


def expand_sweep(spec: SweepSpec) -> list[RunRecord]:
    """All runs of the sweep: axes in lexicographic index order, replicates
    innermost, seeds derived from (base_seed, run index)."""
    records = []
    index_ranges = [range(len(values)) for _path, values in spec.axes]
    run_index = 0
    for combo in product(*index_ranges):
        params = tuple((path, values[i])
                       for (path, values), i in zip(spec.axes, combo))
        for rep in range(spec.replicates):
            run_id = "r" + "".join(f"_{i}" for i in combo) + f"_{rep}"
            records.append(RunRecord(
                run_id=run_id,
                params=params,
                seed=derive_seed(spec.base_seed, run_index),
                file=f"{run_id}.csv",
                status="pending",
                spec=spec,
            ))
            run_index += 1
    return records


def _execute_one(record: RunRecord, cfg: SimConfig, out_dir: Path) -> RunRecord:
    try:
        doc = apply_assignment(record.spec.base, record.params)
        trace = simulate_ssa(doc, replace(cfg, seed=record.seed))
        (out_dir / record.file).write_text(write_trace_csv(trace, doc.net),
                                           encoding="utf-8")
        status = "truncated" if trace.truncated else "ok"
    except Exception as exc:  # failures must not abort the batch
        status = f"error: {exc}"
    return replace(record, status=status)


def run_sweep(records: list[RunRecord], cfg: SimConfig, out_dir,
              parallelism: int = 1) -> list[RunRecord]:
    """Execute every record, write one trace CSV each plus the manifest.

    ``cfg.seed`` is ignored; each run uses its pre-assigned record seed,
    which is what makes outputs independent of ``parallelism``.
    """
    if parallelism < 1:
        raise ValueError(f"parallelism must be >= 1, got {parallelism}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if parallelism == 1:
        done = [_execute_one(r, cfg, out_dir) for r in records]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            done = list(pool.map(lambda r: _execute_one(r, cfg, out_dir), records))
    axis_paths = [path for path, _values in records[0].spec.axes] if records else []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["run_id", "status", "seed"] + axis_paths + ["file"])
    for record in done:
        values = [fmt_number(v) for _p, v in record.params]
        writer.writerow([record.run_id, record.status, record.seed] + values
                        + [record.file])
    (out_dir / MANIFEST_NAME).write_text(buf.getvalue(), encoding="utf-8")
    return done


def merge_csv(out_dir) -> tuple[str, str]:
    """Merge an executed sweep directory into (merged CSV, summary CSV).

    Merged rows are ordered by run id then time and carry the parameter
    columns; the summary has one row per run and place with the final,
    minimum, maximum, and mean recorded value.  Runs whose status is an
    error are skipped; a missing trace for a successful run is an error.
    """
    out_dir = Path(out_dir)
    manifest_path = out_dir / MANIFEST_NAME
    if not manifest_path.exists():
        raise MergeError(f"no manifest in {out_dir}")
    with manifest_path.open(encoding="utf-8", newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows or rows[0][:3] != ["run_id", "status", "seed"] or rows[0][-1] != "file":
        raise FormatError("manifest header is not run_id,status,seed,...,file")
    axis_paths = rows[0][3:-1]

    entries = sorted((row for row in rows[1:] if row), key=lambda row: row[0])
    places: tuple[str, ...] | None = None
    merged = io.StringIO()
    summary = io.StringIO()
    merged_writer = csv.writer(merged, lineterminator="\n")
    summary_writer = csv.writer(summary, lineterminator="\n")
    summary_writer.writerow(["run_id", "place", "final", "min", "max", "mean"])

    for row in entries:
        run_id, status = row[0], row[1]
        axis_values, file_name = row[3:-1], row[-1]
        if status.startswith("error"):
            continue
        trace_path = out_dir / file_name
        if not trace_path.exists():
            raise MergeError(f"trace file missing for run {run_id!r}")
        trace = read_trace_csv(trace_path.read_text(encoding="utf-8"))
        if places is None:
            places = trace.places
            merged_writer.writerow(["run_id"] + axis_paths + ["time"] + list(places))
        elif trace.places != places:
            raise MergeError(f"run {run_id!r} has mismatched place columns")
        for time, counts in trace.rows:
            merged_writer.writerow([run_id] + axis_values + [fmt_number(time)]
                                   + [str(c) for c in counts])
        for i, place in enumerate(places):
            series = [counts[i] for _t, counts in trace.rows]
            summary_writer.writerow([
                run_id, place, series[-1], min(series), max(series),
                fmt_number(sum(series) / len(series)),
            ])
    if places is None:
        raise MergeError("manifest lists no successful runs to merge")
    return merged.getvalue(), summary.getvalue()


def load_sweep_file(path) -> tuple[SweepSpec, SimConfig]:
    """Read the sweep description format.

    Flat ``key = value`` lines plus one ``axis <path> = v1 v2 ...`` line per
    axis; ``#`` starts a comment.  Keys: name, model (path to a .andl or
    .xml/.sbml document, relative to the file), replicates, base_seed,
    t_end, record_dt, max_events.
    """
    path = Path(path)
    keys: dict[str, str] = {}
    axes: list[Axis] = []
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", line=line_no)
        key, value = (part.strip() for part in line.split("=", 1))
        if key.startswith("axis "):
            axis_path = key[len("axis "):].strip()
            try:
                values = tuple(_num(v) for v in value.split())
            except ValueError as exc:
                raise ParseError(f"bad axis value: {exc}", line=line_no) from exc
            if not values:
                raise ParseError(f"axis {axis_path!r} has no values", line=line_no)
            axes.append((axis_path, values))
        elif key in keys:
            raise ParseError(f"duplicate key {key!r}", line=line_no)
        else:
            keys[key] = value
    for required in ("model", "t_end"):
        if required not in keys:
            raise FormatError(f"sweep file is missing required key {required!r}")
    model_path = path.parent / keys["model"]
    if not model_path.exists():
        raise FormatError(f"model file {model_path} does not exist")
    text = model_path.read_text(encoding="utf-8")
    if model_path.suffix == ".andl":
        base = parse_andl(text)
    elif model_path.suffix in (".xml", ".sbml"):
        base = parse_sbml(text)
    else:
        raise FormatError(f"cannot tell model format from suffix {model_path.suffix!r}")
    spec = SweepSpec(
        base=base,
        axes=tuple(axes),
        replicates=int(keys.get("replicates", "1")),
        base_seed=int(keys.get("base_seed", "0")),
        name=keys.get("name", "sweep"),
    )
    cfg = SimConfig(
        t_end=float(keys["t_end"]),
        record_dt=float(keys.get("record_dt", "1.0")),
        seed=spec.base_seed,
        max_events=int(keys.get("max_events", "1000000")),
    )
    return spec, cfg


def _num(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)
