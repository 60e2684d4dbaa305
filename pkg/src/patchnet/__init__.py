"""patchnet: assembly, interchange, and simulation of spatial Petri nets."""

from .core import (Marking, PetriNet, enabled_set, fire, is_enabled,
                   run_to_quiescence, validate_marking)
from .errors import (AsymmetryError, EmptyGridError, FormatError,
                     IdentifierError, MergeError, NoCrossingError,
                     NonQuiescentError, ParseError, PatchnetError,
                     SchemaError, SemanticsError, ShapeError)
from .formats import (NetDocument, emit_andl, emit_sbml, parse_andl,
                      parse_sbml, read_trace_csv, write_trace_csv)
from .layers import (InfoLayer, PatchAttributes, RateRule, bind_layers,
                     derive_rates, load_layers_csv)
from .percolation import (Lattice, ThresholdEstimate, estimate_threshold,
                          mean_cluster_size, percolate_via_net,
                          sample_occupancy, spans)
from .rng import SplitMix64, derive_seed
from .sim import SimConfig, Trace, propensity, sample_exponential, simulate_ssa
from .spatial import (Adjacency, Patch, PatchGrid, RegionPolygon,
                      grid_from_region, load_adjacency_csv, load_region,
                      neighbors, point_in_polygon, write_adjacency_csv)
from .sweep import (RunRecord, SweepSpec, apply_assignment, expand_sweep,
                    load_sweep_file, merge_csv, run_sweep)
from .templates import (InitSpec, SirParams, apply_init, assemble_fire,
                        assemble_sir, parse_init_csv)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
