"""Storage tuning for RDF workloads.

rdftuner loads an N-Triples dataset into a dictionary-encoded triple
table, reformulates a weighted conjunctive query workload under an
RDFS schema, and searches the space of materialized view
configurations reachable by selection cuts, join cuts, and view
fusion.  Candidate configurations are scored by a three-part cost
model (evaluation, maintenance, space); the engine is exposed as a
library, a command line tool, and an HTTP service.
"""

from .cost import CostReport, QualityWeights, state_quality
from .errors import TunerError
from .queries import ConjunctiveQuery, Workload, canonical_form, parse_sparql
from .reasoner import (
    RDFSchema,
    Vocabulary,
    compute_closure,
    parse_schema,
    reformulate_query,
    reformulate_workload,
    saturate,
)
from .search import STRATEGIES, SearchConfig, SearchResult, run_search
from .store import (
    DataStatistics,
    Dictionary,
    TripleTable,
    compute_statistics,
    load_dataset,
    parse_ntriples,
)
from .views import State, apply_transition, enumerate_transitions, initial_state

__version__ = "0.1.0"

__all__ = [
    "CostReport",
    "ConjunctiveQuery",
    "DataStatistics",
    "Dictionary",
    "QualityWeights",
    "RDFSchema",
    "STRATEGIES",
    "SearchConfig",
    "SearchResult",
    "State",
    "TripleTable",
    "TunerError",
    "Vocabulary",
    "Workload",
    "apply_transition",
    "canonical_form",
    "compute_closure",
    "compute_statistics",
    "enumerate_transitions",
    "initial_state",
    "load_dataset",
    "parse_ntriples",
    "parse_schema",
    "parse_sparql",
    "reformulate_query",
    "reformulate_workload",
    "run_search",
    "saturate",
    "state_quality",
]
