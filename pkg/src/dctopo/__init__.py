"""Direct-connect topologies and allreduce schedules.

Build base graphs, grow them with line, degree, power, product and
undirected expansions, synthesise reduce-scatter and allgather schedules,
and search for Pareto-optimal (latency, bandwidth) topologies.
"""

from .expr import ParseError, parse_expr, to_text
from .graph import Digraph, diameter, transpose
from .materialize import Materialized, allgather_schedule, materialize
from .pareto import ParetoEntry, enumerate_topologies, evaluate, theoretical_lower_bound
from .schedule import AG, RS, CostVector, Schedule, cost_vector, validate

__version__ = "0.1.0"

__all__ = [
    "AG", "RS", "CostVector", "Digraph", "Materialized", "ParetoEntry", "ParseError", "Schedule",
    "allgather_schedule", "cost_vector", "diameter", "enumerate_topologies", "evaluate",
    "materialize", "parse_expr", "theoretical_lower_bound", "to_text", "transpose", "validate",
]
