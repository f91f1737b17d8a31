"""Min-max task allocation for heterogeneous agents sharing a depot."""

from .allocators import (Infeasible, LambdaSearch, LambdaSearchError, cycle_split,
                         hetero_minmax_split, hetero_split, naive_allocation)
from .instance import (Agent, AgentPlan, Allocation, Instance, InstanceError, Task, Tour,
                       generate_euclidean, generate_example, load_instance,
                       validate_metric)
from .metric_tsp import christofides_tour, held_karp_tour, min_weight_perfect_matching
from .oracle import exact_minmax
from .tour_split import SplitResult, splitour

__all__ = [
    "Agent", "AgentPlan", "Allocation", "Infeasible", "Instance", "InstanceError",
    "LambdaSearch", "LambdaSearchError", "SplitResult", "Task", "Tour",
    "christofides_tour", "cycle_split", "exact_minmax", "generate_euclidean",
    "generate_example", "held_karp_tour", "hetero_minmax_split", "hetero_split",
    "load_instance", "min_weight_perfect_matching", "naive_allocation", "splitour",
    "validate_metric",
]
