"""submax: local search for constrained submodular maximization.

Exact-rational primitives for value and membership oracles, the continuous
extension and its convex-closure LP, shifted-cone certificates for
neighborhood quality, local-search procedures with provable approximation
factors, concrete constraint families, and a simulator of the
linear-optimization-oracle hardness construction.
"""

from .core import (
    FeasibilityFamily, FunctionSpec, GroundSet, NegativeValueError, SizeError,
    SubmodularOracle, brute_force_opt, check_submodular, coverage_function,
    directed_cut_function, explicit_table_function, format_rational,
    modular_function, parse_rational, prune_ground_set, subset_key,
)
from .constraints import (
    Matroid, b_matching_family, bipartite_matching_instance, check_exchange_axiom,
    check_down_closed, check_k_exchange, k_exchange_explicit_family,
    k_intersection_family,
)
from .geometry import (
    ConeCertificate, LPResult, StepBound, check_cone_down_closure, cone_membership,
    improving_step_bound, lp_solve, shifted_cone_coefficients, verify_cone_inequality,
    vertex_adjacency, INFEASIBLE, OPTIMAL, UNBOUNDED,
)
from .lovasz import FractionalPoint, convex_closure_value, lovasz_value
from .neighborhoods import (
    NeighborhoodFunction, empirical_conic_check, matroid_polyhedral_neighborhood,
    polyhedral_neighborhood, polyhedral_neighborhood_function, swap_neighborhood,
    swap_neighborhood_function,
)
from .search import (
    BasicSearchResult, IterativeSearchResult, MonotoneSearchResult, SearchConfig,
    SearchTrace, basic_local_search, ceil_ln, iterative_local_search,
    monotone_local_search, most_improving_step,
)
from .hardness import (
    HardnessInstance, beta_from_c, detection_curve, detection_probability,
    generate_instance, linopt_brute_force, linopt_oracle, max_standard_value,
    normalize_weights, run_adversary,
)
from .instances import Instance, InstanceFormatError, load_instance, load_instance_file

__version__ = "0.1.0"
