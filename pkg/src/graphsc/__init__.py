"""graphsc: stochastic completeness of weighted graphs, numerically.

Weighted graphs (b, c, m) and their countable families; sparse Dirichlet
operators over nested finite sections; exhaustion-limit resolvents and heat
semigroups; the heat-loss quantities w, M_t, S with honest one-sided bounds;
complete-supergraph and Dirichlet-subgraph constructions; and an independent
Monte Carlo simulator of the minimal jump process with killing.
"""

__version__ = "0.1.0"

from .errors import InputError, InternalConsistencyError, SolverError
from .graphs import (
    GraphSpec,
    ValidationReport,
    connected_components,
    dirichlet_subgraph,
    graph_spec,
    outer_boundary,
)
from .families import (
    GraphFamily,
    Section,
    build_supergraph,
    build_supergraph_single_vertex,
    dirichlet_subfamily,
    explicit_family,
    family_from_name,
    half_line,
    integer_line,
    jacobi_counterexample,
    pendant_decorated_power_line,
    power_half_line,
    tree_family,
    truncate,
    unit_integer_line,
)
from .formal import (
    apply_formal,
    check_condition_A,
    check_lp_uniqueness_numeric,
    check_min_principle,
    check_summability_criterion,
    energy,
    greens_identity_gap,
    quadratic_form_check,
    residual,
)
from .sections import SectionOperator, assemble, heat_residual
from .exhaustion import (
    MonotoneLimit,
    Schedule,
    default_schedule,
    excessive_check,
    extended_resolvent,
    extended_semigroup,
)
from .completeness import (
    classify,
    compute_M,
    compute_S,
    compute_w,
    default_probes,
    lemma_ray_growth,
    subsolution_search,
    theorem_main1_scenario,
    theorem_main2_scenario,
    verify_equivalences,
)
from .mc import ProcessConfig, estimate_M_curve, simulate
