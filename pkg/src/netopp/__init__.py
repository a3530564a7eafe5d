"""netopp: strategic professional-network formation and opportunity transfer.

Exact expected utilities under uninformed and informed transfer, seeded Monte
Carlo oracles, defection-free pairwise equilibrium checking and discovery,
price-of-anarchy and inequality analysis, and platform-intervention studies,
with a CLI for sweeps and file-based workflows.
"""

__version__ = "0.1.0"

from .core import (
    INFORMED,
    PROB_TOL,
    TRANSFER_MODELS,
    UNINFORMED,
    EnumerationCapError,
    ExogenousDistribution,
    GraphError,
    InvariantError,
    ModelParams,
    Network,
    ParameterError,
    base_distribution,
    validate_model,
    validate_params,
)
from .closed_form import (
    expected_utilities,
    expected_utility,
    heterogeneous_utility,
    informed_no_transfer_prob,
    informed_utility_local_tree,
    social_welfare,
    truncated_surplus_mass,
    utility,
)
from .transfer_sim import (
    BALL_CAP,
    SimResult,
    estimate_utilities,
    exact_informed_utilities,
    exact_informed_utility,
    sample_round,
)
from .equilibrium import (
    Deviation,
    DynamicsResult,
    EquilibriumReport,
    best_pair_add,
    best_response_dynamics,
    check_equilibrium,
    informed_regular_equilibrium_degrees,
    largest_regular_degree,
    multi_sever_equivalence_check,
    near_regular_equilibrium,
    regular_equilibrium_degrees,
    sever_gain,
)
from .welfare import (
    GiniResult,
    HomophilyReport,
    OptimalWelfare,
    PoABounds,
    brute_force_equilibria,
    brute_force_optimal,
    degree_range_witness,
    gini,
    homophily_report,
    optimal_degree_informed,
    optimal_welfare,
    poa_costly,
    poa_frictionless,
    poa_informed,
    status_homophily_report,
    worst_case_gini,
)
from .interventions import (
    FrictionCurve,
    friction_nonmonotonicity_witness,
    friction_sweep,
    information_equilibrium_compare,
    information_fixed_compare,
)
from .construct import ConstructionSpec, build, girth
