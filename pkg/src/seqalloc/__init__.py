"""Sequential allocation of indivisible items viewed as a one-shot game."""

from .core import (
    Assignment,
    Instance,
    InvalidInstanceError,
    SizeGuardError,
    UtilityFunction,
    bundle_utility,
    compare_bundles_lex,
    compare_bundles_uplex,
    make_utility,
    parse_sequence,
    validate_instance,
    weak_utility,
)
from .equilibria import (
    best_response,
    better_response_dynamics,
    bluff_profile,
    crossout_profile,
    is_pne_all_consistent,
    is_pure_nash,
    verify_response_step,
)
from .mechanism import pick_order, sequential_allocation
from .pareto import is_pareto_optimal_pc, pairwise_dominates, pareto_dominates, strictly_pairwise_preferred
from .stackelberg import (
    commitment_advantage,
    follower_take_set,
    partition_by_value,
    stackelberg_brute,
    stackelberg_dp,
)

__version__ = "0.1.0"
