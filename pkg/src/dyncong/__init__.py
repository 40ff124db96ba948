"""Dynamic network congestion games: model, solvers, and oracles."""

from .arena import Arena, ArenaError, Game, build_arena, parse_arena, serialize_arena, validate_arena
from .costfn import CostFunction, CostFunctionError, constant, kappa, linear, threshold, validate_pieces
from .dynamics import (
    BlindProfile,
    BlindStrategy,
    best_response,
    blind_ne,
    blind_strategy,
    is_blind_ne,
    play_profile,
    potential,
    strategy_from_states,
)
from .graphs import (
    INF,
    BudgetExceeded,
    OutcomePath,
    SemanticsError,
    abstract_successors,
    dev_set,
    eval_path,
    parikh,
    path_from_json,
    step,
)
from .ne import (
    NEProfile,
    ValueTable,
    check_ne_outcome,
    compute_values,
    constrained_ne,
    gamma_min_ne,
    synthesize_ne_profile,
)
from .cli import poa, pos
from .socopt import constrained_social_optimum, social_optimum
from .spe import (
    CounterState,
    LambdaResult,
    check_spe_outcome,
    compute_lambda,
    constrained_spe,
    counter_step,
    gamma_min_spe,
    lambda_consistent_exists,
    spe_exists,
    sup_cost,
)

__all__ = [name for name in dir() if not name.startswith("_")]
