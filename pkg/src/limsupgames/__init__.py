"""Exact limsup games on pruned trees: representations, constructions,
strategies, and lasso-certified verdicts."""

from .automata import (NodeAutomaton, eval_limsup, lasso_summary,
                       make_automaton, minmax_value)
from .cli import ExperimentConfig, entry
from .construction import (ALGEBRA_OPS, AlgebraFunction, ConstructionReport,
                           ConstructionState, InconclusiveLassoError, algebra,
                           branch_limsup, construct_u, joint_minmax,
                           minimize_labeling, node_labeling, rn_sup,
                           rstar_sup, verify_construction)
from .dyadic import NEG_INF, POS_INF, Dyadic, ExtValue, as_dyadic, half_pow
from .families import (GridLscFamily, LscLevel, constant_family, discretize,
                       family_from_automaton, family_from_kernel,
                       regularize_nonincreasing)
from .games import (FiniteValueSet, GameKind, Outcome, RunTrace, StrategyFault,
                    StrategyI, StrategyII, Verdict, check_win, exact_verdict,
                    finite_value_set, gamma, gamma_prime, gamma_restricted,
                    play)
from .strategies import (approx_copycat, copycat_strategy, lift_strategy,
                         pair_strategies, relabel_strategy,
                         strategy_i_meager_dense, strategy_i_oscillation,
                         strategy_ii_from_u, u_from_strategy_ii)
from .trees import (EventuallyPeriodicBranch, TreeSpec, binary_tree,
                    full_tree, nat_tree, parse_branch)

__version__ = "0.1.0"

__all__ = [
    "ALGEBRA_OPS", "AlgebraFunction", "ConstructionReport",
    "ConstructionState", "Dyadic", "EventuallyPeriodicBranch",
    "ExperimentConfig", "ExtValue", "FiniteValueSet", "GameKind",
    "GridLscFamily", "InconclusiveLassoError", "LscLevel", "NEG_INF",
    "NodeAutomaton", "Outcome", "POS_INF", "RunTrace", "StrategyFault",
    "StrategyI", "StrategyII", "TreeSpec", "Verdict", "algebra",
    "approx_copycat", "as_dyadic", "binary_tree", "branch_limsup",
    "check_win", "constant_family", "construct_u", "copycat_strategy",
    "discretize", "entry", "eval_limsup", "exact_verdict",
    "family_from_automaton", "family_from_kernel", "finite_value_set",
    "full_tree", "gamma", "gamma_prime", "gamma_restricted", "half_pow",
    "joint_minmax", "lasso_summary", "lift_strategy", "make_automaton",
    "minimize_labeling", "minmax_value", "nat_tree", "node_labeling",
    "pair_strategies", "parse_branch", "play", "regularize_nonincreasing",
    "relabel_strategy", "rn_sup", "rstar_sup", "strategy_i_meager_dense",
    "strategy_i_oscillation", "strategy_ii_from_u", "u_from_strategy_ii",
    "verify_construction",
]
