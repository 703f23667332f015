"""Communication complexity laboratory.

Exact simulation of two-party protocols, the round reduction and round
elimination transforms, rank-parity and greater-than reductions, classical
cell probe schemes for predecessor search, numerical checks of the classical
and quantum information inequalities behind them, and arithmetic tracers for
the resulting lower-bound recursions.
"""

__version__ = "0.1.0"

from .info import (Dist, JointDist, average_encoding_gap, conditional_mutual_information,
                   entropy, l1_distance, mutual_information, pinsker_bound, relative_entropy)
from .proto import (DetProtocol, Game, PrivProtocol, PubProtocol, Schema, distributional_error,
                    first_message_stats, fix_public_coin, minimax_value_estimate,
                    minimax_value_exact)
from .elim import (EliminationReport, RoundReduction, eliminate_round, elimination_bound,
                   lift_game, round_reduce)
from .games import (FingerprintProtocol, ParInstance, gt_fingerprint_protocol, par_eval,
                    rankred1_transform, rankred2_transform)
from .cellprobe import (CPScheme, Table, fks_rank_scheme, pred_to_rankparity, run_query,
                        scheme_to_protocol, sorted_array_scheme, verify_scheme, xfast_scheme)
from .tracers import gt_lb_trace, pred_lb_trace

__all__ = [
    "Dist", "JointDist", "average_encoding_gap", "conditional_mutual_information", "entropy",
    "l1_distance", "mutual_information", "pinsker_bound", "relative_entropy",
    "DetProtocol", "Game", "PrivProtocol", "PubProtocol", "Schema", "distributional_error",
    "first_message_stats", "fix_public_coin", "minimax_value_estimate", "minimax_value_exact",
    "EliminationReport", "RoundReduction", "eliminate_round", "elimination_bound", "lift_game",
    "round_reduce", "FingerprintProtocol", "ParInstance", "gt_fingerprint_protocol", "par_eval",
    "rankred1_transform", "rankred2_transform", "CPScheme", "Table", "fks_rank_scheme",
    "pred_to_rankparity", "run_query", "scheme_to_protocol", "sorted_array_scheme",
    "verify_scheme", "xfast_scheme", "gt_lb_trace", "pred_lb_trace",
]
