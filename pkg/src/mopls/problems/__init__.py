from mopls.problems.base import (
    InvalidMoveError,
    InvalidSolutionError,
    NoMoveError,
    build_candidate_lists,
)
from mopls.problems.io import read_instance, write_instance
from mopls.problems.moves import (
    MoveSet,
    NodeDelete,
    NodeExchange,
    NodeInsert,
    TwoEdgeExchange,
)
from mopls.problems.mtsp import MTSPInstance, generate_mtsp
from mopls.problems.mtspwp import MTSPWPInstance, generate_mtspwp


def evaluate(inst, sol):
    return inst.evaluate(sol)


def apply_move_delta(inst, sol, move):
    return inst.apply_move_delta(sol, move)


def sample_random_move(inst, sol, rng):
    return inst.sample_moves(sol, rng, 1).move(0)


def enumerate_neighborhood(inst, sol):
    return iter(inst.neighborhood(sol))


__all__ = [
    "InvalidMoveError",
    "InvalidSolutionError",
    "MTSPInstance",
    "MTSPWPInstance",
    "MoveSet",
    "NoMoveError",
    "NodeDelete",
    "NodeExchange",
    "NodeInsert",
    "TwoEdgeExchange",
    "apply_move_delta",
    "build_candidate_lists",
    "enumerate_neighborhood",
    "evaluate",
    "generate_mtsp",
    "generate_mtspwp",
    "read_instance",
    "sample_random_move",
    "write_instance",
]
