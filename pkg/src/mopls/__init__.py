"""Many-objective Pareto local search with ND-Tree archives."""

from mopls.archive import EmptyArchiveError, ListArchive, NDTreeArchive, make_archive, query_cost_probe
from mopls.domain import (
    ChebycheffFunction,
    Relation,
    chebycheff_value,
    compare,
    draw_weight_vector,
    normalize_weights,
    reference_point_from_extremes,
)
from mopls.search import (
    Budget,
    FirstDominating,
    FirstNonDominated,
    FixedRandomMoves,
    FullNeighborhood,
    SearchConfig,
    Selection,
    mpls,
    seed_archive,
    standard_pls,
    steepest_local_search,
)

__version__ = "0.1.0"

__all__ = [
    "Budget",
    "ChebycheffFunction",
    "EmptyArchiveError",
    "FirstDominating",
    "FirstNonDominated",
    "FixedRandomMoves",
    "FullNeighborhood",
    "ListArchive",
    "NDTreeArchive",
    "Relation",
    "SearchConfig",
    "Selection",
    "chebycheff_value",
    "compare",
    "draw_weight_vector",
    "make_archive",
    "mpls",
    "normalize_weights",
    "query_cost_probe",
    "reference_point_from_extremes",
    "seed_archive",
    "standard_pls",
    "steepest_local_search",
]
