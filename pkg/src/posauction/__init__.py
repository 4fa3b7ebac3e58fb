"""Position auctions with prefix and range constraints: GSP, the top-down
auction, VCG, equilibrium construction, and brute-force oracles."""
from .core import (
    NEG_INF,
    AuctionError,
    AuctionInstance,
    Bidder,
    BidProfile,
    Declaration,
    Outcome,
    SlotSchedule,
    utility,
    validate_instance,
)
from .equilibrium import (
    bidder_optimality_gap,
    check_envy_free,
    check_nash,
    construct_equilibrium_bids,
)
from .general_bids import BidMatrix, run_general_auction, vcg_price_formula
from .io import InstanceDocument, dump_document, load_document, parse_document
from .mechanisms import (
    check_min_pay,
    run_gsp,
    run_range_topdown,
    run_topdown,
    run_topdown_flawed,
)
from .vcg import compute_chain, solve_max_matching, vcg_outcome

__version__ = "0.1.0"

__all__ = [
    "NEG_INF",
    "AuctionError",
    "AuctionInstance",
    "Bidder",
    "BidProfile",
    "BidMatrix",
    "Declaration",
    "InstanceDocument",
    "Outcome",
    "SlotSchedule",
    "bidder_optimality_gap",
    "check_envy_free",
    "check_min_pay",
    "check_nash",
    "compute_chain",
    "construct_equilibrium_bids",
    "dump_document",
    "load_document",
    "parse_document",
    "run_general_auction",
    "run_gsp",
    "run_range_topdown",
    "run_topdown",
    "run_topdown_flawed",
    "solve_max_matching",
    "utility",
    "validate_instance",
    "vcg_outcome",
    "vcg_price_formula",
]
