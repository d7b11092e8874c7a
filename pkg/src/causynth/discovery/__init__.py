from .citest import CiTestResult, partial_correlation_test
from .data import PairsData
from .mask import EdgeMask, build_candidate_mask
from .constraint import discover_constraint
from .score import discover_score
from .lingam import causal_order, discover_lingam
from .vote import validate_edges, vote

__all__ = [
    "CiTestResult", "partial_correlation_test", "PairsData",
    "EdgeMask", "build_candidate_mask",
    "discover_constraint", "discover_score", "discover_lingam",
    "causal_order", "validate_edges", "vote",
]
