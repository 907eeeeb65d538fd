"""Entropy of tree-shifts of finite type and of neural networks on Cayley trees."""

from .ctnn import (
    BasicSet,
    ChildCouplings,
    RegionCode,
    Template,
    admissible_patterns,
    critical_a,
    ctnn_entropy,
    dual_region_map,
    is_critical,
    tsft_from_basic,
    verify_critical_by_definition,
    verify_mosaic,
)
from .errors import (
    BoundaryParameter,
    CayleyEntropyError,
    InternalInconsistency,
    NumericalFailure,
    ParseError,
    ResourceLimitError,
)
from .separation import VertexSet, check_realizable, is_linearly_separable, realize
from .snre import (
    SNRE,
    Monomial,
    check_ln_d_criterion,
    construct_tsft_with_entropy,
    entropy_spectrum,
    entropy_tsft,
    enumerate_reduced,
    indicator_matrix,
    snre_from_tsft,
    spectral_radius,
    weighted_adjacency,
)
from .treeshift import (
    MarkovTreeShift,
    TwoBlock,
    count_blocks,
    entropy_estimate,
    enumerate_blocks,
    essential_symbols,
    prune_dead_symbols,
)

__version__ = "0.1.0"
