"""Uniform embeddings of trees and median graphs into sparse Hilbert-space
vectors, with empirical compression and dilatation measurement."""

from .cube import (
    CubeSpec,
    Hyperplane,
    MedianGraph,
    MedianVerdict,
    NormalCubePath,
    cube_embed,
    cube_embedder,
    dimension_by_cliques,
    gen_cube,
    hyperplanes,
    index_delta_check,
    median_from_tree,
    normal_cube_path,
    path_index_map,
    separates,
    square_closure_classes,
    tree_product_graph,
    validate_median,
)
from .errors import (
    BudgetExceededError,
    CubeSpanError,
    KeyCollisionError,
    MedEmbedError,
    NonTerminationError,
    SideComputationError,
    SpaceFormatError,
)
from .metrics import (
    BoundCheck,
    BoundCurve,
    CompressionProfile,
    PairSampler,
    ProductSpace,
    ProfileEntry,
    bourgain_consistency,
    check_profile_against,
    default_bound_curves,
    edge_dilatation_bound,
    embedding_matrix,
    l1_l2_compare,
    product_embed,
    profile,
    unit_identity_max_rel_error,
)
from .sparse import SparseVector, allocate_keys, vec_distance
from .spacefile import (
    SpaceFile,
    build_space,
    load_spacefile,
    save_spacefile,
    to_spacefile,
)
from .tree import (
    RootedTree,
    TreeSpec,
    gen_tree,
    geodesic_edges,
    meeting_point,
    tree_embed,
    tree_embedder,
)
from .weights import (
    WeightFunction,
    WeightReport,
    build_weight_report,
    deficit_constant,
    deficit_scan,
    diff_sq_sum,
    diff_sq_tail_bound,
    find_monotone_cutoff,
    parse_weight,
    sq_partial_sum,
    sq_partial_sums,
    xi_eval,
)

__version__ = "0.1.0"
