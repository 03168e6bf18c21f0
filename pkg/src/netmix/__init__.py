"""Edge-probability estimation for undirected networks by model mixing.

Fit a catalog of candidate models (block models across a range of orders plus
a low-rank reconstruction) on the training part of a dyad split, then combine
them with weights learned from the held-out entries: hard selection,
exponential weights, least squares, or non-negative least squares.
"""

from .candidates import (
    CandidateEstimate,
    Family,
    SpectralBasis,
    build_candidates,
    dcbm_estimate,
    default_usvt_rank,
    export_candidates,
    leading_eigen,
    sbm_estimate,
    spectral_clustering,
    spherical_spectral_clustering,
    usvt_estimate,
)
from .errors import (
    DegenerateGramError,
    InfeasibleDegreeError,
    ParseError,
    UndefinedAUCError,
)
from .evaluate import (
    ExperimentConfig,
    ExperimentReport,
    LinkPredSplit,
    auc,
    linkpred_experiment,
    linkpred_scores,
    linkpred_split,
    rel_frob,
    run_experiment,
    write_report_csv,
)
from .graph import (
    Graph,
    GraphStats,
    ProbMatrix,
    clip_unit,
    dump_edge_list,
    dumps_edge_list,
    graph_stats,
    load_edge_list,
    load_prob_matrix,
    parse_edge_list,
    prob_matrix_from_csv,
    prob_matrix_to_csv,
    read_prob_matrix,
    save_prob_matrix,
    write_prob_matrix,
)
from .mixing import (
    ConeProjection,
    GramSummary,
    MixResult,
    PartitionCertificate,
    Strategy,
    combine,
    ecv_select,
    exp_mix,
    gram_summary,
    kkt_residual,
    mix,
    nnl_mix,
    nnls_coordinate_descent,
    ols_mix,
    oracle_cone_projection,
    partition_bound,
    simplex_min_quadratic,
    validation_errors,
)
from .pipeline import StitchResult, estimate_graph
from .simulate import (
    ModelKind,
    ModelSpec,
    expected_degree,
    generate_matrix,
    graphon_kernel,
    graphon_matrix,
    lsm_from_latents,
    lsm_matrix,
    sample_adjacency,
    sbm6_kernel,
    sbm_matrix,
)
from .splitting import (
    DyadMask,
    complement,
    dump_mask,
    load_mask,
    restrict,
    sample_dyad_split,
    train_adjacency,
)

__version__ = "0.1.0"
