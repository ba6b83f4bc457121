"""Clustering of high-dimensional sparse binary data.

Pipeline: estimate observable moments from the binary matrix, recover
mixture parameters by whitening plus joint slice diagonalization, refine
them with EM, and read clusters off the posterior.  Subpackages expose the
stages separately; the ``binmix`` CLI and the HTTP service wrap them.
"""

from .analysis import (
    ClusterModel,
    ClusterReport,
    RelevanceTable,
    adjusted_rand_index,
    assign,
    build_report,
    kmeans_baseline,
    relevance,
    report_payload,
    stability_check,
)
from .dataset import (
    BinaryDataset,
    GroundTruth,
    SplitPair,
    Vocabulary,
    generate_synthetic,
    ingest,
    normalize_code,
    overlapping_split,
    sample_from_params,
)
from .decomposition import (
    AnchorChoice,
    asvtd,
    asvtd_with_anchor,
    recover_weights,
    select_anchor,
    svtd_exact,
)
from .em import EmConfig, EmTrace, em_refine, log_likelihood, posterior, posteriors
from .errors import (
    AnchorNotFoundError,
    BinmixError,
    EmptyDatasetError,
    InvalidCodeError,
    ParameterError,
    ParseError,
    RankDeficiencyError,
    RankInfeasibleError,
)
from .moments import (
    BiasBound,
    MomentSet,
    SliceMatrix,
    WhiteningBasis,
    bias_bounds,
    estimate_m1,
    estimate_m2,
    feature_slice,
    iter_feature_slices,
    whiten,
)
from .params import MixtureParams

__version__ = "0.1.0"
