"""Sparse PCA with a shared support, solved by no-good cut generation.

The data enter only through squared column norms and small Gram spectra,
so the p x p covariance is never formed.
"""

from .baselines import PCAResult, brute_force, classic_pca, greedy_support
from .engine import (
    OPTIMAL,
    UPPER_BOUNDED,
    EngineConfig,
    IterationRecord,
    SolveReport,
    apriori_bound,
    gap_bounds,
    generate_cuts,
    separate,
    solve,
    worstcase_matrix,
)
from .errors import (
    CutBudgetExceeded,
    EmptyPatternSet,
    EmptySupport,
    GeoSPCAError,
    Infeasible,
    NodeLimitExceeded,
    NonFiniteInput,
    ParseError,
    ShapeError,
    TooLarge,
)
from .io import load_matrix, synth
from .linalg import (
    DataMatrix,
    SpectralSummary,
    as_support,
    center,
    loadings_from_left_basis,
    pca_residual_norms,
    residual,
    spectral_summary,
    variance_objective,
)
from .master import (
    BlockSpec,
    CommonMaster,
    Cut,
    CutPool,
    PatternSet,
    solve_block_master,
    solve_common_master,
    solve_pattern_master,
)
from .variants import (
    BlockSolveReport,
    GridPatternSpec,
    StructuredReport,
    generate_patterns,
    prefilter_patterns,
    read_patterns,
    solve_disjoint_blocks,
    solve_structured,
    write_patterns,
)

__version__ = "0.1.0"
