"""Outlier detection with Christoffel-function scores.

Explicit moment-matrix scoring with the scaled monomial feature map, a
kernelized regularized variant that works with arbitrary kernels (RBF in
particular), distance-based baseline detectors, precision-recall
evaluation, dataset preparation helpers and a synthetic Gaussian benchmark
generator. The ``cli`` module exposes all of it as a command-line tool.
"""

__version__ = "0.1.0"

from .baselines import knn_scores, ksp2_scores, ksp_scores, lowest_score_indices
from .christoffel import (
    DEFAULT_FEATURE_DIM_LIMIT,
    ChristoffelModel,
    FeatureDimensionError,
    FeatureMap,
    MomentMatrixError,
    apply_feature_map,
    build_feature_map,
    default_rho,
    default_sigma,
    feature_matrix,
    fit_kic,
    grid_scores,
    ic_scores,
    kic2_scores,
    kic_score,
    kic_scores_all,
)
from .dataio import (
    CsvFormatError,
    DataMatrix,
    SynthGaussianConfig,
    label_by_class,
    load_csv,
    normalize,
    synth_gaussian,
)
from .evaluation import BenchmarkTable, CellStats, PRCurve, auprc, pr_curve, summarize
from .kernels import (
    KernelSpec,
    KernelTriple,
    cross_vector,
    eval_kernel,
    gram_matrix,
    kernel_triple,
)
from .linalg import (
    ConvergenceError,
    NotPositiveDefiniteError,
    RidgeSolution,
    SpdFactorization,
    cg_ridge_solve,
    frobenius_norm,
    ridge_objective,
    ridge_objective_from_factor,
    spd_factor,
    spd_solve,
)
