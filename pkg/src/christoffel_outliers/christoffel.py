"""Christoffel-function outlier scorers.

The explicit route maps points through the scaled monomial feature map
v(x), forms the empirical moment matrix M = (1/n) sum v(x_i) v(x_i)^T and
scores a query by q(x) = v(x)^T M^{-1} v(x). Large q means far from the
shape of the point cloud, i.e. outlying. The feature dimension
s = binomial(p + d, d) explodes with the feature count p, which is what
the kernelized route avoids.

The kernelized route scores by the regularized quantity

    phi(rho) = gamma - g^T (rho I + G)^{-1} g,

built only from kernel evaluations: G is the scaled training Gram matrix,
g the scaled query cross-kernel vector and gamma the query self-kernel.
For the polynomial kernel, phi(rho) / rho is a lower bound on q(x) and
converges to it as rho -> 0; any other positive-definite kernel (RBF in
particular) can be substituted, which the explicit route cannot do.

Default hyperparameter rules and the two-stage filtered variant live here
as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validate import as_matrix, as_vector
from .baselines import lowest_score_indices
from .kernels import KernelSpec, cross_vector, gram_matrix
from .linalg import (
    NotPositiveDefiniteError,
    SpdFactorization,
    frobenius_norm,
    ridge_objective_from_factor,
    spd_factor,
    spd_solve,
)

# Beyond this feature dimension a dense s x s solve is hopeless on desk
# hardware; fail fast instead of exhausting memory.
DEFAULT_FEATURE_DIM_LIMIT = 20000


class FeatureDimensionError(ValueError):
    """The monomial feature dimension binomial(p + d, d) exceeds the limit."""


class MomentMatrixError(ValueError):
    """The empirical moment matrix is not positive definite."""


@dataclass(frozen=True)
class FeatureMap:
    """Scaled monomial basis of all exponents alpha with |alpha| <= degree.

    ``exponents`` holds one alpha per row in graded lexicographic order
    (total degree ascending, ties lexicographic) and ``coefficients`` the
    matching sqrt multinomial weights, chosen so that

        v(x) . v(y) = (1 + x.y)^degree.
    """

    exponents: np.ndarray
    coefficients: np.ndarray
    degree: int

    @property
    def dimension(self) -> int:
        return self.exponents.shape[0]

    @property
    def input_dim(self) -> int:
        return self.exponents.shape[1]


@dataclass(frozen=True)
class ChristoffelModel:
    """Fitted kernelized scorer.

    Holds the kernel, the regularization rho, the training rows and a
    factorization of (rho I + G_scaled) with G_scaled the Gram matrix
    divided by n.
    """

    kernel: KernelSpec
    rho: float
    training: np.ndarray
    factorization: SpdFactorization

    @property
    def n(self) -> int:
        return self.training.shape[0]

    @property
    def p(self) -> int:
        return self.training.shape[1]


def _compositions(total: int, parts: int):
    """All nonnegative integer vectors of the given length summing to total,
    in ascending lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head, *rest)


def build_feature_map(
    p: int, d: int, dim_limit: int = DEFAULT_FEATURE_DIM_LIMIT
) -> FeatureMap:
    """Construct the scaled monomial basis for p features and degree d.

    Raises:
        FeatureDimensionError: if binomial(p + d, d) exceeds ``dim_limit``.
    """
    if p < 1 or d < 1:
        raise ValueError("p and d must be positive integers")
    s = math.comb(p + d, d)
    if s > dim_limit:
        raise FeatureDimensionError(
            f"feature dimension too large: binomial({p + d}, {d}) = {s} "
            f"exceeds the limit {dim_limit}"
        )
    exponents = []
    coefficients = []
    d_fact = math.factorial(d)
    for total in range(d + 1):
        tail_fact = math.factorial(d - total)
        for alpha in _compositions(total, p):
            denom = tail_fact
            for a in alpha:
                denom *= math.factorial(a)
            exponents.append(alpha)
            coefficients.append(math.sqrt(d_fact / denom))
    assert len(exponents) == s
    return FeatureMap(
        exponents=np.array(exponents, dtype=np.int64),
        coefficients=np.array(coefficients, dtype=float),
        degree=d,
    )


def apply_feature_map(fm: FeatureMap, x) -> np.ndarray:
    """Evaluate the scaled monomial vector v(x)."""
    x = as_vector(x, "x")
    if x.shape[0] != fm.input_dim:
        raise ValueError(
            f"dimension mismatch: feature map expects {fm.input_dim} features, got {x.shape[0]}"
        )
    return _apply_rows(fm, x[None, :])[0]


def _apply_rows(fm: FeatureMap, X: np.ndarray) -> np.ndarray:
    # (n, s, p) intermediate; chunk rows to bound memory for large maps.
    n = X.shape[0]
    s = fm.dimension
    out = np.empty((n, s))
    chunk = max(1, int(4_000_000 // max(1, s * fm.input_dim)))
    for start in range(0, n, chunk):
        block = X[start : start + chunk]
        powers = block[:, None, :] ** fm.exponents[None, :, :]
        out[start : start + chunk] = powers.prod(axis=2) * fm.coefficients
    return out


def feature_matrix(fm: FeatureMap, X) -> np.ndarray:
    """Stack v(x_i) for every row of X into an (n, s) matrix."""
    X = as_matrix(X)
    if X.shape[1] != fm.input_dim:
        raise ValueError(
            f"dimension mismatch: feature map expects {fm.input_dim} features, got {X.shape[1]}"
        )
    return _apply_rows(fm, X)


def _ic_scores_from_map(fm: FeatureMap, X: np.ndarray, queries: np.ndarray) -> np.ndarray:
    n = X.shape[0]
    phi = feature_matrix(fm, X)
    M = phi.T @ phi / n
    M = 0.5 * (M + M.T)
    try:
        factor = spd_factor(M, jitter_scales=())
    except NotPositiveDefiniteError as exc:
        raise MomentMatrixError(
            "moment matrix not positive definite; the data may lie on a "
            f"degree-{fm.degree} variety (need more points or a lower degree)"
        ) from exc
    Q = feature_matrix(fm, queries)
    solved = spd_solve(factor, Q.T)
    scores = np.einsum("sm,sm->m", Q.T, solved)
    return np.maximum(scores, 0.0)


def ic_scores(
    X, queries, d: int, dim_limit: int = DEFAULT_FEATURE_DIM_LIMIT
) -> np.ndarray:
    """Moment-matrix scores q(x) = v(x)^T M^{-1} v(x) for each query row.

    The moment matrix is factorized without jitter: masking a singular M
    would silently change every score, so degeneracy raises instead.

    Raises:
        FeatureDimensionError: if the monomial basis exceeds ``dim_limit``.
        MomentMatrixError: if M is not positive definite.
    """
    X = as_matrix(X)
    queries = as_matrix(queries, "queries")
    if X.shape[1] != queries.shape[1]:
        raise ValueError("X and queries must have the same feature count")
    fm = build_feature_map(X.shape[1], d, dim_limit=dim_limit)
    return _ic_scores_from_map(fm, X, queries)


def default_rho(G_scaled, C: float) -> float:
    """Regularization rule rho = ||G_scaled||_F / (C sqrt(n)).

    ``G_scaled`` is the Gram matrix already divided by n, matching how the
    fitted model scales it.
    """
    if not C > 0:
        raise ValueError("C must be positive")
    G_scaled = np.asarray(G_scaled, dtype=float)
    if G_scaled.ndim != 2 or G_scaled.shape[0] != G_scaled.shape[1]:
        raise ValueError("G_scaled must be a square matrix")
    norm = frobenius_norm(G_scaled)
    if norm == 0.0:
        raise ValueError("degenerate Gram matrix: Frobenius norm is zero")
    return norm / (C * math.sqrt(G_scaled.shape[0]))


def default_sigma(p: int, variant: str = "KIC") -> float:
    """RBF lengthscale rule: sqrt(p)/2 for KIC, sqrt(p)/4 for KIC2.

    The sqrt(p) reflects the typical distance from the origin of a
    zero-mean unit-variance point in p dimensions.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if variant == "KIC":
        return math.sqrt(p) / 2.0
    if variant == "KIC2":
        return math.sqrt(p) / 4.0
    raise ValueError(f"variant must be 'KIC' or 'KIC2', got {variant!r}")


def fit_kic(X, kernel: KernelSpec, rho: float) -> ChristoffelModel:
    """Fit the kernelized scorer: factorize (rho I + G/n) over the rows of X."""
    X = as_matrix(X)
    if not rho > 0:
        raise ValueError("rho must be positive")
    n = X.shape[0]
    G_scaled = gram_matrix(kernel, X) / n
    A = G_scaled + rho * np.eye(n)
    factor = spd_factor(A)
    return ChristoffelModel(kernel=kernel, rho=float(rho), training=X, factorization=factor)


def kic_score(model: ChristoffelModel, x) -> float:
    """Kernelized score phi(rho) = gamma - g^T (rho I + G)^{-1} g at one query.

    g is scaled by 1/sqrt(n) and G by 1/n (the moment scaling); gamma is the
    raw self-kernel value. The value is evaluated through the equivalent
    ridge objective at the solved coefficients, which avoids the
    catastrophic cancellation of the literal difference when rho is tiny,
    and is clamped at zero.
    """
    x = as_vector(x, "x")
    if x.shape[0] != model.p:
        raise ValueError(
            f"dimension mismatch: model expects {model.p} features, got {x.shape[0]}"
        )
    g, gamma = cross_vector(model.kernel, model.training, x)
    g = g / math.sqrt(model.n)
    theta = spd_solve(model.factorization, g)
    return ridge_objective_from_factor(model.factorization, g, gamma, theta)


def kic_scores_all(X, kernel: KernelSpec, rho: float) -> np.ndarray:
    """Fit on X and score every training row.

    One factorization is shared across all rows; each row then goes through
    exactly the same path as a single ``kic_score`` call, so the result
    matches per-point scoring bit for bit.
    """
    model = fit_kic(X, kernel, rho)
    return np.array([kic_score(model, row) for row in model.training])


def kic2_scores(X, kernel: KernelSpec, C: float, alpha: float = 0.6) -> np.ndarray:
    """Two-stage filtered kernelized scores.

    Stage one scores all of X with rho from ``default_rho``. The
    ceil(alpha * n) lowest-scoring rows (ties by position) form the
    filtered set; stage two recomputes rho on that set, refits and scores
    every original row with the stage-two model.
    """
    X = as_matrix(X)
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    n = X.shape[0]
    G_scaled = gram_matrix(kernel, X) / n
    rho1 = default_rho(G_scaled, C)
    stage1 = kic_scores_all(X, kernel, rho1)
    keep = lowest_score_indices(stage1, alpha)
    filtered = X[keep]
    m = filtered.shape[0]
    G2_scaled = gram_matrix(kernel, filtered) / m
    rho2 = default_rho(G2_scaled, C)
    model = fit_kic(filtered, kernel, rho2)
    return np.array([kic_score(model, row) for row in X])


def grid_scores(
    model: ChristoffelModel,
    x_range: tuple[float, float, int],
    y_range: tuple[float, float, int],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Evaluate the fitted scorer on a regular 2-d grid.

    Returns (xs, ys, scores) with scores[i, j] the score at (xs[j], ys[i]),
    the layout contour plotters expect.
    """
    if model.p != 2:
        raise ValueError("grid scoring requires a model trained on 2-feature data")
    xs = _grid_axis(x_range, "x_range")
    ys = _grid_axis(y_range, "y_range")
    scores = np.empty((ys.shape[0], xs.shape[0]))
    for i, yv in enumerate(ys):
        for j, xv in enumerate(xs):
            scores[i, j] = kic_score(model, np.array([xv, yv]))
    return xs, ys, scores


def _grid_axis(rng: tuple[float, float, int], name: str) -> np.ndarray:
    lo, hi, steps = rng
    steps = int(steps)
    if steps < 2:
        raise ValueError(f"{name} must request at least 2 steps")
    if not hi > lo:
        raise ValueError(f"{name} must have hi > lo")
    return np.linspace(float(lo), float(hi), steps)
