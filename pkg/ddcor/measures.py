"""
Dependence coefficients between a random vector and a scalar.

All functions are pure: given the same inputs and tie seed they return
bit-identical results. Orientation follows ``PairedSample``: ``x`` is the
vector argument and ``y`` the conditioning scalar.
"""

from typing import Optional, Tuple
import logging
import math

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

from .config import get_config
from .errors import (
    DegenerateResponseError,
    InsufficientSampleError,
    InvalidParameterError,
)
from .models import (
    CoefficientEstimate,
    Method,
    PairedSample,
    SortedPairedSample,
    as_matrix,
    as_vector,
    make_rng,
)

logger = logging.getLogger(__name__)

DEFAULT_HSIC_BANDWIDTH = math.sqrt(0.5)
DEFAULT_PCOR_SIGMA_SQ = 1.0

__all__ = [
    "gini_mean_difference",
    "sort_by_response",
    "ddc",
    "chatterjee_xi",
    "distance_correlation",
    "hsic",
    "projection_correlation",
    "compute",
]


def require_samples(n: int, minimum: int, what: str) -> None:
    if n < minimum:
        raise InsufficientSampleError(f"{what} needs at least {minimum} observations, got {n}")


def is_constant(x: np.ndarray) -> bool:
    return bool(np.all(x == x[0]))


def _blocks(n: int):
    block = get_config().block_size
    for start in range(0, n, block):
        yield start, min(start + block, n)


def _materialize(n: int) -> bool:
    cap = get_config().distance_cap
    if n > cap:
        logger.debug("n=%d exceeds distance cap %d; streaming distances", n, cap)
        return False
    return True


def pairwise_distances(x: np.ndarray) -> np.ndarray:
    """Full n x n Euclidean distance matrix."""
    return squareform(pdist(x))


def distance_row_sums(x: np.ndarray) -> Tuple[np.ndarray, float]:
    """Row sums of the distance matrix and the sum of its squared entries.

    O(n log n) for univariate data; otherwise the matrix is materialized up to
    the configured cap and streamed in fixed-size blocks beyond it.
    """
    n, p = x.shape
    if p == 1:
        values = x[:, 0] - x[:, 0].mean()
        order = np.argsort(values, kind="mergesort")
        sorted_values = values[order]
        prefix = np.concatenate(([0.0], np.cumsum(sorted_values)[:-1]))
        total = sorted_values.sum()
        index = np.arange(n)
        sorted_rows = (2 * index - n) * sorted_values + total - 2.0 * prefix
        row_sums = np.empty(n)
        row_sums[order] = sorted_rows
        sum_sq = 2.0 * n * float(np.dot(values, values))
        return row_sums, sum_sq

    if _materialize(n):
        distances = pairwise_distances(x)
        return distances.sum(axis=1), float(np.sum(distances * distances))

    row_sums = np.empty(n)
    sum_sq = 0.0
    for start, stop in _blocks(n):
        block = cdist(x[start:stop], x)
        row_sums[start:stop] = block.sum(axis=1)
        sum_sq += float(np.sum(block * block))
    return row_sums, sum_sq


def gini_mean_difference(sample) -> float:
    """Mean Euclidean distance over all unordered pairs of rows."""
    x = as_matrix(sample, "sample")
    n, p = x.shape
    require_samples(n, 2, "the Gini mean difference")
    if is_constant(x):
        return 0.0
    pairs = n * (n - 1) / 2.0

    if p == 1:
        ordered = np.sort(x[:, 0])
        weights = 2.0 * np.arange(1, n + 1) - n - 1
        return float(np.dot(weights, ordered)) / pairs

    if _materialize(n):
        return float(pdist(x).sum()) / pairs

    total = 0.0
    for start, stop in _blocks(n):
        total += float(cdist(x[start:stop], x).sum())
    return total / 2.0 / pairs


def _tie_broken_order(keys: np.ndarray, tie_seed: int) -> np.ndarray:
    # random secondary key: tied blocks come out in uniformly random order
    jitter = make_rng(tie_seed).random(keys.shape[0])
    return np.lexsort((jitter, keys))


def sort_by_response(sample: PairedSample, tie_seed: int = 0) -> SortedPairedSample:
    return SortedPairedSample(
        x=sample.x,
        y=sample.y,
        permutation=_tie_broken_order(sample.y, tie_seed),
        tie_seed=tie_seed,
    )


def adjacent_distance_sum(sorted_x: np.ndarray) -> float:
    steps = np.diff(sorted_x, axis=0)
    if sorted_x.shape[1] == 1:
        return float(np.abs(steps[:, 0]).sum())
    return float(np.sqrt(np.einsum("ij,ij->i", steps, steps)).sum())


def ddc_from_delta(sorted_sample: SortedPairedSample, delta_hat: float) -> float:
    """DDC with a precomputed Gini mean difference of x."""
    if delta_hat == 0.0:
        return 0.0
    n = sorted_sample.n
    return 1.0 - adjacent_distance_sum(sorted_sample.sorted_x) / ((n - 1) * delta_hat)


def ddc(sample: PairedSample, tie_seed: int = 0) -> float:
    """Differential distance correlation DDC_n(x | y)."""
    require_samples(sample.n, 2, "DDC")
    if is_constant(sample.x):
        return 0.0
    return ddc_from_delta(sort_by_response(sample, tie_seed), gini_mean_difference(sample.x))


def chatterjee_xi(x, y, tie_seed: int = 0) -> float:
    """Chatterjee's rank coefficient: sort by x, measure how y follows."""
    x = as_vector(x, "x")
    y = as_vector(y, "y")
    n = x.shape[0]
    if y.shape[0] != n:
        raise InvalidParameterError(f"x has {n} values but y has {y.shape[0]}")
    require_samples(n, 2, "Chatterjee's coefficient")
    if is_constant(y):
        raise DegenerateResponseError("Chatterjee's coefficient is undefined for constant y")

    y_sorted_by_x = y[_tie_broken_order(x, tie_seed)]
    ordered = np.sort(y)
    r = np.searchsorted(ordered, y_sorted_by_x, side="right").astype(float)
    l = n - np.searchsorted(ordered, y_sorted_by_x, side="left").astype(float)
    numerator = n * np.abs(np.diff(r)).sum()
    denominator = 2.0 * np.sum(l * (n - l))
    return float(1.0 - numerator / denominator)


def double_center(matrix: np.ndarray) -> np.ndarray:
    row_means = matrix.mean(axis=1, keepdims=True)
    col_means = matrix.mean(axis=0, keepdims=True)
    return matrix - row_means - col_means + matrix.mean()


def double_centered_distances(x: np.ndarray) -> np.ndarray:
    return double_center(pairwise_distances(x))


def distance_correlation(x, y) -> float:
    """Squared sample distance correlation (V-statistic), in [0, 1]."""
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    require_samples(x.shape[0], 2, "distance correlation")
    a = double_centered_distances(x)
    b = double_centered_distances(y)
    return dcor_from_centered(a, b)


def dcor_from_centered(a: np.ndarray, b: np.ndarray) -> float:
    dvar_x = float(np.mean(a * a))
    dvar_y = float(np.mean(b * b))
    if dvar_x <= 0.0 or dvar_y <= 0.0:
        return 0.0
    dcov = float(np.mean(a * b))
    return min(max(dcov / math.sqrt(dvar_x * dvar_y), 0.0), 1.0)


def _check_positive(value: float, name: str) -> None:
    if not value > 0.0:
        raise InvalidParameterError(f"{name} must be positive, got {value}")


def gaussian_gram(x: np.ndarray, bandwidth: float) -> np.ndarray:
    sq = squareform(pdist(x, "sqeuclidean"))
    return np.exp(-sq / (2.0 * bandwidth ** 2))


def hsic(x, y, bandwidth: float = DEFAULT_HSIC_BANDWIDTH) -> float:
    """Biased Gaussian-kernel HSIC, trace(KHLH) / n^2."""
    _check_positive(bandwidth, "bandwidth")
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    n = x.shape[0]
    require_samples(n, 4, "HSIC")
    k_centered = double_center(gaussian_gram(x, bandwidth))
    l = gaussian_gram(y, bandwidth)
    return float(np.sum(k_centered * l)) / n ** 2


def arccos_kernel(z: np.ndarray, sigma_sq: float) -> np.ndarray:
    gram = z @ z.T
    scale = sigma_sq + np.diag(gram)
    cosine = (sigma_sq + gram) / np.sqrt(np.outer(scale, scale))
    angles = np.arccos(np.clip(cosine, -1.0, 1.0))
    np.fill_diagonal(angles, 0.0)
    return angles


def pcov_from_kernels(a: np.ndarray, b: np.ndarray,
                      a_rows: Optional[np.ndarray] = None,
                      b_rows: Optional[np.ndarray] = None) -> float:
    """U-statistic of A12*B12 - 2*A12*B13 + A12*B34 over distinct indices."""
    n = a.shape[0]
    if a_rows is None:
        a_rows = a.sum(axis=1)
    if b_rows is None:
        b_rows = b.sum(axis=1)
    s_ab = float(np.sum(a * b))
    s_rows = float(np.dot(a_rows, b_rows))
    pairs = n * (n - 1)
    triples = pairs * (n - 2)
    quads = triples * (n - 3)
    t1 = s_ab / pairs
    t2 = (s_rows - s_ab) / triples
    t3 = (a_rows.sum() * b_rows.sum() - 4.0 * s_rows + 2.0 * s_ab) / quads
    return t1 - 2.0 * t2 + t3


def pcor_from_kernels(a: np.ndarray, b: np.ndarray) -> float:
    pxx = pcov_from_kernels(a, a)
    pyy = pcov_from_kernels(b, b)
    if pxx <= 0.0 or pyy <= 0.0:
        return 0.0
    return pcov_from_kernels(a, b) / math.sqrt(pxx * pyy)


def projection_correlation(x, y, sigma_sq: float = DEFAULT_PCOR_SIGMA_SQ) -> float:
    """Improved projection correlation with the arccos kernel."""
    _check_positive(sigma_sq, "sigma_sq")
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    require_samples(x.shape[0], 4, "projection correlation")
    return pcor_from_kernels(arccos_kernel(x, sigma_sq), arccos_kernel(y, sigma_sq))


def compute(
    method: Method,
    sample: PairedSample,
    tie_seed: int = 0,
    bandwidth: float = DEFAULT_HSIC_BANDWIDTH,
    sigma_sq: float = DEFAULT_PCOR_SIGMA_SQ,
) -> CoefficientEstimate:
    """Evaluate one coefficient on a sample.

    DDC measures how well y determines x; Chatterjee's coefficient is taken in
    the same direction (sort by y, rank x), so x must be univariate for it.
    DC, HSIC and PCor are symmetric.
    """
    method = Method.parse(method)
    params = {}
    if method is Method.DDC:
        value = ddc(sample, tie_seed)
        params["tie_seed"] = tie_seed
    elif method is Method.CHATTERJEE:
        if sample.p != 1:
            raise InvalidParameterError("Chatterjee's coefficient needs a univariate x")
        value = chatterjee_xi(sample.y, sample.x[:, 0], tie_seed)
        params["tie_seed"] = tie_seed
    elif method is Method.DC:
        value = distance_correlation(sample.x, sample.y)
        params["estimator"] = "v_statistic_squared"
    elif method is Method.HSIC:
        value = hsic(sample.x, sample.y, bandwidth)
        params.update(bandwidth=bandwidth, estimator="v_statistic")
    else:
        value = projection_correlation(sample.x, sample.y, sigma_sq)
        params["sigma_sq"] = sigma_sq
    return CoefficientEstimate(method=method, value=value, n=sample.n, p=sample.p, params=params)
