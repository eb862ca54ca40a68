"""
Null distribution of DDC: distance variance, the plug-in asymptotic variance
and one-sided normal p-values.

Under independence and a finite fourth moment of x, sqrt(n) * DDC_n is
asymptotically normal with variance dVar(x)^2 / Delta^2. The moment condition
is assumed, not checked.
"""

from typing import Tuple
import logging
import math

import numpy as np
from scipy.stats import norm

from .errors import DegenerateSampleError, DegenerateVarianceError, InvalidParameterError
from .measures import (
    double_centered_distances,
    distance_row_sums,
    gini_mean_difference,
    is_constant,
    require_samples,
)
from .models import DistanceMoments, ReferenceDistribution, VarianceEstimate, as_matrix

logger = logging.getLogger(__name__)

CHATTERJEE_NULL_VARIANCE = 2.0 / 5.0


def distance_variance_sq(x, fast: bool = True) -> float:
    """Squared sample distance variance (1/n^2) * sum(A_kl^2).

    ``fast`` uses the row-sum identity (O(n log n) when x is univariate);
    otherwise the double-centered matrix is formed explicitly.
    """
    x = as_matrix(x, "x")
    n = x.shape[0]
    require_samples(n, 2, "distance variance")
    if is_constant(x):
        return 0.0
    if not fast:
        centered = double_centered_distances(x)
        return float(np.mean(centered * centered))

    row_sums, sum_sq = distance_row_sums(x)
    row_means = row_sums / n
    grand_mean = row_sums.sum() / n ** 2
    value = sum_sq / n ** 2 + grand_mean ** 2 - 2.0 * float(np.dot(row_means, row_means)) / n
    return max(value, 0.0)


def ddc_variance_estimate(x) -> VarianceEstimate:
    x = as_matrix(x, "x")
    n = x.shape[0]
    require_samples(n, 2, "the asymptotic variance")
    if is_constant(x):
        raise DegenerateSampleError("all rows of x are equal; the asymptotic variance is undefined")
    return VarianceEstimate.from_components(
        dvar_sq=distance_variance_sq(x),
        delta_hat=gini_mean_difference(x),
        n=n,
    )


def ddc_asymptotic_pvalue(ddc_value: float, variance: VarianceEstimate) -> float:
    """Upper-tail p-value of sqrt(n) * DDC_n / sigma_hat."""
    if not variance.sigma_hat_sq > 0.0:
        raise DegenerateVarianceError("the estimated asymptotic variance is zero")
    if variance.n < 2:
        raise InvalidParameterError(f"n must be at least 2, got {variance.n}")
    z = math.sqrt(variance.n) * ddc_value / math.sqrt(variance.sigma_hat_sq)
    return float(norm.sf(z))


def chatterjee_asymptotic_pvalue(xi_value: float, n: int) -> float:
    if n < 2:
        raise InvalidParameterError(f"n must be at least 2, got {n}")
    z = math.sqrt(n) * xi_value / math.sqrt(CHATTERJEE_NULL_VARIANCE)
    return float(norm.sf(z))


def distance_moments(x) -> DistanceMoments:
    """U-statistic estimates of E||X1-X2||^2, (E||X1-X2||)^2 and E(||X1-X2|| ||X1-X3||)."""
    x = as_matrix(x, "x")
    n = x.shape[0]
    require_samples(n, 4, "distance moments")
    row_sums, sum_sq = distance_row_sums(x)
    centered = x - x.mean(axis=0)
    norms_sq = np.einsum("ij,ij->i", centered, centered)
    row_sq_sums = n * norms_sq + norms_sq.sum()
    row_sums_sq = float(np.dot(row_sums, row_sums))
    cross = row_sums_sq - float(row_sq_sums.sum())
    # products over disjoint ordered pairs (i, j), (k, l)
    total = float(row_sums.sum())
    disjoint = total * total - 4.0 * row_sums_sq + 2.0 * sum_sq
    return DistanceMoments(
        mean_sq_distance=sum_sq / (n * (n - 1)),
        squared_mean_distance=disjoint / (n * (n - 1) * (n - 2) * (n - 3)),
        cross_moment=cross / (n * (n - 1) * (n - 2)),
        n=n,
    )


def reference_sigma_sq(dist: ReferenceDistribution) -> float:
    dist = ReferenceDistribution.parse(dist)
    if dist is ReferenceDistribution.STANDARD_NORMAL:
        return math.pi / 3.0 - math.sqrt(3.0) + 1.0
    return 2.0 / 5.0


def reference_gini(dist: ReferenceDistribution) -> float:
    dist = ReferenceDistribution.parse(dist)
    if dist is ReferenceDistribution.STANDARD_NORMAL:
        return 2.0 / math.sqrt(math.pi)
    return 1.0 / 3.0


def reference_dvar_sq(dist: ReferenceDistribution) -> float:
    return reference_sigma_sq(dist) * reference_gini(dist) ** 2


def reference_moments(dist: ReferenceDistribution) -> Tuple[float, float, float]:
    """(E||X1-X2||^2, (E||X1-X2||)^2, E(||X1-X2|| ||X1-X3||)) in closed form."""
    dist = ReferenceDistribution.parse(dist)
    if dist is ReferenceDistribution.STANDARD_UNIFORM:
        return 1.0 / 6.0, 1.0 / 9.0, 7.0 / 60.0
    mean_sq = 2.0
    squared_mean = 4.0 / math.pi
    cross = (mean_sq + squared_mean - reference_dvar_sq(dist)) / 2.0
    return mean_sq, squared_mean, cross


def bivariate_normal_ddc(rho: float) -> float:
    """Population DDC of a standard bivariate normal pair with correlation rho."""
    if not -1.0 <= rho <= 1.0:
        raise InvalidParameterError(f"rho must lie in [-1, 1], got {rho}")
    return 1.0 - math.sqrt(1.0 - rho ** 2)
