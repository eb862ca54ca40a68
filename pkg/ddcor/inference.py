"""
Independence tests: asymptotic p-values for DDC and Chatterjee's
coefficient, permutation p-values for DC, HSIC and PCor, and Monte-Carlo power.

Every work unit (a permutation block, a replication) owns a generator seeded
from (master seed, unit index), so results do not depend on the worker count
or on completion order.
"""

from typing import Callable, Optional, Tuple
import logging
import math

import numpy as np
from joblib import Parallel, delayed

from .asymptotics import (
    chatterjee_asymptotic_pvalue,
    ddc_asymptotic_pvalue,
    ddc_variance_estimate,
)
from .config import get_config
from .errors import InvalidParameterError
from .measures import (
    DEFAULT_HSIC_BANDWIDTH,
    DEFAULT_PCOR_SIGMA_SQ,
    arccos_kernel,
    chatterjee_xi,
    compute,
    dcor_from_centered,
    ddc_from_delta,
    double_center,
    double_centered_distances,
    gaussian_gram,
    gini_mean_difference,
    is_constant,
    pcov_from_kernels,
    require_samples,
    sort_by_response,
)
from .models import (
    Method,
    PairedSample,
    PSource,
    SimulationSpec,
    TestConfig,
    TestResult,
    derive_seed,
    make_rng,
)

logger = logging.getLogger(__name__)

# permuted statistics within this relative distance of the observed one count as ties
_TIE_TOLERANCE = 1e-12

Statistic = Callable[[np.ndarray], float]


def _resolve_jobs(n_jobs: Optional[int]) -> int:
    return get_config().n_jobs if n_jobs is None else n_jobs


def permutation_statistic(
    method: Method,
    sample: PairedSample,
    tie_seed: int = 0,
    bandwidth: float = DEFAULT_HSIC_BANDWIDTH,
    sigma_sq: float = DEFAULT_PCOR_SIGMA_SQ,
) -> Statistic:
    """Statistic as a function of a permutation applied to the conditioner.

    Everything that does not depend on the pairing (Gini mean difference,
    centered matrices, self-covariances) is computed once.
    """
    method = Method.parse(method)
    n = sample.n
    y_column = sample.y[:, np.newaxis]

    if method is Method.DDC:
        require_samples(n, 2, "DDC")
        delta_hat = 0.0 if is_constant(sample.x) else gini_mean_difference(sample.x)

        def statistic(perm: np.ndarray) -> float:
            return ddc_from_delta(sort_by_response(sample.permuted(perm), tie_seed), delta_hat)

    elif method is Method.CHATTERJEE:
        if sample.p != 1:
            raise InvalidParameterError("Chatterjee's coefficient needs a univariate x")
        ranked = sample.x[:, 0]

        def statistic(perm: np.ndarray) -> float:
            return chatterjee_xi(sample.y[perm], ranked, tie_seed)

    elif method is Method.DC:
        require_samples(n, 2, "distance correlation")
        a = double_centered_distances(sample.x)
        b = double_centered_distances(y_column)
        dvar_x = float(np.mean(a * a))
        dvar_y = float(np.mean(b * b))

        def statistic(perm: np.ndarray) -> float:
            if dvar_x <= 0.0 or dvar_y <= 0.0:
                return 0.0
            return float(np.mean(a * b[np.ix_(perm, perm)])) / math.sqrt(dvar_x * dvar_y)

    elif method is Method.HSIC:
        if not bandwidth > 0.0:
            raise InvalidParameterError(f"bandwidth must be positive, got {bandwidth}")
        require_samples(n, 4, "HSIC")
        k_centered = double_center(gaussian_gram(sample.x, bandwidth))
        l = gaussian_gram(y_column, bandwidth)

        def statistic(perm: np.ndarray) -> float:
            return float(np.sum(k_centered * l[np.ix_(perm, perm)])) / n ** 2

    else:
        if not sigma_sq > 0.0:
            raise InvalidParameterError(f"sigma_sq must be positive, got {sigma_sq}")
        require_samples(n, 4, "projection correlation")
        a = arccos_kernel(sample.x, sigma_sq)
        b = arccos_kernel(y_column, sigma_sq)
        a_rows = a.sum(axis=1)
        b_rows = b.sum(axis=1)
        pxx = pcov_from_kernels(a, a, a_rows, a_rows)
        pyy = pcov_from_kernels(b, b, b_rows, b_rows)

        def statistic(perm: np.ndarray) -> float:
            if pxx <= 0.0 or pyy <= 0.0:
                return 0.0
            pxy = pcov_from_kernels(a, b[np.ix_(perm, perm)], a_rows, b_rows[perm])
            return pxy / math.sqrt(pxx * pyy)

    return statistic


def _count_exceedances(statistic: Statistic, observed: float, n: int,
                       seed: int, block: int, size: int) -> int:
    rng = make_rng(seed, block)
    threshold = observed - _TIE_TOLERANCE * max(1.0, abs(observed))
    count = 0
    for _ in range(size):
        if statistic(rng.permutation(n)) >= threshold:
            count += 1
    return count


def permutation_test(
    method: Method,
    sample: PairedSample,
    permutations: int,
    seed: int,
    tie_seed: int = 0,
    n_jobs: Optional[int] = None,
    **params,
) -> Tuple[float, float]:
    """Observed statistic and add-one permutation p-value."""
    if permutations < 1:
        raise InvalidParameterError(f"permutations must be at least 1, got {permutations}")
    statistic = permutation_statistic(method, sample, tie_seed=tie_seed, **params)
    n = sample.n
    observed = statistic(np.arange(n))

    block_size = get_config().permutation_block
    sizes = [min(block_size, permutations - start) for start in range(0, permutations, block_size)]
    jobs = _resolve_jobs(n_jobs)
    if jobs == 1 or len(sizes) == 1:
        counts = [_count_exceedances(statistic, observed, n, seed, b, size) for b, size in enumerate(sizes)]
    else:
        counts = Parallel(n_jobs=jobs)(
            delayed(_count_exceedances)(statistic, observed, n, seed, b, size)
            for b, size in enumerate(sizes)
        )
    p_value = (1 + sum(counts)) / (permutations + 1)
    logger.debug("%s permutation test: observed=%.6g p=%.6g (B=%d)",
                 Method.parse(method).value, observed, p_value, permutations)
    return observed, p_value


def permutation_pvalue(method: Method, sample: PairedSample, B: int, seed: int, **kwargs) -> float:
    return permutation_test(method, sample, B, seed, **kwargs)[1]


def independence_test(
    method: Method,
    sample: PairedSample,
    config: TestConfig = None,
    n_jobs: Optional[int] = None,
    bandwidth: float = DEFAULT_HSIC_BANDWIDTH,
    sigma_sq: float = DEFAULT_PCOR_SIGMA_SQ,
) -> TestResult:
    """Test independence of x and y with the given coefficient.

    DDC and Chatterjee's coefficient use their one-sided asymptotic normal
    p-values; the other coefficients use permutations of y.
    """
    method = Method.parse(method)
    config = config or TestConfig()
    tie_seed = config.seed
    estimate = compute(method, sample, tie_seed=tie_seed, bandwidth=bandwidth, sigma_sq=sigma_sq)

    if method is Method.DDC:
        variance = ddc_variance_estimate(sample.x)
        estimate.params["sigma_hat_sq"] = variance.sigma_hat_sq
        p_value = ddc_asymptotic_pvalue(estimate.value, variance)
        return TestResult(estimate=estimate, p_value=p_value, p_source=PSource.ASYMPTOTIC,
                          level=config.level, seed=config.seed)
    if method is Method.CHATTERJEE:
        p_value = chatterjee_asymptotic_pvalue(estimate.value, sample.n)
        return TestResult(estimate=estimate, p_value=p_value, p_source=PSource.ASYMPTOTIC,
                          level=config.level, seed=config.seed)

    _, p_value = permutation_test(
        method, sample, config.permutations, derive_seed(config.seed, 1),
        tie_seed=tie_seed, n_jobs=n_jobs, bandwidth=bandwidth, sigma_sq=sigma_sq,
    )
    return TestResult(estimate=estimate, p_value=p_value, p_source=PSource.PERMUTATION,
                      permutations=config.permutations, level=config.level, seed=config.seed)


def _replication_rejects(spec: SimulationSpec, method: Method, level: float, replication: int) -> bool:
    from .simulation import draw_sample

    seed = derive_seed(spec.seed, replication)
    sample = draw_sample(spec, seed)
    config = TestConfig(level=level, permutations=spec.permutations, seed=derive_seed(seed, 1))
    return independence_test(method, sample, config, n_jobs=1).reject


def power_estimate(
    generator: SimulationSpec,
    method: Method,
    level: float = 0.05,
    reps: Optional[int] = None,
    n_jobs: Optional[int] = None,
) -> float:
    """Fraction of replications in which the test rejects at ``level``.

    Replication r draws its data from a seed derived from (spec.seed, r), so
    different methods evaluated on the same spec see the same draws.
    """
    method = Method.parse(method)
    reps = generator.reps if reps is None else reps
    if reps < 1:
        raise InvalidParameterError(f"reps must be at least 1, got {reps}")
    if not 0.0 < level < 1.0:
        raise InvalidParameterError(f"level must lie in (0, 1), got {level}")

    jobs = _resolve_jobs(n_jobs)
    if jobs == 1:
        rejections = [_replication_rejects(generator, method, level, r) for r in range(reps)]
    else:
        rejections = Parallel(n_jobs=jobs)(
            delayed(_replication_rejects)(generator, method, level, r) for r in range(reps)
        )
    power = sum(rejections) / reps
    logger.debug("power %s %s lambda=%g: %.3f", generator.model.value, method.value, generator.lam, power)
    return power
