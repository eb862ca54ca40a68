"""
Marginal feature screening: rank predictors by their dependence with a
(possibly multivariate) response and keep the top [n / ln n].

For DDC the response occupies the vector slot and each scalar predictor the
conditioning slot, DDC(Y | X_j); it is the only orientation that allows a
multivariate response.
"""

from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union
import logging
import math

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from .config import get_config
from .errors import InvalidParameterError
from .inference import independence_test
from .measures import (
    DEFAULT_HSIC_BANDWIDTH,
    DEFAULT_PCOR_SIGMA_SQ,
    arccos_kernel,
    chatterjee_xi,
    dcor_from_centered,
    ddc_from_delta,
    double_center,
    double_centered_distances,
    gaussian_gram,
    gini_mean_difference,
    is_constant,
    pcov_from_kernels,
    sort_by_response,
)
from .models import (
    Method,
    Model,
    MultiResponseDraw,
    PairedSample,
    PSource,
    ScreeningReport,
    SimulationSpec,
    TestConfig,
    as_matrix,
    derive_seed,
    selected_size,
)
from .runs import step
from .simulation import generate_example2

logger = logging.getLogger(__name__)

SCREENING_METHODS = (Method.DDC, Method.DC, Method.PCOR, Method.HSIC)

Ranking = List[Tuple[int, float]]


def standardize(matrix) -> np.ndarray:
    """Column-wise (x - mean) / sd with the n-1 denominator; constant columns are only centred."""
    matrix = as_matrix(matrix, "matrix")
    centered = matrix - matrix.mean(axis=0)
    sd = matrix.std(axis=0, ddof=1)
    sd[sd == 0.0] = 1.0
    return centered / sd


def response_scorer(
    method: Method,
    response: np.ndarray,
    tie_seed: int = 0,
    bandwidth: float = DEFAULT_HSIC_BANDWIDTH,
    sigma_sq: float = DEFAULT_PCOR_SIGMA_SQ,
) -> Callable[[np.ndarray], float]:
    """Coefficient between a fixed response and any predictor column.

    Response-side quantities are computed once per response.
    """
    method = Method.parse(method)
    response = as_matrix(response, "response")
    n = response.shape[0]

    if method is Method.DDC:
        delta_hat = gini_mean_difference(response)

        def score(column: np.ndarray) -> float:
            sample = PairedSample(x=response, y=column)
            return ddc_from_delta(sort_by_response(sample, tie_seed), delta_hat)

    elif method is Method.CHATTERJEE:
        if response.shape[1] != 1:
            raise InvalidParameterError("Chatterjee's coefficient needs a univariate response")
        ranked = response[:, 0]

        def score(column: np.ndarray) -> float:
            return chatterjee_xi(column, ranked, tie_seed)

    elif method is Method.DC:
        b = double_centered_distances(response)

        def score(column: np.ndarray) -> float:
            return dcor_from_centered(double_centered_distances(column[:, np.newaxis]), b)

    elif method is Method.HSIC:
        # trace(HKH L) = trace(K HLH)
        l_centered = double_center(gaussian_gram(response, bandwidth))

        def score(column: np.ndarray) -> float:
            return float(np.sum(gaussian_gram(column[:, np.newaxis], bandwidth) * l_centered)) / n ** 2

    else:
        b = arccos_kernel(response, sigma_sq)
        b_rows = b.sum(axis=1)
        pyy = pcov_from_kernels(b, b, b_rows, b_rows)

        def score(column: np.ndarray) -> float:
            a = arccos_kernel(column[:, np.newaxis], sigma_sq)
            a_rows = a.sum(axis=1)
            pxx = pcov_from_kernels(a, a, a_rows, a_rows)
            if pxx <= 0.0 or pyy <= 0.0:
                return 0.0
            return pcov_from_kernels(a, b, a_rows, b_rows) / math.sqrt(pxx * pyy)

    def guarded(column: np.ndarray) -> float:
        if is_constant(column):
            return 0.0
        return score(column)

    return guarded


def _sort_ranking(values: Sequence[float]) -> Ranking:
    return sorted(enumerate(float(v) for v in values), key=lambda item: (-item[1], item[0]))


def rank_features(draw: MultiResponseDraw, method: Method, tie_seed: int = 0, **params) -> Ranking:
    """(predictor index, coefficient) pairs, descending; ties broken by index."""
    score = response_scorer(method, draw.y, tie_seed=tie_seed, **params)
    return _sort_ranking([score(draw.x[:, j]) for j in range(draw.p)])


def _ranking_indices(ranking: Iterable[Union[int, Tuple[int, float]]]) -> List[int]:
    return [item[0] if isinstance(item, tuple) else int(item) for item in ranking]


def minimal_model_size(ranking: Iterable[Union[int, Tuple[int, float]]], active: Iterable[int]) -> int:
    """Smallest k such that the top-k of the ranking holds every active index."""
    active = set(active)
    if not active:
        raise InvalidParameterError("the active set is empty")
    positions = {index: pos for pos, index in enumerate(_ranking_indices(ranking))}
    missing = sorted(active - positions.keys())
    if missing:
        raise InvalidParameterError(f"active indices {missing} are absent from the ranking")
    return max(positions[index] for index in active) + 1


def replication_seeds(spec: SimulationSpec, replication: int) -> Tuple[int, int]:
    """(data seed, tie seed) of one screening replication."""
    data_seed = derive_seed(spec.seed, replication)
    return data_seed, derive_seed(data_seed, 1)


def _require_multi_response(spec: SimulationSpec) -> None:
    if spec.model is not Model.MULTI_RESPONSE:
        raise InvalidParameterError(f"screening needs the multi-response model, got {spec.model.value}")


def _screen_replication(spec: SimulationSpec, method: Method, replication: int) -> Tuple[List[bool], int]:
    data_seed, tie_seed = replication_seeds(spec, replication)
    draw = generate_example2(spec.rho, spec.n, spec.p, data_seed)
    ranking = rank_features(draw, method, tie_seed=tie_seed)
    top = set(_ranking_indices(ranking[:selected_size(spec.n)]))
    return [index in top for index in draw.active], minimal_model_size(ranking, draw.active)


@step
def screening_report(spec: SimulationSpec, method: Method, n_jobs: Optional[int] = None) -> ScreeningReport:
    _require_multi_response(spec)
    method = Method.parse(method)
    jobs = get_config().n_jobs if n_jobs is None else n_jobs
    if jobs == 1:
        results = [_screen_replication(spec, method, r) for r in range(spec.reps)]
    else:
        results = Parallel(n_jobs=jobs)(
            delayed(_screen_replication)(spec, method, r) for r in range(spec.reps)
        )
    hits = np.array([row for row, _ in results], dtype=float)
    mms = [size for _, size in results]
    report = ScreeningReport.from_replications(hits, mms, selected_size(spec.n), method, spec.rho)
    logger.info("screening %s rho=%g: MMS median %.1f", method.label, spec.rho, report.mms_median)
    return report


def _power_replication(spec: SimulationSpec, methods: Sequence[Method], predictors: Sequence[int],
                       level: float, replication: int) -> List[bool]:
    data_seed, _ = replication_seeds(spec, replication)
    draw = generate_example2(spec.rho, spec.n, spec.p, data_seed)
    decisions = []
    for method in methods:
        for j in predictors:
            sample = PairedSample(x=draw.y, y=draw.x[:, j])
            config = TestConfig(level=level, permutations=spec.permutations,
                                seed=derive_seed(data_seed, 2, j))
            decisions.append(independence_test(method, sample, config, n_jobs=1).reject)
    return decisions


@step
def screening_power_table(
    spec: SimulationSpec,
    methods: Sequence[Method] = SCREENING_METHODS,
    level: float = 0.05,
    predictors: Optional[Sequence[int]] = None,
    n_jobs: Optional[int] = None,
) -> pd.DataFrame:
    """Rejection frequency of each method's test between X_j and the 3-dim response."""
    _require_multi_response(spec)
    methods = [Method.parse(m) for m in methods]
    predictors = list(range(4)) if predictors is None else list(predictors)
    jobs = get_config().n_jobs if n_jobs is None else n_jobs
    if jobs == 1:
        decisions = [_power_replication(spec, methods, predictors, level, r) for r in range(spec.reps)]
    else:
        decisions = Parallel(n_jobs=jobs)(
            delayed(_power_replication)(spec, methods, predictors, level, r) for r in range(spec.reps)
        )
    power = np.mean(np.asarray(decisions, dtype=float), axis=0)
    rows = []
    for k, (method, j) in enumerate((m, j) for m in methods for j in predictors):
        rows.append({
            "method": method.label,
            "rho": spec.rho,
            "predictor": f"X{j + 1}",
            "power": float(power[k]),
            "reps": spec.reps,
            "level": level,
        })
    return pd.DataFrame(rows, columns=["method", "rho", "predictor", "power", "reps", "level"])


@step
def screen_dataset(
    response,
    predictors,
    names: Sequence[str],
    method: Method,
    config: TestConfig = None,
    standardize_data: bool = True,
    n_jobs: Optional[int] = None,
) -> pd.DataFrame:
    """Rank every predictor against the response and test each for dependence.

    Returns one row per predictor in descending coefficient order with its
    p-value, p-value source and a ``significant`` flag (p <= level).
    """
    method = Method.parse(method)
    config = config or TestConfig()
    response = as_matrix(response, "response")
    predictors = as_matrix(predictors, "predictors")
    if len(names) != predictors.shape[1]:
        raise InvalidParameterError("one name per predictor column is required")
    if standardize_data:
        response = standardize(response)
        predictors = standardize(predictors)

    source = PSource.ASYMPTOTIC if method.has_asymptotic_test else PSource.PERMUTATION
    values = []
    p_values = []
    for j in range(predictors.shape[1]):
        column = predictors[:, j]
        if is_constant(column):
            logger.warning("predictor %s is constant; scored as independent", names[j])
            values.append(0.0)
            p_values.append(1.0)
            continue
        test_config = TestConfig(level=config.level, permutations=config.permutations,
                                 seed=derive_seed(config.seed, j))
        result = independence_test(method, PairedSample(x=response, y=column), test_config, n_jobs=n_jobs)
        values.append(result.estimate.value)
        p_values.append(result.p_value)

    ranking = _sort_ranking(values)
    rows = []
    for rank, (j, value) in enumerate(ranking, start=1):
        rows.append({
            "predictor": names[j],
            "method": method.label,
            "value": value,
            "p_value": p_values[j],
            "p_source": source.value,
            "rank": rank,
            "significant": p_values[j] <= config.level,
        })
    return pd.DataFrame(rows, columns=["predictor", "method", "value", "p_value", "p_source", "rank", "significant"])


def rank_concordance(rankings: Dict[Method, pd.DataFrame], reference: Method, top: int = 7) -> pd.DataFrame:
    """Ranks, under every method, of the reference method's top predictors."""
    reference = Method.parse(reference)
    leaders = rankings[reference].sort_values("rank")["predictor"].head(top).tolist()
    rows = []
    for method, table in rankings.items():
        rank_of = dict(zip(table["predictor"], table["rank"]))
        row = {"method": Method.parse(method).label}
        row.update({name: int(rank_of[name]) for name in leaders})
        rows.append(row)
    return pd.DataFrame(rows, columns=["method"] + leaders)


def exclusive_discoveries(flags: Dict[Method, Set[str]], method: Method, others: Iterable[Method]) -> Set[str]:
    """Predictors flagged by ``method`` and by none of ``others``."""
    method = Method.parse(method)
    covered: Set[str] = set()
    for other in others:
        other = Method.parse(other)
        if other is not method:
            covered |= flags[other]
    return flags[method] - covered
