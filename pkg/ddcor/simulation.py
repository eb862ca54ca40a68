"""
Data generators and Monte-Carlo drivers for the functional-dependence study
(six univariate models under increasing noise) and the multi-response
regression model used for screening.
"""

from typing import Dict, List, Optional, Sequence
import logging
import math

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from .config import get_config
from .errors import ConfigurationError, InvalidParameterError
from .inference import power_estimate
from .measures import compute
from .models import (
    FUNCTIONAL_MODELS,
    Method,
    Model,
    MultiResponseDraw,
    Orientation,
    PairedSample,
    SimulationSpec,
    derive_seed,
    make_rng,
)
from .runs import step

logger = logging.getLogger(__name__)

DEFAULT_POWER_LAMBDAS = tuple(round(0.1 * i, 10) for i in range(11))
TABLE_LAMBDAS = (0.1, 0.3, 0.5, 0.7, 0.9)
TABLE_MODELS = (Model.QUADRATIC, Model.SINUSOID, Model.STEP)
ALL_METHODS = (Method.DDC, Method.CHATTERJEE, Method.DC, Method.PCOR, Method.HSIC)

NOISE_MULTIPLIERS: Dict[Model, float] = {
    Model.LINEAR: 3.0,
    Model.QUADRATIC: 2.0,
    Model.SINUSOID: 3.0,
    Model.DAMPED_OSCILLATOR: 4.0,
    Model.W_SHAPED: 0.75,
    Model.STEP: 10.0,
}


def example1_signal(model: Model, x: np.ndarray) -> np.ndarray:
    """Noise-free response of a functional model."""
    model = Model.parse(model)
    x = np.asarray(x, dtype=float)
    if model is Model.LINEAR:
        return x.copy()
    if model is Model.QUADRATIC:
        return x ** 2
    if model is Model.SINUSOID:
        return np.cos(8.0 * np.pi * x)
    if model is Model.DAMPED_OSCILLATOR:
        return np.exp(-2.0 * x) * np.sin(10.0 * x)
    if model is Model.W_SHAPED:
        return np.where(x < 0.0, np.abs(x + 0.5), np.abs(x - 0.5))
    if model is Model.STEP:
        return np.select(
            [x < -0.5, x < 0.0, x < 0.5],
            [-3.0, 2.0, -4.0],
            default=-3.0,
        )
    raise ConfigurationError(f"{model.value} is not a functional model")


def generate_example1(model: Model, lam: float, n: int, seed: int) -> PairedSample:
    """x ~ U(-1, 1); y = f(x) + c * lam * eps with eps ~ N(0, 1)."""
    model = Model.parse(model)
    if model is Model.MULTI_RESPONSE:
        raise ConfigurationError("the multi-response model is drawn by generate_example2")
    if lam < 0.0:
        raise InvalidParameterError(f"noise level must be nonnegative, got {lam}")
    rng = make_rng(seed)
    x = rng.uniform(-1.0, 1.0, n)
    eps = rng.standard_normal(n)
    if model is Model.NULL_INDEPENDENT:
        return PairedSample(x=x, y=eps)
    return PairedSample(x=x, y=example1_signal(model, x) + NOISE_MULTIPLIERS[model] * lam * eps)


def multi_response_f(x: np.ndarray) -> np.ndarray:
    angle = 2.0 * np.pi * np.asarray(x, dtype=float)
    return 0.5 * np.cos(angle) + np.cos(angle) ** 2 - 1.5 * np.sin(angle) ** 3


def equicorrelated_normal(rng: np.random.Generator, n: int, p: int, rho: float) -> np.ndarray:
    if rho >= 0.0:
        common = rng.standard_normal((n, 1))
        own = rng.standard_normal((n, p))
        return math.sqrt(rho) * common + math.sqrt(1.0 - rho) * own
    sigma = np.full((p, p), rho)
    np.fill_diagonal(sigma, 1.0)
    try:
        factor = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise InvalidParameterError(f"rho={rho} gives a non positive definite covariance for p={p}")
    return rng.standard_normal((n, p)) @ factor.T


def generate_example2(
    rho: float, n: int, p: int, seed: int, noise: float = 0.5, route_per_row: bool = False,
) -> MultiResponseDraw:
    """Three responses driven by X1 (linear), X2 (quadratic), X3 (oscillatory)
    and X4 (through a periodic term added to one randomly chosen response).

    The response receiving the X4 term is drawn once per sample; with
    ``route_per_row`` every observation draws its own.
    """
    if p < 4:
        raise InvalidParameterError(f"the multi-response model needs p >= 4, got {p}")
    if not -1.0 < rho < 1.0:
        raise InvalidParameterError(f"rho must lie in (-1, 1), got {rho}")
    rng = make_rng(seed)
    x = equicorrelated_normal(rng, n, p, rho)
    x1, x2, x3, x4 = x[:, 0], x[:, 1], x[:, 2], x[:, 3]
    y = np.column_stack([
        0.2 * x1 + 0.2 * x2 ** 2 + np.sin(4.0 * np.pi * x3),
        0.4 * x1 + 0.3 * x2 ** 2 + np.cos(8.0 * np.pi * x3),
        0.6 * x1 - 0.5 * x2 ** 2 - np.cos(4.0 * np.pi * x3 ** 2),
    ])
    if route_per_row:
        y[np.arange(n), rng.integers(0, 3, n)] += multi_response_f(x4)
    else:
        y[:, rng.integers(0, 3)] += multi_response_f(x4)
    y += noise * rng.standard_normal((n, 3))
    return MultiResponseDraw(x=x, y=y)


def draw_sample(spec: SimulationSpec, seed: int) -> PairedSample:
    """One oriented univariate draw for a spec."""
    return generate_example1(spec.model, spec.lam, spec.n, seed).oriented(spec.orientation)


def _cell_seed(seed: int, model: Model, lam: float) -> int:
    # keyed by identity, not list position, so subsets reproduce the full grid
    return derive_seed(seed, list(Model).index(model), int(round(lam * 1_000_000)))


def _replication_values(spec: SimulationSpec, methods: Sequence[Method], replication: int) -> List[float]:
    seed = derive_seed(spec.seed, replication)
    sample = draw_sample(spec, seed)
    tie_seed = derive_seed(seed, 1)
    return [compute(method, sample, tie_seed=tie_seed).value for method in methods]


@step
def coefficient_mean_table(
    models: Sequence[Model] = TABLE_MODELS,
    lambdas: Sequence[float] = TABLE_LAMBDAS,
    methods: Sequence[Method] = ALL_METHODS,
    n: int = 100,
    reps: int = 500,
    seed: int = 0,
    orientation: Orientation = Orientation.Y_GIVEN_X,
    n_jobs: Optional[int] = None,
) -> pd.DataFrame:
    """Mean coefficient value per (model, lambda, method) over ``reps`` draws.

    All methods in a cell are evaluated on the same draws.
    """
    models = [Model.parse(m) for m in models]
    methods = [Method.parse(m) for m in methods]
    jobs = get_config().n_jobs if n_jobs is None else n_jobs
    rows = []
    for model in models:
        for lam in lambdas:
            spec = SimulationSpec(model=model, lam=lam, n=n, reps=reps,
                                  seed=_cell_seed(seed, model, lam), orientation=orientation)
            if jobs == 1:
                values = [_replication_values(spec, methods, r) for r in range(reps)]
            else:
                values = Parallel(n_jobs=jobs)(
                    delayed(_replication_values)(spec, methods, r) for r in range(reps)
                )
            values = np.asarray(values)
            for k, method in enumerate(methods):
                rows.append({
                    "model": model.value,
                    "lambda": lam,
                    "method": method.label,
                    "mean": float(values[:, k].mean()),
                    "sd": float(values[:, k].std(ddof=1)) if reps > 1 else 0.0,
                    "n": n,
                    "reps": reps,
                })
            logger.debug("means done for %s lambda=%g", model.value, lam)
    return pd.DataFrame(rows, columns=["model", "lambda", "method", "mean", "sd", "n", "reps"])


@step
def power_curve(
    models: Sequence[Model] = FUNCTIONAL_MODELS,
    lambdas: Sequence[float] = DEFAULT_POWER_LAMBDAS,
    methods: Sequence[Method] = ALL_METHODS,
    n: int = 100,
    reps: int = 500,
    level: float = 0.05,
    seed: int = 0,
    permutations: int = 500,
    orientation: Orientation = Orientation.Y_GIVEN_X,
    n_jobs: Optional[int] = None,
) -> pd.DataFrame:
    """Rejection frequency per (model, lambda, method), long format."""
    models = [Model.parse(m) for m in models]
    methods = [Method.parse(m) for m in methods]
    rows = []
    for model in models:
        for lam in lambdas:
            spec = SimulationSpec(model=model, lam=lam, n=n, reps=reps, permutations=permutations,
                                  seed=_cell_seed(seed, model, lam), orientation=orientation)
            for method in methods:
                rows.append({
                    "model": model.value,
                    "lambda": lam,
                    "method": method.label,
                    "power": power_estimate(spec, method, level=level, n_jobs=n_jobs),
                    "n": n,
                    "reps": reps,
                    "level": level,
                })
    return pd.DataFrame(rows, columns=["model", "lambda", "method", "power", "n", "reps", "level"])
