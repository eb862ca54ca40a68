from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple
import math
import uuid

import numpy as np

from .errors import ConfigurationError, InvalidDataError, InvalidParameterError


def generate_id() -> str:
    return str(uuid.uuid4())


def now() -> datetime:
    return datetime.utcnow()


def derive_seed(master: int, *keys: int) -> int:
    """Counter-style child seed keyed by (master, *keys); independent of call order."""
    entropy = [int(master) & 0xFFFFFFFFFFFFFFFF] + [int(k) for k in keys]
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


def make_rng(master: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(master) & 0xFFFFFFFFFFFFFFFF] + [int(k) for k in keys]))


class _ParseableEnum(Enum):
    @classmethod
    def parse(cls, value: Any):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        for member in cls:
            if key in (member.value, member.name.lower()):
                return member
        valid = ", ".join(m.value for m in cls)
        raise ConfigurationError(f"unknown {cls.__name__} {value!r}; expected one of: {valid}")


class Method(_ParseableEnum):
    DDC = "ddc"
    CHATTERJEE = "chatterjee"
    DC = "dc"
    HSIC = "hsic"
    PCOR = "pcor"

    @property
    def has_asymptotic_test(self) -> bool:
        return self in (Method.DDC, Method.CHATTERJEE)

    @property
    def label(self) -> str:
        return {"ddc": "DDC", "chatterjee": "Chatterjee", "dc": "DC", "hsic": "HSIC", "pcor": "PCor"}[self.value]


class PSource(_ParseableEnum):
    ASYMPTOTIC = "asymptotic"
    PERMUTATION = "permutation"


class Orientation(_ParseableEnum):
    # model output in the vector slot, x as conditioner
    Y_GIVEN_X = "y_given_x"
    X_GIVEN_Y = "x_given_y"


class Model(_ParseableEnum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"
    SINUSOID = "sinusoid"
    DAMPED_OSCILLATOR = "damped_oscillator"
    W_SHAPED = "w_shaped"
    STEP = "step"
    MULTI_RESPONSE = "multi_response"
    NULL_INDEPENDENT = "null_independent"

    @property
    def is_univariate(self) -> bool:
        return self is not Model.MULTI_RESPONSE


FUNCTIONAL_MODELS = (
    Model.LINEAR, Model.QUADRATIC, Model.SINUSOID,
    Model.DAMPED_OSCILLATOR, Model.W_SHAPED, Model.STEP,
)


class ReferenceDistribution(_ParseableEnum):
    STANDARD_NORMAL = "standard_normal"
    STANDARD_UNIFORM = "standard_uniform"


def as_matrix(values: Any, name: str = "x") -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, np.newaxis]
    if arr.ndim != 2:
        raise InvalidDataError(f"{name} must be a vector or a matrix, got {arr.ndim} dimensions")
    if not np.all(np.isfinite(arr)):
        raise InvalidDataError(f"{name} contains non-finite entries")
    return arr


def as_vector(values: Any, name: str = "y") -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise InvalidDataError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise InvalidDataError(f"{name} contains non-finite entries")
    return arr


@dataclass
class PairedSample:
    """n observations of (vector in R^p, scalar conditioner)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.x = as_matrix(self.x, "x")
        self.y = as_vector(self.y, "y")
        if self.x.shape[0] != self.y.shape[0]:
            raise InvalidDataError(
                f"x has {self.x.shape[0]} rows but y has {self.y.shape[0]} values"
            )

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def oriented(self, orientation: Orientation) -> "PairedSample":
        """Swap the vector and conditioning roles of a univariate pair."""
        orientation = Orientation.parse(orientation)
        if orientation is Orientation.X_GIVEN_Y:
            return self
        if self.p != 1:
            raise InvalidParameterError("orientation swap needs a univariate x")
        return PairedSample(x=self.y[:, np.newaxis], y=self.x[:, 0])

    def permuted(self, permutation: np.ndarray) -> "PairedSample":
        """Same x with the conditioner shuffled."""
        return PairedSample(x=self.x, y=self.y[permutation])


@dataclass
class SortedPairedSample:
    x: np.ndarray
    y: np.ndarray
    permutation: np.ndarray
    tie_seed: int = 0

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def sorted_x(self) -> np.ndarray:
        return self.x[self.permutation]

    @property
    def sorted_y(self) -> np.ndarray:
        return self.y[self.permutation]


@dataclass
class CoefficientEstimate:
    method: Method
    value: float
    n: int
    p: int
    params: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method.label,
            "value": self.value,
            "n": self.n,
            "p": self.p,
            "params": dict(self.params),
        }


@dataclass
class VarianceEstimate:
    dvar_sq: float
    delta_hat: float
    sigma_hat_sq: float
    n: int

    @classmethod
    def from_components(cls, dvar_sq: float, delta_hat: float, n: int) -> "VarianceEstimate":
        return cls(dvar_sq=dvar_sq, delta_hat=delta_hat, sigma_hat_sq=dvar_sq / delta_hat ** 2, n=n)


@dataclass
class DistanceMoments:
    """U-statistic estimates of the three pairwise-distance moments."""

    mean_sq_distance: float       # E||X1 - X2||^2
    squared_mean_distance: float  # (E||X1 - X2||)^2
    cross_moment: float           # E(||X1 - X2|| ||X1 - X3||)
    n: int

    @property
    def population_dvar_sq(self) -> float:
        return self.mean_sq_distance - 2.0 * self.cross_moment + self.squared_mean_distance


@dataclass
class TestConfig:
    level: float = 0.05
    permutations: int = 500
    seed: int = 0

    __test__ = False

    def __post_init__(self):
        if not 0.0 < self.level < 1.0:
            raise InvalidParameterError(f"level must lie in (0, 1), got {self.level}")
        if self.permutations < 1:
            raise InvalidParameterError(f"permutations must be at least 1, got {self.permutations}")


@dataclass
class TestResult:
    estimate: CoefficientEstimate
    p_value: float
    p_source: PSource
    permutations: int = 0
    level: float = 0.05
    seed: int = 0
    sidedness: str = "upper"

    __test__ = False

    @property
    def reject(self) -> bool:
        return self.p_value <= self.level

    def to_dict(self) -> dict:
        return {
            "method": self.estimate.method.label,
            "value": self.estimate.value,
            "n": self.estimate.n,
            "p": self.estimate.p,
            "p_value": self.p_value,
            "p_source": self.p_source.value,
            "permutations": self.permutations,
            "level": self.level,
            "reject": self.reject,
            "sidedness": self.sidedness,
            "seed": self.seed,
        }


@dataclass
class SimulationSpec:
    model: Model
    lam: float = 0.0
    rho: float = 0.0
    n: int = 100
    p: int = 1
    seed: int = 0
    reps: int = 500
    orientation: Orientation = Orientation.Y_GIVEN_X
    permutations: int = 500

    def __post_init__(self):
        self.model = Model.parse(self.model)
        self.orientation = Orientation.parse(self.orientation)
        if self.model in FUNCTIONAL_MODELS and not 0.0 <= self.lam <= 1.0:
            raise InvalidParameterError(f"noise level must lie in [0, 1], got {self.lam}")
        if self.model is Model.MULTI_RESPONSE:
            if self.p < 4:
                raise InvalidParameterError(f"the multi-response model needs p >= 4, got {self.p}")
            if not -1.0 < self.rho < 1.0:
                raise InvalidParameterError(f"rho must lie in (-1, 1), got {self.rho}")
        if self.n < 2:
            raise InvalidParameterError(f"n must be at least 2, got {self.n}")
        if self.reps < 1:
            raise InvalidParameterError(f"reps must be at least 1, got {self.reps}")

    def to_dict(self) -> dict:
        return {
            "model": self.model.value,
            "lambda": self.lam,
            "rho": self.rho,
            "n": self.n,
            "p": self.p,
            "seed": self.seed,
            "reps": self.reps,
            "orientation": self.orientation.value,
            "permutations": self.permutations,
        }


ACTIVE_PREDICTORS: Tuple[int, ...] = (0, 1, 2, 3)


@dataclass
class MultiResponseDraw:
    x: np.ndarray
    y: np.ndarray
    active: Tuple[int, ...] = ACTIVE_PREDICTORS

    def __post_init__(self):
        if self.y.ndim != 2 or self.y.shape[1] != 3:
            raise InvalidDataError("the multi-response draw needs exactly 3 response columns")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


@dataclass
class ScreeningReport:
    per_predictor_proportion: List[float]
    mms_values: List[int]
    mms_median: float
    mms_sd: float
    selected_size: int
    method: Method
    rho: float
    reps: int
    orientation: str = "response_given_predictor"

    @classmethod
    def from_replications(
        cls,
        hits: np.ndarray,
        mms_values: List[int],
        selected_size: int,
        method: Method,
        rho: float,
    ) -> "ScreeningReport":
        values = np.asarray(mms_values, dtype=float)
        sd = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
        return cls(
            per_predictor_proportion=[float(v) for v in np.mean(hits, axis=0)],
            mms_values=[int(v) for v in mms_values],
            mms_median=float(np.median(values)),
            mms_sd=sd,
            selected_size=selected_size,
            method=method,
            rho=rho,
            reps=len(mms_values),
        )

    def to_dict(self) -> dict:
        row = {"method": self.method.label, "rho": self.rho}
        for j, proportion in enumerate(self.per_predictor_proportion, start=1):
            row[f"P{j}"] = proportion
        row.update({
            "MMS": self.mms_median,
            "SD": self.mms_sd,
            "selected_size": self.selected_size,
            "reps": self.reps,
            "orientation": self.orientation,
        })
        return row


def selected_size(n: int) -> int:
    """Integer part of n / ln n."""
    return int(math.floor(n / math.log(n)))


class RunStatus(Enum):
    ACTIVE = "active"
    COMPLETED = "completed"
    ERROR = "error"


class StepStatus(Enum):
    SUCCESS = "success"
    ERROR = "error"
    PENDING = "pending"


@dataclass
class Step:
    step_id: str = field(default_factory=generate_id)
    name: str = ""
    arguments: dict = field(default_factory=dict)
    error: Optional[str] = None
    started_at: datetime = field(default_factory=now)
    ended_at: Optional[datetime] = None
    status: StepStatus = StepStatus.PENDING

    def complete(self, error: str = None) -> None:
        self.ended_at = now()
        if error:
            self.error = error
            self.status = StepStatus.ERROR
        else:
            self.status = StepStatus.SUCCESS

    @property
    def duration_ms(self) -> Optional[int]:
        if self.ended_at is None:
            return None
        return int((self.ended_at - self.started_at).total_seconds() * 1000)

    def to_dict(self) -> dict:
        return {
            "step_id": self.step_id,
            "name": self.name,
            "arguments": self.arguments,
            "error": self.error,
            "duration_ms": self.duration_ms,
            "status": self.status.value,
        }


@dataclass
class Run:
    run_id: str = field(default_factory=generate_id)
    name: str = "unnamed_run"
    params: dict = field(default_factory=dict)
    error: Optional[str] = None
    started_at: datetime = field(default_factory=now)
    ended_at: Optional[datetime] = None
    status: RunStatus = RunStatus.ACTIVE
    steps: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add_step(self, step: Step) -> None:
        self.steps.append(step)

    def complete(self, error: str = None) -> None:
        self.ended_at = now()
        if error:
            self.error = error
            self.status = RunStatus.ERROR
        else:
            self.status = RunStatus.COMPLETED

    @property
    def duration_ms(self) -> Optional[int]:
        if self.ended_at is None:
            return None
        return int((self.ended_at - self.started_at).total_seconds() * 1000)

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "name": self.name,
            "params": self.params,
            "error": self.error,
            "started_at": self.started_at.isoformat(),
            "ended_at": self.ended_at.isoformat() if self.ended_at else None,
            "duration_ms": self.duration_ms,
            "status": self.status.value,
            "steps": [s.to_dict() for s in self.steps],
            "metadata": self.metadata,
        }

    def to_json(self, indent: int = 2) -> str:
        import json
        return json.dumps(self.to_dict(), indent=indent, default=str)
