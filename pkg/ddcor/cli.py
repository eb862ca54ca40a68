"""
Command-line front end.

    ddcor compute data.csv --response y --methods ddc dc
    ddcor test data.csv --response y --methods ddc hsic --permutations 500
    ddcor screen genes.csv --response Ro1 --method ddc --compare dc hsic pcor
    ddcor simulate example1-means --set reps=5 --wide

Tables go to stdout (or --output) as CSV with '#' metadata lines, or as
JSON. Diagnostics go to stderr. Exit status is 0 on success, 2 for
configuration and parse errors and 3 for numerical degeneracy.
"""

from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple
import argparse
import logging
import sys

import numpy as np
import pandas as pd

from .config import configure, get_config
from .errors import ConfigurationError, DataParseError, DDCorError
from .measures import compute
from .inference import independence_test
from .models import (
    FUNCTIONAL_MODELS,
    Method,
    Model,
    Orientation,
    PairedSample,
    SimulationSpec,
    TestConfig,
)
from .output import pivot_wide, write_table
from .runs import experiment, summarize_argument
from .context import annotate_run
from .screening import (
    SCREENING_METHODS,
    exclusive_discoveries,
    rank_concordance,
    screen_dataset,
    screening_power_table,
    screening_report,
    standardize,
)
from .simulation import (
    ALL_METHODS,
    DEFAULT_POWER_LAMBDAS,
    TABLE_LAMBDAS,
    TABLE_MODELS,
    coefficient_mean_table,
    power_curve,
)

logger = logging.getLogger(__name__)

MAX_SEED = 2 ** 64 - 1


@dataclass
class DatasetFile:
    path: str
    response_columns: List[str]
    predictor_columns: List[str] = field(default_factory=list)
    header: bool = True
    delimiter: str = ","

    def __post_init__(self):
        if len(self.delimiter) != 1:
            raise ConfigurationError(f"delimiter must be a single character, got {self.delimiter!r}")
        if not self.response_columns:
            raise ConfigurationError("at least one response column is required")

    def to_dict(self) -> dict:
        return asdict(self)

    def load(self) -> Tuple[np.ndarray, np.ndarray, List[str]]:
        """(response matrix, predictor matrix, predictor names).

        An empty ``predictor_columns`` selects every non-response column.
        """
        try:
            frame = pd.read_csv(
                self.path,
                sep=self.delimiter,
                header=0 if self.header else None,
                dtype=str,
                keep_default_na=False,
                skip_blank_lines=False,
                encoding="utf-8",
            )
        except FileNotFoundError:
            raise ConfigurationError(f"dataset not found: {self.path}")
        except UnicodeDecodeError as e:
            raise DataParseError(f"dataset {self.path} is not valid UTF-8: {e.reason} at byte {e.start}")
        except OSError as e:
            raise ConfigurationError(f"cannot read dataset {self.path}: {e.strerror or e}")
        except pd.errors.EmptyDataError:
            raise DataParseError(f"dataset {self.path} is empty")
        except pd.errors.ParserError as e:
            raise DataParseError(f"malformed CSV in {self.path}: {e}")

        if self.header:
            frame.columns = [str(c).strip() for c in frame.columns]
        else:
            frame.columns = [str(i + 1) for i in range(frame.shape[1])]
        # blank lines are dropped but keep their index, so it still maps to the physical line
        cells = frame.fillna("").apply(lambda column: column.astype(str).str.strip())
        frame = frame.loc[~(cells == "").all(axis=1)]
        if frame.empty:
            raise DataParseError(f"dataset {self.path} has no data rows")
        available = list(frame.columns)

        for name in list(self.response_columns) + list(self.predictor_columns):
            if name not in available:
                raise ConfigurationError(
                    f"column {name!r} not found in {self.path}; available: {', '.join(available)}"
                )
        predictors = list(self.predictor_columns) or [c for c in available if c not in self.response_columns]
        overlap = sorted(set(predictors) & set(self.response_columns))
        if overlap:
            raise ConfigurationError(f"columns used as both response and predictor: {', '.join(overlap)}")
        if not predictors:
            raise ConfigurationError("no predictor columns selected")

        first_line = 2 if self.header else 1
        response = np.column_stack([self._parse_column(frame, c, first_line) for c in self.response_columns])
        matrix = np.column_stack([self._parse_column(frame, c, first_line) for c in predictors])
        logger.info("loaded %s: n=%d, %d response, %d predictor columns",
                    self.path, frame.shape[0], response.shape[1], matrix.shape[1])
        return response, matrix, predictors

    @staticmethod
    def _parse_column(frame: pd.DataFrame, column: str, first_line: int) -> np.ndarray:
        raw = frame[column].astype(str).str.strip()
        values = pd.to_numeric(raw, errors="coerce").to_numpy(dtype=float)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            row = int(bad[0])
            line = int(raw.index[row]) + first_line
            raise DataParseError(f"not a finite real: {raw.iloc[row]!r}", line=line, column=column)
        return values


@dataclass
class RunConfig:
    seed: int = 0
    permutations: int = 500
    level: float = 0.05
    standardize: Optional[bool] = None
    threads: int = 1
    orientation: Orientation = Orientation.X_GIVEN_Y

    def __post_init__(self):
        if not 0 <= self.seed <= MAX_SEED:
            raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        self.orientation = Orientation.parse(self.orientation)
        # validates permutations and level
        self.test_config()

    def test_config(self, seed: Optional[int] = None) -> TestConfig:
        return TestConfig(level=self.level, permutations=self.permutations,
                          seed=self.seed if seed is None else seed)

    def standardize_or(self, default: bool) -> bool:
        return default if self.standardize is None else self.standardize

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "permutations": self.permutations,
            "level": self.level,
            "standardize": self.standardize,
            "orientation": self.orientation.value,
        }


class Experiment(Enum):
    EXAMPLE1_POWER = "example1_power"
    EXAMPLE1_MEANS = "example1_means"
    EXAMPLE2_SCREENING = "example2_screening"
    EXAMPLE2_POWER = "example2_power"

    @classmethod
    def parse(cls, value: Any) -> "Experiment":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        for member in cls:
            if key == member.value.replace("_", ""):
                return member
        valid = ", ".join(m.value for m in cls)
        raise ConfigurationError(f"unknown experiment {value!r}; expected one of: {valid}")


def _split(raw: str) -> List[str]:
    return [part.strip() for part in raw.split(",") if part.strip()]


def _float_list(raw: str) -> List[float]:
    return [float(v) for v in _split(raw)]


def _predictor_list(raw: str) -> List[int]:
    # accepts "X1,X3" or "1,3"; stored zero-based
    return [int(v.upper().lstrip("X")) - 1 for v in _split(raw)]


_OVERRIDE_PARSERS = {
    "models": lambda raw: [Model.parse(v) for v in _split(raw)],
    "lambdas": _float_list,
    "methods": lambda raw: [Method.parse(v) for v in _split(raw)],
    "rho": _float_list,
    "predictors": _predictor_list,
    "orientation": Orientation.parse,
    "n": int,
    "p": int,
    "reps": int,
    "permutations": int,
    "level": float,
}

_DEFAULTS: Dict[Experiment, Dict[str, Any]] = {
    Experiment.EXAMPLE1_MEANS: {
        "models": list(TABLE_MODELS),
        "lambdas": list(TABLE_LAMBDAS),
        "methods": list(ALL_METHODS),
        "n": 100,
        "reps": 500,
        "orientation": Orientation.Y_GIVEN_X,
    },
    Experiment.EXAMPLE1_POWER: {
        "models": list(FUNCTIONAL_MODELS),
        "lambdas": list(DEFAULT_POWER_LAMBDAS),
        "methods": list(ALL_METHODS),
        "n": 100,
        "reps": 500,
        "level": 0.05,
        "permutations": 500,
        "orientation": Orientation.Y_GIVEN_X,
    },
    Experiment.EXAMPLE2_SCREENING: {
        "rho": [0.3, 0.5, 0.7],
        "methods": list(SCREENING_METHODS),
        "n": 200,
        "p": 500,
        "reps": 100,
    },
    Experiment.EXAMPLE2_POWER: {
        "rho": [0.3, 0.5, 0.7],
        "methods": list(SCREENING_METHODS),
        "predictors": [0, 1, 2, 3],
        "n": 200,
        "p": 500,
        "reps": 100,
        "level": 0.05,
        "permutations": 500,
    },
}


def parse_overrides(pairs: Sequence[str]) -> Dict[str, str]:
    overrides = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigurationError(f"override must look like key=value, got {pair!r}")
        overrides[key.strip().lower()] = value.strip()
    return overrides


def resolve_parameters(which: Experiment, overrides: Dict[str, str]) -> Dict[str, Any]:
    """Experiment defaults with ``key=value`` overrides applied."""
    params = dict(_DEFAULTS[which])
    unknown = sorted(set(overrides) - set(params))
    if unknown:
        raise ConfigurationError(
            f"unknown parameter(s) {', '.join(unknown)} for {which.value}; "
            f"valid keys: {', '.join(sorted(params))}"
        )
    for key, raw in overrides.items():
        try:
            params[key] = _OVERRIDE_PARSERS[key](raw)
        except DDCorError:
            raise
        except ValueError:
            raise ConfigurationError(f"bad value for {key}: {raw!r}")
    return params


def _oriented_sample(dataset: DatasetFile, config: RunConfig) -> PairedSample:
    response, predictors, names = dataset.load()
    if response.shape[1] != 1:
        raise ConfigurationError("compute and test take exactly one response column")
    if config.standardize_or(False):
        response = standardize(response)
        predictors = standardize(predictors)
    return PairedSample(x=predictors, y=response[:, 0]).oriented(config.orientation)


@experiment(name="compute")
def cmd_compute(dataset: DatasetFile, methods: Sequence[Method], config: RunConfig) -> pd.DataFrame:
    sample = _oriented_sample(dataset, config)
    rows = []
    for method in methods:
        estimate = compute(method, sample, tie_seed=config.seed)
        rows.append({"method": estimate.method.label, "value": estimate.value, "n": estimate.n, "p": estimate.p})
    return pd.DataFrame(rows, columns=["method", "value", "n", "p"])


@experiment(name="test")
def cmd_test(dataset: DatasetFile, methods: Sequence[Method], config: RunConfig) -> pd.DataFrame:
    sample = _oriented_sample(dataset, config)
    rows = [
        independence_test(method, sample, config.test_config(), n_jobs=config.threads).to_dict()
        for method in methods
    ]
    return pd.DataFrame(rows)


def _scatter_table(response: np.ndarray, predictors: np.ndarray, names: List[str],
                   response_names: List[str], leaders: Sequence[str]) -> pd.DataFrame:
    index = {name: j for j, name in enumerate(names)}
    frames = []
    for name in leaders:
        frame = pd.DataFrame({"predictor": name, "x": predictors[:, index[name]]})
        for k, column in enumerate(response_names):
            frame[column] = response[:, k]
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


@experiment(name="screen")
def cmd_screen(
    dataset: DatasetFile,
    method: Method,
    config: RunConfig,
    compare: Sequence[Method] = (),
    scatter_path: Optional[str] = None,
    scatter_top: int = 10,
) -> pd.DataFrame:
    method = Method.parse(method)
    response, predictors, names = dataset.load()
    scale = config.standardize_or(True)
    if scale:
        response = standardize(response)
        predictors = standardize(predictors)

    def screen(m: Method) -> pd.DataFrame:
        return screen_dataset(response, predictors, names, m, config.test_config(),
                              standardize_data=False, n_jobs=config.threads)

    table = screen(method)
    annotate_run(flagged={method.label: int(table["significant"].sum())})

    others = [m for m in (Method.parse(c) for c in compare) if m is not method]
    if others:
        rankings = {method: table}
        for other in others:
            rankings[other] = screen(other)
            by_name = rankings[other].set_index("predictor")
            table[f"rank_{other.value}"] = table["predictor"].map(by_name["rank"]).astype(int)
            table[f"significant_{other.value}"] = table["predictor"].map(by_name["significant"]).astype(bool)
        flags = {m: set(t.loc[t["significant"], "predictor"]) for m, t in rankings.items()}
        concordance = rank_concordance(rankings, method, top=min(7, len(names)))
        annotate_run(
            flagged={m.label: len(flags[m]) for m in rankings},
            exclusive={m.label: len(exclusive_discoveries(flags, m, rankings)) for m in rankings},
            concordance=concordance.to_dict(orient="records"),
        )

    if scatter_path:
        leaders = table["predictor"].head(scatter_top).tolist()
        response_names = list(dataset.response_columns)
        write_table(_scatter_table(response, predictors, names, response_names, leaders),
                    "csv", {"standardized": scale}, path=scatter_path)
        logger.info("wrote scatter data for %d predictors to %s", len(leaders), scatter_path)
    return table


def _example2_spec(params: Dict[str, Any], rho: float, seed: int) -> SimulationSpec:
    return SimulationSpec(model=Model.MULTI_RESPONSE, rho=rho, n=params["n"], p=params["p"],
                          reps=params["reps"], seed=seed, permutations=params.get("permutations", 500))


@experiment(name="simulate")
def cmd_simulate(which: Experiment, overrides: Dict[str, str], config: RunConfig,
                 wide: bool = False) -> pd.DataFrame:
    which = Experiment.parse(which)
    params = resolve_parameters(which, overrides)
    annotate_run(parameters=summarize_argument(params))
    jobs = config.threads

    if which is Experiment.EXAMPLE1_MEANS:
        table = coefficient_mean_table(
            params["models"], params["lambdas"], params["methods"], n=params["n"], reps=params["reps"],
            seed=config.seed, orientation=params["orientation"], n_jobs=jobs,
        )
        return pivot_wide(table, ["model", "method"], ["lambda"], "mean") if wide else table

    if which is Experiment.EXAMPLE1_POWER:
        table = power_curve(
            params["models"], params["lambdas"], params["methods"], n=params["n"], reps=params["reps"],
            level=params["level"], seed=config.seed, permutations=params["permutations"],
            orientation=params["orientation"], n_jobs=jobs,
        )
        return pivot_wide(table, ["model", "method"], ["lambda"], "power") if wide else table

    if which is Experiment.EXAMPLE2_SCREENING:
        rows = []
        for rho in params["rho"]:
            spec = _example2_spec(params, rho, config.seed)
            for method in params["methods"]:
                rows.append(screening_report(spec, method, n_jobs=jobs).to_dict())
        # already one row per (method, rho)
        return pd.DataFrame(rows)

    tables = [
        screening_power_table(_example2_spec(params, rho, config.seed), params["methods"],
                              level=params["level"], predictors=params["predictors"], n_jobs=jobs)
        for rho in params["rho"]
    ]
    table = pd.concat(tables, ignore_index=True)
    return pivot_wide(table, ["method"], ["rho", "predictor"], "power") if wide else table


def _threads(raw: str) -> int:
    if raw == "auto":
        return -1
    try:
        value = int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer or 'auto', got {raw!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"thread count must be positive, got {value}")
    return value


def _seed(raw: str) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {raw!r}")
    if not 0 <= value <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--permutations", type=int, default=500)
    common.add_argument("--level", type=float, default=0.05)
    common.add_argument("--threads", type=_threads, default=1, help="worker count or 'auto'")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--output", "-o", help="write the table here instead of stdout")
    common.add_argument("--runs-dir", help="keep a JSON record of each run in this directory")
    common.add_argument("--verbose", "-v", action="count", default=0)
    return common


def _dataset_parser() -> argparse.ArgumentParser:
    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("dataset", help="CSV file")
    data.add_argument("--response", "-y", nargs="+", required=True, help="response column name(s)")
    data.add_argument("--predictors", "-x", nargs="+", default=[],
                      help="predictor columns (default: every other column)")
    data.add_argument("--delimiter", default=",")
    data.add_argument("--no-header", dest="header", action="store_false",
                      help="columns are then named 1, 2, ...")
    scaling = data.add_mutually_exclusive_group()
    scaling.add_argument("--standardize", dest="standardize", action="store_true", default=None)
    scaling.add_argument("--no-standardize", dest="standardize", action="store_false")
    data.add_argument("--orientation", default=Orientation.X_GIVEN_Y.value,
                      choices=[o.value for o in Orientation],
                      help="x_given_y: DDC(predictors | response); y_given_x swaps a single pair")
    return data


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ddcor", description="Differential distance correlation toolkit")
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()
    data = _dataset_parser()
    method_names = [m.value for m in Method]

    compute_parser = subparsers.add_parser("compute", parents=[common, data], help="coefficient values")
    compute_parser.add_argument("--methods", "-m", nargs="+", default=["ddc"], choices=method_names)

    test_parser = subparsers.add_parser("test", parents=[common, data], help="independence tests")
    test_parser.add_argument("--methods", "-m", nargs="+", default=["ddc"], choices=method_names)

    screen_parser = subparsers.add_parser("screen", parents=[common, data], help="rank and test predictors")
    screen_parser.add_argument("--method", "-m", default="ddc", choices=method_names)
    screen_parser.add_argument("--compare", nargs="+", default=[], choices=method_names)
    screen_parser.add_argument("--scatter", help="write (x, response) pairs of the top predictors here")
    screen_parser.add_argument("--scatter-top", type=int, default=10)

    simulate_parser = subparsers.add_parser("simulate", parents=[common], help="Monte-Carlo experiments")
    simulate_parser.add_argument("experiment", help=", ".join(e.value for e in Experiment))
    simulate_parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    simulate_parser.add_argument("--wide", action="store_true", help="pivot to one row per model and method (or method and rho)")
    return parser


def _setup_logging(verbosity: int) -> None:
    if verbosity <= 0:
        return
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if verbosity > 1 else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _dispatch(args: argparse.Namespace):
    config = RunConfig(
        seed=args.seed,
        permutations=args.permutations,
        level=args.level,
        standardize=getattr(args, "standardize", None),
        threads=args.threads,
        orientation=getattr(args, "orientation", Orientation.X_GIVEN_Y.value),
    )
    if args.command == "simulate":
        table = cmd_simulate(args.experiment, parse_overrides(args.overrides), config, wide=args.wide)
        return cmd_simulate, table

    dataset = DatasetFile(
        path=args.dataset,
        response_columns=args.response,
        predictor_columns=args.predictors,
        header=args.header,
        delimiter=args.delimiter,
    )
    if args.command == "compute":
        return cmd_compute, cmd_compute(dataset, [Method.parse(m) for m in args.methods], config)
    if args.command == "test":
        return cmd_test, cmd_test(dataset, [Method.parse(m) for m in args.methods], config)
    table = cmd_screen(dataset, args.method, config, compare=args.compare,
                       scatter_path=args.scatter, scatter_top=args.scatter_top)
    return cmd_screen, table


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)

    try:
        configure(runs_dir=args.runs_dir, n_jobs=args.threads)
        command, table = _dispatch(args)
    except DDCorError as e:
        print(f"ddcor: error: {e}", file=sys.stderr)
        return e.exit_code

    run = command.last_run
    metadata = {"command": run.name, **run.params, **run.metadata}
    write_table(table, args.format, metadata, path=args.output, stream=sys.stdout)
    logger.debug("run %s finished with %d rows (n_jobs=%d)", run.run_id, len(table), get_config().n_jobs)
    return 0


if __name__ == "__main__":
    sys.exit(main())
