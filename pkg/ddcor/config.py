from typing import Optional, TYPE_CHECKING
import os

from .errors import ConfigurationError

try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    pass

if TYPE_CHECKING:
    from .storage import RunStore


DEFAULT_DISTANCE_CAP = 20_000
DEFAULT_BLOCK_SIZE = 1024
DEFAULT_PERMUTATION_BLOCK = 100


def _env_int(name: str) -> Optional[int]:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"{name} must be an integer, got {raw!r}")


class _Config:
    """Global configuration for ddcor."""

    def __init__(self):
        self._store: Optional["RunStore"] = None
        self._n_jobs: int = 1
        self._distance_cap: int = DEFAULT_DISTANCE_CAP
        self.block_size: int = DEFAULT_BLOCK_SIZE
        self.permutation_block: int = DEFAULT_PERMUTATION_BLOCK
        self._lazy_init_done = False

    def _lazy_init(self) -> None:
        """Read environment overrides on first access."""
        if self._lazy_init_done:
            return
        self._lazy_init_done = True

        n_jobs = _env_int("DDCOR_N_JOBS")
        if n_jobs is not None:
            self.n_jobs = n_jobs
        cap = _env_int("DDCOR_DISTANCE_CAP")
        if cap is not None:
            self.distance_cap = cap
        if self._store is None:
            runs_dir = os.environ.get("DDCOR_RUNS_DIR")
            if runs_dir:
                from .storage import FileRunStore
                self._store = FileRunStore(runs_dir)

    @property
    def store(self) -> Optional["RunStore"]:
        self._lazy_init()
        return self._store

    @store.setter
    def store(self, value: Optional["RunStore"]) -> None:
        self._lazy_init()
        self._store = value

    @property
    def n_jobs(self) -> int:
        self._lazy_init()
        return self._n_jobs

    @n_jobs.setter
    def n_jobs(self, value: int) -> None:
        if value == 0:
            raise ConfigurationError("n_jobs must be nonzero (-1 uses every core)")
        self._n_jobs = int(value)

    @property
    def distance_cap(self) -> int:
        self._lazy_init()
        return self._distance_cap

    @distance_cap.setter
    def distance_cap(self, value: int) -> None:
        if value < 2:
            raise ConfigurationError("distance_cap must be at least 2")
        self._distance_cap = int(value)


_config = _Config()


def configure(
    store: "RunStore" = None,
    runs_dir: str = None,
    n_jobs: int = None,
    distance_cap: int = None,
    block_size: int = None,
) -> None:
    """
    Configure global settings for ddcor.

    Args:
        store: RunStore instance for auto-saving experiment runs.
        runs_dir: Directory for a FileRunStore (or set DDCOR_RUNS_DIR env var).
        n_jobs: Worker cap for replications and permutations (or DDCOR_N_JOBS).
        distance_cap: Row count above which pairwise distances are streamed
            in blocks instead of materialized (or DDCOR_DISTANCE_CAP).
        block_size: Rows per streamed block.

    Examples:
        # Pick up DDCOR_* env vars
        configure()

        # Keep runs as JSON files
        configure(runs_dir="./runs")

        # Or provide your own store
        configure(store=InMemoryRunStore())
    """
    if store is not None:
        _config.store = store
    elif runs_dir:
        from .storage import FileRunStore
        _config.store = FileRunStore(runs_dir)

    if n_jobs is not None:
        _config.n_jobs = n_jobs
    if distance_cap is not None:
        _config.distance_cap = distance_cap
    if block_size is not None:
        if block_size < 1:
            raise ConfigurationError("block_size must be positive")
        _config.block_size = int(block_size)


def get_config() -> _Config:
    """Get the global configuration instance."""
    return _config
