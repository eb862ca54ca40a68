import numpy as np
import pytest

from ddcor.config import get_config
from ddcor.storage import InMemoryRunStore

from tests.config import SEED


@pytest.fixture(autouse=True)
def _restore_config():
    """Undo any global configuration a test (or the CLI) applies."""
    config = get_config()
    saved = (config.store, config.n_jobs, config.distance_cap, config.block_size, config.permutation_block)
    yield
    config.store, config.n_jobs, config.distance_cap, config.block_size, config.permutation_block = saved


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture
def memory_store():
    store = InMemoryRunStore()
    get_config().store = store
    return store


@pytest.fixture
def small_blocks():
    """Force the streamed-distance code paths on small inputs."""
    config = get_config()
    config.distance_cap = 10
    config.block_size = 7
    return config


@pytest.fixture
def write_csv(tmp_path):
    def _write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return _write
