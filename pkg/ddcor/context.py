from contextvars import ContextVar
from typing import Any, Optional

from .models import Run, Step


_current_run: ContextVar[Optional[Run]] = ContextVar("current_run", default=None)


def get_current_run() -> Optional[Run]:
    return _current_run.get()


class RunContext:
    """Makes ``run`` the active run for the duration of the block."""

    def __init__(self, run: Run):
        self.run = run
        self._token = None

    def __enter__(self) -> Run:
        self._token = _current_run.set(self.run)
        return self.run

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        _current_run.reset(self._token)
        if exc_type is not None and self.run.ended_at is None:
            self.run.complete(error=f"{exc_type.__name__}: {exc_val}")
        return False


def record_step(step: Step) -> None:
    # joblib workers start without a run, so their steps are dropped
    run = get_current_run()
    if run is not None:
        run.add_step(step)


def annotate_run(**metadata: Any) -> None:
    """Attach results-level facts (flag counts, resolved parameters) to the active run."""
    run = get_current_run()
    if run is not None:
        run.metadata.update(metadata)
