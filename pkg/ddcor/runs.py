from typing import Any, Callable, Optional, Union
from enum import Enum
import functools
import inspect
import logging

import numpy as np

from .models import Run, Step
from .context import RunContext, get_current_run, record_step
from .config import get_config

logger = logging.getLogger(__name__)


def summarize_argument(value: Any) -> Any:
    """JSON-safe, size-bounded view of an argument."""
    if isinstance(value, np.ndarray):
        return {"array_shape": list(value.shape)}
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        if len(value) > 20:
            return {"length": len(value)}
        return [summarize_argument(v) for v in value]
    if isinstance(value, dict):
        return {str(k): summarize_argument(v) for k, v in value.items()}
    if hasattr(value, "to_dict"):
        return summarize_argument(value.to_dict())
    if hasattr(value, "shape"):
        return {"shape": list(getattr(value, "shape"))}
    return type(value).__name__


def _bind_arguments(signature: inspect.Signature, args: tuple, kwargs: dict) -> dict:
    try:
        bound = signature.bind(*args, **kwargs)
        bound.apply_defaults()
        return {name: summarize_argument(v) for name, v in bound.arguments.items()}
    except TypeError:
        return {"args": summarize_argument(list(args)), "kwargs": summarize_argument(kwargs)}


class ExperimentWrapper:
    def __init__(self, func: Callable, name: str = None):
        self._func = func
        self._name = name or func.__name__

        self.__name__ = self._name
        self.__doc__ = func.__doc__
        self.__wrapped__ = func
        self.__signature__ = inspect.signature(func)

        self._last_run: Optional[Run] = None

    @property
    def name(self) -> str:
        return self._name

    @property
    def last_run(self) -> Optional[Run]:
        return self._last_run

    def __call__(self, *args, **kwargs) -> Any:
        run = Run(name=self._name, params=_bind_arguments(self.__signature__, args, kwargs))
        self._last_run = run

        with RunContext(run):
            try:
                result = self._func(*args, **kwargs)
                run.complete()
                self._auto_save(run)
                return result
            except Exception as e:
                run.complete(error=str(e))
                self._auto_save(run)
                raise

    def _auto_save(self, run: Run) -> None:
        """Auto-save run if a store is configured."""
        config = get_config()
        if config.store is not None:
            config.store.save(run)
            logger.debug("saved run %s (%s)", run.run_id, run.name)


def experiment(func: Callable = None, *, name: str = None) -> Union[ExperimentWrapper, Callable]:
    def decorator(f: Callable) -> ExperimentWrapper:
        return ExperimentWrapper(f, name=name)

    if func is not None:
        return decorator(func)
    return decorator


def step(func: Callable = None, *, name: str = None) -> Callable:
    """Record each call of an orchestration operation as a Step of the active run."""
    def decorator(f: Callable) -> Callable:
        signature = inspect.signature(f)
        step_name = name or f.__name__

        @functools.wraps(f)
        def wrapper(*args, **kwargs):
            if get_current_run() is None:
                return f(*args, **kwargs)
            current = Step(name=step_name, arguments=_bind_arguments(signature, args, kwargs))
            try:
                result = f(*args, **kwargs)
                current.complete()
                return result
            except Exception as e:
                current.complete(error=str(e))
                raise
            finally:
                record_step(current)

        return wrapper

    if func is not None:
        return decorator(func)
    return decorator
