from abc import ABC, abstractmethod
from typing import List, Optional, Union
from pathlib import Path
import json
import logging
import os

from .models import Run

logger = logging.getLogger(__name__)


class RunStore(ABC):
    """Where finished experiment runs are kept."""

    @abstractmethod
    def save(self, run: Run) -> None:
        pass

    @abstractmethod
    def get(self, run_id: str) -> Optional[Union[Run, dict]]:
        pass

    @abstractmethod
    def list(self, limit: int = 100, name: Optional[str] = None) -> List[Union[Run, dict]]:
        """Most recent runs first, optionally only those of one experiment."""


class InMemoryRunStore(RunStore):
    def __init__(self):
        self._runs = {}

    def save(self, run: Run) -> None:
        self._runs[run.run_id] = run

    def get(self, run_id: str) -> Optional[Run]:
        return self._runs.get(run_id)

    def list(self, limit: int = 100, name: Optional[str] = None) -> List[Run]:
        runs = [r for r in self._runs.values() if name is None or r.name == name]
        runs.sort(key=lambda r: r.started_at, reverse=True)
        return runs[:limit]

    def clear(self) -> None:
        self._runs.clear()


class FileRunStore(RunStore):
    """One ``<run_id>.json`` file per run."""

    def __init__(self, base_path: str = "./runs"):
        self.base_path = Path(base_path)
        self.base_path.mkdir(parents=True, exist_ok=True)

    def _path(self, run_id: str) -> Path:
        return self.base_path / f"{run_id}.json"

    def save(self, run: Run) -> None:
        path = self._path(run.run_id)
        partial = path.with_suffix(".json.partial")
        with open(partial, "w", encoding="utf-8") as f:
            f.write(run.to_json())
        os.replace(partial, path)

    def get(self, run_id: str) -> Optional[dict]:
        path = self._path(run_id)
        if not path.exists():
            return None
        with open(path, encoding="utf-8") as f:
            return json.load(f)

    def list(self, limit: int = 100, name: Optional[str] = None) -> List[dict]:
        runs = []
        for path in self.base_path.glob("*.json"):
            try:
                with open(path, encoding="utf-8") as f:
                    record = json.load(f)
            except json.JSONDecodeError:
                logger.warning("skipping unreadable run record %s", path)
                continue
            if name is None or record.get("name") == name:
                runs.append(record)
        runs.sort(key=lambda r: r.get("started_at", ""), reverse=True)
        return runs[:limit]
