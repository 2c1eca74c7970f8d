"""JSON reports written atomically, with timings kept in their own field."""

from __future__ import annotations

import json
import os
import tempfile
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__


def _default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, default=_default, allow_nan=False) + "\n"


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


class Timer:
    """Collects named wall-clock stage durations."""

    def __init__(self):
        self.stages = {}

    @contextmanager
    def stage(self, name):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.stages[name] = self.stages.get(name, 0.0) + time.perf_counter() - start


def build_report(command: str, config: dict, result: dict, timings: dict) -> dict:
    return {
        "version": __version__,
        "command": command,
        "config": config,
        "seed": config.get("seed"),
        "result": result,
        "timings": timings,
    }


def write_report(path, report: dict) -> Path:
    return atomic_write_text(path, dumps(report))
