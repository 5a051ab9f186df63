"""Loader for the bundled timing calibration (bus cycles, compute constants, unit rates)."""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path


@lru_cache(maxsize=4)
def _load(path: str | None) -> dict:
    if path is None:
        text = resources.files("hhekit").joinpath("data/calibration.json").read_text()
    else:
        text = Path(path).read_text()
    return json.loads(text)


def load_calibration(path: str | Path | None = None) -> dict:
    """Parsed calibration; returns a fresh copy so callers may tweak it."""
    return json.loads(json.dumps(_load(None if path is None else str(path))))
