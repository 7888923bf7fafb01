"""Source of L_{n^2-4}(1/2) for long runs of consecutive traces.

Values come from the on-disk cache (a float64 .npy indexed by n, NaN where
not yet computed) when it covers the request, otherwise from the batch
engine.  The cache is written by the same engine, so both paths return
identical numbers.
"""

from __future__ import annotations

import os
from functools import lru_cache
from pathlib import Path

import numpy as np

from ._fastl import N_LIMIT, HalfLineEngine

DATA_ENV = "ZAGIER_WORKBENCH_DATA"
CACHE_NAME = "half_values.npy"


def data_dir(override: str | os.PathLike | None = None) -> Path:
    """Flag override, then the environment variable, then ./data."""
    if override is not None:
        return Path(override)
    return Path(os.environ.get(DATA_ENV, "data"))


def load_cache(directory: str | os.PathLike | None = None) -> np.ndarray | None:
    path = data_dir(directory) / CACHE_NAME
    if not path.exists():
        return None
    arr = np.load(path, mmap_mode="r")
    if arr.ndim != 1 or arr.dtype != np.float64:
        raise ValueError(f"{path} is not a 1-d float64 array")
    return arr


@lru_cache(maxsize=2)
def _engine(n_max: int) -> HalfLineEngine:
    return HalfLineEngine(n_max)


def engine_values(n_lo: int, n_hi: int) -> np.ndarray:
    # round the table size up so nearby requests share one engine
    size = min(max(1 << 12, 1 << int(n_hi - 1).bit_length()), max(N_LIMIT, n_hi - 1))
    return _engine(size).values(n_lo, n_hi)


def half_values(n_lo: int, n_hi: int, data_dir=None, use_cache: bool = True) -> np.ndarray:
    """L_{n^2-4}(1/2) for n_lo <= n < n_hi (n_lo >= 3)."""
    if n_hi <= n_lo:
        return np.empty(0)
    if use_cache:
        arr = load_cache(data_dir)
        if arr is not None and n_hi <= arr.shape[0]:
            chunk = np.array(arr[n_lo:n_hi])
            if not np.isnan(chunk).any():
                return chunk
    return engine_values(n_lo, n_hi)
