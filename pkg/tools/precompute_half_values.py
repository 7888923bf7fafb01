"""Fill the on-disk cache of L_{n^2-4}(1/2) for 3 <= n <= n_max.

The cache is a float64 .npy indexed by n (entries below 3 are 0, pending
entries NaN).  Work is flushed every chunk, so an interrupted run resumes.

    python3 tools/precompute_half_values.py --n-max 1000000 --out data/half_values.npy
"""

import argparse
import logging
import time
from pathlib import Path

import numpy as np
from numpy.lib.format import open_memmap

from zagier_workbench._fastl import HalfLineEngine

log = logging.getLogger("precompute")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-max", type=int, default=1_000_000)
    ap.add_argument("--out", type=Path, default=Path("data/half_values.npy"))
    ap.add_argument("--chunk", type=int, default=2000)
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    size = args.n_max + 1
    if args.out.exists():
        arr = open_memmap(args.out, mode="r+")
        if arr.shape != (size,):
            raise SystemExit(f"{args.out} has shape {arr.shape}, expected ({size},)")
    else:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        arr = open_memmap(args.out, mode="w+", dtype=np.float64, shape=(size,))
        arr[:] = np.nan
        arr[:3] = 0.0
        arr.flush()

    engine = HalfLineEngine(args.n_max)
    t0 = time.time()
    for lo in range(3, size, args.chunk):
        hi = min(size, lo + args.chunk)
        if not np.isnan(arr[lo:hi]).any():
            continue
        arr[lo:hi] = engine.values(lo, hi)
        arr.flush()
        log.info("n < %d done (%.0f s)", hi, time.time() - t0)


if __name__ == "__main__":
    main()
