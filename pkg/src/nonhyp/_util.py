"""Seeding, deterministic parallelism, and report serialization helpers."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def spawn_rngs(seed, n):
    """n independent generators derived from one root seed, in a fixed order."""
    seqs = np.random.SeedSequence(seed).spawn(n)
    return [np.random.default_rng(s) for s in seqs]


def stage_rng(seed, stage):
    """Generator for a named pipeline stage; stable across runs and stages."""
    tag = int.from_bytes(stage.encode("utf8"), "little") % (2**32)
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(tag,)))


def pool_size():
    try:
        return max(1, int(os.environ.get("NONHYP_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items, threads=None):
    """Map preserving input order; results are thread-count independent."""
    threads = pool_size() if threads is None else threads
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def fsum_mean(values):
    """Compensated mean (exact summation, then one division)."""
    values = list(values)
    if not values:
        return 0.0
    return math.fsum(values) / len(values)


def sem(values):
    """Standard error of the mean over per-trial values."""
    v = np.asarray(values, dtype=float)
    if v.size <= 1:
        return float("inf")
    return float(v.std(ddof=1) / math.sqrt(v.size))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def canonical_json(obj):
    """Deterministic JSON text: sorted keys, shortest-roundtrip floats."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=1)


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(canonical_json(obj))
        fh.write("\n")
