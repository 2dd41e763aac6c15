"""
Deterministic parallel Monte Carlo.

A master seed is split into one numpy substream per worker; worker w draws
its share of the samples from its own stream and results are concatenated in
worker order, so output depends only on (seed, workers).
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from ..errors import DomainError
from ..patterns.observer import MonteCarloMonitor

logger = logging.getLogger(__name__)

ChunkTask = Callable[[np.random.Generator, int], np.ndarray]


def spawn_streams(seed: int, workers: int) -> List[np.random.Generator]:
    """Independent generators derived from (seed, worker index)."""
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers}")
    children = np.random.SeedSequence(int(seed)).spawn(workers)
    return [np.random.default_rng(child) for child in children]


def split_counts(total: int, workers: int) -> List[int]:
    """Split total draws as evenly as possible; earlier workers take the remainder."""
    if total < 0:
        raise DomainError(f"sample count must be >= 0, got {total}")
    base, extra = divmod(total, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def run_chunks(task: ChunkTask, total: int, seed: int, workers: int = 1,
               monitor: Optional[MonteCarloMonitor] = None) -> np.ndarray:
    """
    Run ``task(rng, count)`` on every worker substream and stack the results.

    Args:
        task: Draws ``count`` results from ``rng``; returns an array whose first axis is the draw
        total: Total number of draws
        seed: Master seed
        workers: Number of substreams / threads
        monitor: Optional run monitor notified per chunk

    Returns:
        Concatenated results in worker order
    """
    streams = spawn_streams(seed, workers)
    counts = split_counts(total, workers)
    if monitor:
        monitor.log_event('run_started', f"{total} draws on {workers} worker(s)",
                          metadata={'draws': total, 'workers': workers})

    def run_one(index: int) -> np.ndarray:
        result = np.asarray(task(streams[index], counts[index]))
        if monitor:
            monitor.log_event('chunk_done', f"worker {index}", metadata={'draws': counts[index]})
        return result

    if workers == 1:
        chunks = [run_one(0)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(run_one, range(workers)))

    if monitor:
        monitor.log_event('run_finished', f"{total} draws", metadata={'draws': total})
    non_empty = [chunk for chunk in chunks if chunk.shape[0] > 0]
    if not non_empty:
        return chunks[0]
    return np.concatenate(non_empty, axis=0)


@dataclass(frozen=True)
class MeanEstimate:
    """Sample mean with its standard error (elementwise for arrays)."""

    mean: np.ndarray
    stderr: np.ndarray
    n: int

    @classmethod
    def of(cls, draws: np.ndarray) -> 'MeanEstimate':
        draws = np.asarray(draws, dtype=float)
        n = draws.shape[0]
        mean = draws.mean(axis=0)
        stderr = draws.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros_like(mean)
        return cls(mean, stderr, n)

    def within(self, expected, sigmas: float) -> bool:
        return bool(np.all(np.abs(self.mean - np.asarray(expected)) <= sigmas * self.stderr))
