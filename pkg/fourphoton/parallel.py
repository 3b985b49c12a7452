"""
Row evaluation engine for scans.

Threading-only implementation: rows are split into chunks, chunks run on a
thread pool, and results are reassembled in input order so the output does
not depend on scheduling.
"""

import logging
import warnings
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor, as_completed

import numpy as np

from .errors import NumericalFailure

logger = logging.getLogger(__name__)

_NUMERICAL_ERRORS = (ArithmeticError, np.linalg.LinAlgError)


class ParallelConfig:
    """Configuration for parallel row evaluation."""

    def __init__(self, n_workers: int | None = None, chunk_size: int = 16):
        if n_workers is not None and n_workers < 1:
            raise ValueError(f"n_workers must be >= 1, got {n_workers}")
        if chunk_size < 1:
            raise ValueError(f"chunk_size must be >= 1, got {chunk_size}")
        self.n_workers = n_workers
        self.chunk_size = chunk_size

    @property
    def is_serial(self) -> bool:
        """Whether rows are evaluated on the calling thread."""
        return self.n_workers == 1


class ParallelScanEngine:
    """
    Evaluate a function over scan rows, optionally on a thread pool.

    Output order always follows input order.
    """

    def __init__(self, config: ParallelConfig | None = None):
        self.config = config or ParallelConfig()

    def map_rows[T, R](self, func: Callable[[T], R], rows: Sequence[T]) -> list[R]:
        """
        Apply ``func`` to every row.

        Parameters
        ----------
        func : Callable
            Pure function of one row
        rows : Sequence
            Row inputs

        Returns
        -------
        list
            ``[func(r) for r in rows]`` in input order

        Raises
        ------
        NumericalFailure
            If a row fails with an arithmetic or linear-algebra error; the
            first failure is chained. Other exceptions propagate unchanged.
        """
        chunk_size = self.config.chunk_size
        if self.config.is_serial or len(rows) <= chunk_size:
            try:
                return _run_chunk(func, rows)
            except _NUMERICAL_ERRORS as e:
                raise NumericalFailure(f"Scan row failed: {e}") from e

        chunks = [rows[i : i + chunk_size] for i in range(0, len(rows), chunk_size)]
        max_workers = self.config.n_workers or min(4, len(chunks))
        logger.debug(
            "Evaluating %d rows in %d chunks on %d threads",
            len(rows),
            len(chunks),
            max_workers,
        )

        results: dict[int, list[R]] = {}
        failures: list[tuple[int, BaseException]] = []
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            future_to_index = {
                executor.submit(_run_chunk, func, chunk): i
                for i, chunk in enumerate(chunks)
            }
            for future in as_completed(future_to_index):
                index = future_to_index[future]
                try:
                    results[index] = future.result()
                except Exception as e:
                    warnings.warn(f"Scan chunk {index} failed: {e}", stacklevel=2)
                    failures.append((index, e))

        if failures:
            index, error = min(failures, key=lambda item: item[0])
            if not isinstance(error, _NUMERICAL_ERRORS):
                raise error
            raise NumericalFailure(f"Scan chunk {index} failed: {error}") from error
        return [value for i in range(len(chunks)) for value in results[i]]


def _run_chunk[T, R](func: Callable[[T], R], chunk: Sequence[T]) -> list[R]:
    return [func(row) for row in chunk]


def parallel_map[T, R](
    func: Callable[[T], R],
    rows: Sequence[T],
    config: ParallelConfig | None = None,
) -> list[R]:
    """Return a convenience wrapper for ordered parallel evaluation."""
    return ParallelScanEngine(config).map_rows(func, rows)
