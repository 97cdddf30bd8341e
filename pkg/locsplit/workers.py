"""Chunked worker pool: daemon threads draining a queue until a None sentinel."""

import logging
import queue
import threading
from collections import Counter

logger = logging.getLogger(__name__)


def run_chunks(func, chunks, jobs=1):
    """Apply `func` to every chunk and return the results in chunk order.

    With jobs <= 1 everything runs inline. Otherwise `jobs` threads pull chunk
    indices from a queue; an exception in any chunk is re-raised after the
    pool drains.
    """
    chunks = list(chunks)
    if jobs <= 1 or len(chunks) <= 1:
        return [func(chunk) for chunk in chunks]

    work = queue.Queue()
    results = {}
    failures = []
    lock = threading.Lock()

    def worker():
        while True:
            index = work.get()
            if index is None:  # sentinel
                work.task_done()
                break
            try:
                value = func(chunks[index])
                with lock:
                    results[index] = value
            except Exception as e:
                logger.debug("chunk %d failed: %r", index, e)
                with lock:
                    failures.append((index, e))
            finally:
                work.task_done()

    threads = []
    for _ in range(min(jobs, len(chunks))):
        thread = threading.Thread(target=worker, daemon=True)
        thread.start()
        threads.append(thread)
    for index in range(len(chunks)):
        work.put(index)
    for _ in threads:
        work.put(None)
    work.join()
    for thread in threads:
        thread.join()

    if failures:
        failures.sort(key=lambda item: item[0])
        raise failures[0][1]
    return [results[index] for index in range(len(chunks))]


def merge_counters(counters):
    total = Counter()
    for counter in counters:
        total.update(counter)
    return total


def split_range(start, stop, size):
    """Half-open [start, stop) cut into consecutive pieces of at most `size`."""
    pieces = []
    lo = start
    while lo < stop:
        hi = min(stop, lo + size)
        pieces.append((lo, hi))
        lo = hi
    return pieces
