"""Persistent append-only factorization cache (JSON lines)."""

import json
import logging
import os
import threading

from sympy import isprime

logger = logging.getLogger(__name__)


class FactorCache:
    """Map from positive integers to {prime: exponent}, persisted one entry per line.

    Entries are re-validated on load (product check and primality of every
    factor); corrupt lines are dropped, never trusted.
    """

    def __init__(self, path):
        self.path = path
        self._entries = {}
        self._lock = threading.Lock()
        self.dropped = 0
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        if os.path.exists(path):
            self._load()

    def _load(self):
        with open(self.path, "r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                    n = int(record["n"])
                    factors = {int(p): int(e) for p, e in record["factors"]}
                except (ValueError, KeyError, TypeError) as e:
                    logger.warning("cache line %d unreadable (%s); dropped", line_number, e)
                    self.dropped += 1
                    continue
                if not self._valid(n, factors):
                    logger.warning("cache line %d fails validation; dropped", line_number)
                    self.dropped += 1
                    continue
                self._entries[n] = factors
        logger.info("loaded %d factorizations from %s", len(self._entries), self.path)

    @staticmethod
    def _valid(n, factors):
        if n < 1:
            return False
        product = 1
        for p, e in factors.items():
            if e < 1 or not isprime(p):
                return False
            product *= p**e
        return product == n

    def __len__(self):
        return len(self._entries)

    def get(self, n):
        with self._lock:
            found = self._entries.get(n)
        return dict(found) if found is not None else None

    def put(self, n, factors):
        with self._lock:
            if n in self._entries:
                return
            self._entries[n] = dict(factors)
            record = {"n": str(n), "factors": [[str(p), e] for p, e in sorted(factors.items())]}
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(json.dumps(record) + "\n")
