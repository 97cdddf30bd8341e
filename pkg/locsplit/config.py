"""Defaults for engines and the command line."""

from dataclasses import dataclass, field
import random

DEFAULT_SEED = 0
DEFAULT_JOBS = 1

# arith-core
FACTOR_CACHE_FILE = "factor-cache.jsonl"

# split-values
DEFAULT_HEIGHT_BOUND = 10**3
DEFAULT_DENOMINATOR_BOUND = 1
SEARCH_CHUNK_SIZE = 2048

# strong-approx
LINE_TRICK_MAX_RETRIES = 32
LINE_PERTURBATION_RADIUS = 5
DEFAULT_NORM_BOX = 40

# galois-class
DEFAULT_PRIME_BOUND = 500
DEFAULT_SPLIT_PRIME_BOUND = 10**5
CYCLE_SCAN_SEGMENT = 500

# schinzel-sieve
DEFAULT_MU_MAX = 100
SIEVE_SEGMENT = 64
DEFAULT_FORBIDDEN_BOX = 100


@dataclass(frozen=True)
class RunSettings:
    """Settings shared by a single run; every random choice flows from `seed`."""

    seed: int = DEFAULT_SEED
    jobs: int = DEFAULT_JOBS
    cache_path: str | None = None
    assumed: frozenset = field(default_factory=frozenset)

    def rng(self, salt=0):
        return random.Random(self.seed * 1_000_003 + salt)
