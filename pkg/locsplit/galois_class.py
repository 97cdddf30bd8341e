"""Frobenius cycle types, the almost-abelian classifier and split-prime discovery."""

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
import logging

from sympy import isprime, primerange

from . import config
from .arith import is_rational_square
from .errors import CyclicAlready, DomainError, NotFound
from .fields import NumberFieldAbs, reduce_mod_p, splits_completely
from .finite_fields import factor_mod
from .polys import PolyOverQ, discriminant
from .workers import run_chunks, split_range

logger = logging.getLogger(__name__)


@dataclass
class CycleTypeProfile:
    """How often each factorization pattern of f mod p occurred, with the first prime showing it."""

    degree: int
    counts: Counter = field(default_factory=Counter)
    first_prime: dict = field(default_factory=dict)
    scanned: int = 0
    skipped: int = 0

    def record(self, p, cycle_type):
        self.counts[cycle_type] += 1
        self.first_prime.setdefault(cycle_type, p)
        self.scanned += 1

    def merge(self, other):
        self.counts.update(other.counts)
        for cycle_type, p in other.first_prime.items():
            if cycle_type not in self.first_prime or p < self.first_prime[cycle_type]:
                self.first_prime[cycle_type] = p
        self.scanned += other.scanned
        self.skipped += other.skipped
        return self

    @property
    def types(self):
        return sorted(self.counts)

    def as_json(self):
        return {
            "degree": self.degree,
            "scanned": self.scanned,
            "skipped": self.skipped,
            "types": [
                {"type": list(t), "count": self.counts[t], "first_prime": self.first_prime[t]} for t in self.types
            ],
        }


def _require_integral_field(f):
    if not f.is_monic or not f.has_integer_coeffs:
        raise DomainError(f"{f} must be monic with integer coefficients")
    return NumberFieldAbs(f)


def cycle_type(f, p):
    """Sorted factor degrees of f mod p."""
    return tuple(sorted(h.degree for h, k in factor_mod(reduce_mod_p(f, p)) for _ in range(k)))


def _scan_segment(K, segment):
    profile = CycleTypeProfile(K.degree)
    lo, hi = segment
    for p in map(int, primerange(lo, hi)):
        if not K.is_unramified(p):
            profile.skipped += 1
            continue
        profile.record(p, cycle_type(K.P, p))
    return profile


def cycle_type_scan(f, prime_bound, jobs=config.DEFAULT_JOBS):
    """Cycle types of Frobenius at every unramified prime up to prime_bound."""
    K = _require_integral_field(f)
    segments = split_range(2, prime_bound + 1, config.CYCLE_SCAN_SEGMENT)
    profile = CycleTypeProfile(K.degree)
    for part in run_chunks(lambda seg: _scan_segment(K, seg), segments, jobs):
        profile.merge(part)
    logger.info("scanned %d primes up to %d (%d ramified skipped)", profile.scanned, prime_bound, profile.skipped)
    return profile


def is_homogeneous(cycle_type):
    return len(set(cycle_type)) == 1


def violates_fixed_point_bound(cycle_type):
    """At least two fixed points and a nontrivial cycle: impossible for x -> ax + b on F_p."""
    return cycle_type.count(1) >= 2 and max(cycle_type) > 1


def is_affine_pattern(cycle_type, p):
    if cycle_type == (p,) or all(c == 1 for c in cycle_type):
        return True
    rest = [c for c in cycle_type if c != 1]
    return cycle_type.count(1) == 1 and len(set(rest)) == 1 and (p - 1) % rest[0] == 0


class AlmostAbelian(Enum):
    ABELIAN = "Abelian"
    AFFINE_COMPATIBLE = "AffineCompatible"
    REJECTED = "Rejected"
    OUTSIDE_DEFINITION = "OutsideDefinition"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class AlmostAbelianVerdict:
    value: AlmostAbelian
    evidence: CycleTypeProfile = None
    witness_prime: int = None
    witness_type: tuple = None
    abelian: bool = False
    note: str = None

    def as_json(self):
        out = {"verdict": self.value.value, "abelian": self.abelian}
        if self.witness_prime is not None:
            out["witness"] = {"p": self.witness_prime, "type": list(self.witness_type)}
        if self.note:
            out["note"] = self.note
        if self.evidence is not None:
            out["evidence"] = self.evidence.as_json()
        return out


def almost_abelian_test(f, prime_bound=config.DEFAULT_PRIME_BOUND, jobs=config.DEFAULT_JOBS):
    """Classify Q[x]/(f) against the almost-abelian definition using Frobenius cycle types."""
    K = _require_integral_field(f)
    d = K.degree
    if d <= 2:
        return AlmostAbelianVerdict(AlmostAbelian.ABELIAN, abelian=True, note="degree <= 2")
    if d == 3:
        square = is_rational_square(K.discriminant)
        return AlmostAbelianVerdict(
            AlmostAbelian.AFFINE_COMPATIBLE,
            abelian=square,
            note="cubic extensions are almost abelian" + ("; cyclic" if square else ""),
        )
    profile = cycle_type_scan(f, prime_bound, jobs)
    if not profile.scanned:
        return AlmostAbelianVerdict(AlmostAbelian.INCONCLUSIVE, profile, note="no unramified prime below the bound")
    homogeneous = all(is_homogeneous(t) for t in profile.types)
    if not isprime(d):
        if homogeneous:
            return AlmostAbelianVerdict(AlmostAbelian.ABELIAN, profile, abelian=True)
        return AlmostAbelianVerdict(
            AlmostAbelian.OUTSIDE_DEFINITION, profile, note="composite degree and not abelian"
        )
    violations = [t for t in profile.types if violates_fixed_point_bound(t)]
    if violations:
        witness = min(violations, key=lambda t: profile.first_prime[t])
        return AlmostAbelianVerdict(
            AlmostAbelian.REJECTED, profile, profile.first_prime[witness], witness
        )
    odd = [t for t in profile.types if not is_affine_pattern(t, d)]
    if odd:
        witness = min(odd, key=lambda t: profile.first_prime[t])
        return AlmostAbelianVerdict(
            AlmostAbelian.INCONCLUSIVE,
            profile,
            profile.first_prime[witness],
            witness,
            note="pattern outside the affine group without a double fixed point",
        )
    return AlmostAbelianVerdict(AlmostAbelian.AFFINE_COMPATIBLE, profile, abelian=homogeneous)


def cyclic_resolvent_cubic(f):
    """x^2 - disc(f): the quadratic subfield of the Galois closure of a non-cyclic cubic."""
    if f.degree != 3 or not f.is_irreducible():
        raise DomainError(f"{f} is not an irreducible cubic")
    disc = discriminant(f)
    if is_rational_square(disc):
        raise CyclicAlready(f"disc({f}) = {disc} is a square: the extension is already cyclic")
    return PolyOverQ((-disc, 0, 1))


def find_split_prime(fields, exclude=(), bound=config.DEFAULT_SPLIT_PRIME_BOUND):
    """Smallest prime <= bound outside `exclude` splitting completely in every field."""
    if not fields:
        raise DomainError("find_split_prime needs at least one field")
    excluded = {getattr(p, "prime", p) for p in exclude}
    for p in map(int, primerange(2, bound + 1)):
        if p in excluded:
            continue
        if not all(K.is_unramified(p) for K in fields):
            continue
        if all(splits_completely(K, p) for K in fields):
            logger.debug("split prime %d", p)
            return int(p)
    raise NotFound(f"no prime <= {bound} splits completely in every field")
