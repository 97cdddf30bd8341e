"""Exact rationals, factorizations, valuations and CRT congruence machinery."""

from dataclasses import dataclass
from fractions import Fraction
import logging
import math
import threading

from sympy import factorint, isprime
from sympy.ntheory.modular import crt

from .errors import DomainError, UnfactoredError

logger = logging.getLogger(__name__)

Rational = Fraction


class _Infinity:
    """Valuation of zero. Compares above every integer; supports no arithmetic."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "+inf"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("locsplit.+inf")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True


INFINITY = _Infinity()

_factor_cache = None
_factor_cache_lock = threading.Lock()


def use_factor_cache(cache):
    """Route integer factorization through `cache` (or stop doing so with None)."""
    global _factor_cache
    with _factor_cache_lock:
        _factor_cache = cache


def as_rational(value):
    """Coerce ints, strings like '13/4', Fractions and sympy Rationals to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DomainError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError as e:
            raise DomainError(f"not a rational number: {value!r}") from e
    if hasattr(value, "p") and hasattr(value, "q"):
        return Fraction(int(value.p), int(value.q))
    if hasattr(value, "numerator") and hasattr(value, "denominator"):
        return Fraction(int(value.numerator), int(value.denominator))
    raise DomainError(f"cannot interpret {value!r} as a rational number")


def is_prime(n):
    return isinstance(n, int) and n > 1 and isprime(n)


def require_prime(p):
    if not is_prime(p):
        raise DomainError(f"{p} is not a prime")
    return p


def height(q):
    q = as_rational(q)
    return max(abs(q.numerator), q.denominator)


def factor_integer(n):
    """Certified factorization of a positive integer as {prime: exponent}."""
    if n < 1:
        raise DomainError(f"factor_integer expects a positive integer, got {n}")
    if n == 1:
        return {}
    cache = _factor_cache
    if cache is not None:
        cached = cache.get(n)
        if cached is not None:
            return cached
    factors = {int(p): int(e) for p, e in factorint(n).items()}
    unfactored = [p for p in factors if not isprime(p)]
    if unfactored:
        raise UnfactoredError(n, unfactored[0])
    if cache is not None:
        cache.put(n, factors)
    return factors


@dataclass(frozen=True)
class PrimeFactorization:
    """sign * prod(p**e) with primes strictly increasing and exponents nonzero."""

    sign: int
    factors: tuple = ()

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise DomainError(f"sign must be +1 or -1, got {self.sign}")
        previous = 1
        for p, e in self.factors:
            if p <= previous:
                raise DomainError("primes must be strictly increasing")
            if e == 0:
                raise DomainError(f"zero exponent for prime {p}")
            if not is_prime(p):
                raise DomainError(f"{p} is not prime")
            previous = p

    @property
    def primes(self):
        return tuple(p for p, _ in self.factors)

    def exponent(self, p):
        for prime, e in self.factors:
            if prime == p:
                return e
        return 0

    def value(self):
        result = Fraction(self.sign)
        for p, e in self.factors:
            result *= Fraction(p) ** e
        return result

    def as_json(self):
        return {"sign": self.sign, "factors": [[p, e] for p, e in self.factors]}


def factor(q):
    """Signed factorization of a nonzero rational; denominator primes get negative exponents."""
    q = as_rational(q)
    if q == 0:
        raise DomainError("cannot factor zero")
    exponents = dict(factor_integer(abs(q.numerator)))
    for p, e in factor_integer(q.denominator).items():
        exponents[p] = exponents.get(p, 0) - e
    return PrimeFactorization(1 if q > 0 else -1, tuple(sorted(exponents.items())))


def valuation(q, p):
    """p-adic valuation of a rational; INFINITY for zero."""
    require_prime(p)
    q = as_rational(q)
    if q == 0:
        return INFINITY
    return _int_valuation(q.numerator, p) - _int_valuation(q.denominator, p)


def _int_valuation(n, p):
    n = abs(n)
    count = 0
    while n % p == 0:
        n //= p
        count += 1
    return count


def prime_support(q):
    """Primes dividing the numerator or the denominator of a nonzero rational."""
    return factor(q).primes


def rational_residue(q, modulus):
    """Residue of a rational modulo `modulus`, which must be coprime to its denominator."""
    q = as_rational(q)
    if math.gcd(q.denominator, modulus) != 1:
        raise DomainError(f"{q} is not integral modulo {modulus}")
    return q.numerator * pow(q.denominator, -1, modulus) % modulus


def strip_primes(n, primes):
    """Split a nonzero integer into its part supported on `primes` and the cofactor."""
    n = abs(n)
    s_part = {}
    for p in sorted(primes):
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            s_part[p] = e
    return s_part, n


def is_rational_square(q):
    q = as_rational(q)
    if q < 0:
        return False
    return all(math.isqrt(n) ** 2 == n for n in (q.numerator, q.denominator))


def _is_prime_power(m):
    return m > 1 and len(factorint(m)) == 1


@dataclass(frozen=True)
class CongruenceSystem:
    """x = residue (mod modulus) for each pair; moduli are prime powers."""

    congruences: tuple = ()

    def __post_init__(self):
        for modulus, residue in self.congruences:
            if not _is_prime_power(modulus):
                raise DomainError(f"modulus {modulus} is not a prime power")
            if not 0 <= residue < modulus:
                raise DomainError(f"residue {residue} not reduced modulo {modulus}")

    @classmethod
    def from_pairs(cls, pairs):
        return cls(tuple((int(m), int(r) % int(m)) for m, r in pairs))


def crt_solve(system):
    """Unique residue class (residue, modulus) satisfying every congruence."""
    moduli = [m for m, _ in system.congruences]
    for i in range(len(moduli)):
        for j in range(i + 1, len(moduli)):
            if math.gcd(moduli[i], moduli[j]) != 1:
                raise DomainError(f"moduli {moduli[i]} and {moduli[j]} are not coprime")
    if not moduli:
        return 0, 1
    residue, modulus = crt(moduli, [r for _, r in system.congruences])
    return int(residue), int(modulus)
