"""Local norm tests, Hilbert symbols and cyclic invariants over Q."""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
import logging
import math

from sympy import isprime, legendre_symbol, primerange

from .arith import INFINITY, as_rational, factor, rational_residue, require_prime, valuation
from .errors import DomainError, RamifiedCaseError
from .fields import KElement, places_above

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Place:
    """A place of Q: the real place (prime None) or a finite prime."""

    prime: int = None

    def __post_init__(self):
        if self.prime is not None:
            require_prime(self.prime)

    @classmethod
    def finite(cls, p):
        return cls(int(p))

    @classmethod
    def parse(cls, text):
        text = str(text).strip().lower()
        if text in ("real", "inf", "infinity", "r"):
            return REAL
        try:
            return cls.finite(int(text))
        except ValueError as e:
            raise DomainError(f"not a place of Q: {text!r}") from e

    @property
    def is_real(self):
        return self.prime is None

    def sort_key(self):
        return (0, 0) if self.is_real else (1, self.prime)

    def __str__(self):
        return "real" if self.is_real else str(self.prime)


REAL = Place()


def sorted_places(places):
    return sorted(places, key=Place.sort_key)


class Norm(Enum):
    IS_NORM = "IsNorm"
    NOT_NORM = "NotNorm"
    UNDETERMINED = "Undetermined"


RAMIFIED_CASE = "RamifiedCase"
NON_QUADRATIC_WILD = "NonQuadraticWild"
INSUFFICIENT_PRECISION = "InsufficientPrecision"
ASSUMED = "Assumed"


@dataclass(frozen=True)
class NormVerdict:
    kind: Norm
    reason: str = None

    @classmethod
    def is_norm(cls, reason=None):
        return cls(Norm.IS_NORM, reason)

    @classmethod
    def not_norm(cls):
        return cls(Norm.NOT_NORM)

    @classmethod
    def undetermined(cls, reason):
        return cls(Norm.UNDETERMINED, reason)

    @property
    def is_undetermined(self):
        return self.kind is Norm.UNDETERMINED

    def as_json(self):
        out = {"value": self.kind.value}
        if self.reason:
            out["reason"] = self.reason
        return out

    def __str__(self):
        return f"{self.kind.value}({self.reason})" if self.reason else self.kind.value


def combine_verdicts(verdicts):
    """NotNorm if any component is; IsNorm only if every component is."""
    verdicts = list(verdicts)
    for v in verdicts:
        if v.kind is Norm.NOT_NORM:
            return v
    for v in verdicts:
        if v.is_undetermined:
            return v
    return NormVerdict.is_norm()


# -- Hilbert symbols ----------------------------------------------------------


def _split_unit(q, p):
    """(alpha, u) with q = p**alpha * u and u a p-adic unit."""
    alpha = valuation(q, p)
    return alpha, q / Fraction(p) ** alpha


def _legendre(u, p):
    return int(legendre_symbol(rational_residue(u, p), p))


def hilbert_symbol(a, b, place):
    """(a, b)_v in {+1, -1}: +1 iff z^2 = a x^2 + b y^2 has a nontrivial solution over Q_v."""
    a, b = as_rational(a), as_rational(b)
    if a == 0 or b == 0:
        raise DomainError("Hilbert symbol of zero")
    if place.is_real:
        return -1 if a < 0 and b < 0 else 1
    p = place.prime
    alpha, u = _split_unit(a, p)
    beta, v = _split_unit(b, p)
    if p != 2:
        sign = -1 if (alpha * beta * (p - 1) // 2) % 2 else 1
        return sign * _legendre(u, p) ** (beta % 2) * _legendre(v, p) ** (alpha % 2)
    u8, v8 = rational_residue(u, 8), rational_residue(v, 8)

    def eps(z):
        return ((z - 1) // 2) % 2

    def omega(z):
        return ((z * z - 1) // 8) % 2

    exponent = eps(u8) * eps(v8) + alpha * omega(v8) + beta * omega(u8)
    return -1 if exponent % 2 else 1


def _symbol_to_invariant(symbol):
    return Fraction(0) if symbol == 1 else Fraction(1, 2)


def relevant_places(*values):
    """The real place and every prime dividing 2 * prod(values)."""
    primes = {2}
    for q in values:
        primes.update(factor(q).primes)
    return [REAL] + [Place.finite(p) for p in sorted(primes)]


def reciprocity_defect(a, b):
    """Sum of the local invariants of the quaternion algebra (a, b); always 0."""
    a, b = as_rational(a), as_rational(b)
    if a == 0 or b == 0:
        raise DomainError("reciprocity defect of zero")
    total = sum((_symbol_to_invariant(hilbert_symbol(a, b, v)) for v in relevant_places(a, b)), Fraction(0))
    return total % 1


# -- Dirichlet characters -----------------------------------------------------


@dataclass(frozen=True)
class DirichletCharacter:
    """Character of (Z/m)^* with values in (1/n)Z/Z, stored as a residue -> Fraction table."""

    modulus: int
    values: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.modulus < 1:
            raise DomainError("modulus must be positive")
        table = dict(self.values)
        units = [r for r in range(self.modulus) if math.gcd(r, self.modulus) == 1]
        if sorted(table) != units:
            raise DomainError("character table must cover exactly the units mod m")
        # primes below m generate the unit group
        generators = [q for q in primerange(2, max(self.modulus, 3)) if self.modulus % q]
        for r in units:
            for s in generators:
                if (table[r] + table[s] - table[r * s % self.modulus]) % 1:
                    raise DomainError(f"table is not multiplicative at {r}, {s}")
        object.__setattr__(self, "values", tuple(sorted((r, Fraction(v) % 1) for r, v in table.items())))

    @classmethod
    def from_generators(cls, modulus, generator_values):
        """Close the values on generators under multiplication."""
        table = {1 % modulus: Fraction(0)}
        frontier = [1 % modulus]
        gens = {g % modulus: Fraction(v) % 1 for g, v in generator_values.items()}
        for g in gens:
            if math.gcd(g, modulus) != 1:
                raise DomainError(f"generator {g} is not a unit mod {modulus}")
        while frontier:
            r = frontier.pop()
            for g, value in gens.items():
                s = r * g % modulus
                new = (table[r] + value) % 1
                if s in table:
                    if table[s] != new:
                        raise DomainError(f"inconsistent values: the generators do not define a character mod {modulus}")
                    continue
                table[s] = new
                frontier.append(s)
        return cls(modulus, tuple(table.items()))

    @classmethod
    def kronecker(cls, D):
        """Quadratic character attached to Q(sqrt(D))."""
        D = int(D)
        if D == 0:
            raise DomainError("kronecker character of 0")
        sign = -1 if D < 0 else 1
        core = sign * math.prod(p for p, e in factor(abs(D)).factors if e % 2)
        if core == 1:
            raise DomainError(f"{D} is a square; Q(sqrt({D})) is not quadratic")
        d = core if core % 4 == 1 else 4 * core
        m = abs(d)
        table = {}
        for r in range(m):
            if math.gcd(r, m) != 1:
                continue
            p = r if r > 1 else r + m
            while not isprime(p):
                p += m
            if p == 2:
                symbol = 1 if d % 8 == 1 else -1
            else:
                symbol = legendre_symbol(d % p, p)
            table[r] = Fraction(0) if symbol == 1 else Fraction(1, 2)
        return cls(m, tuple(table.items()))

    @property
    def order(self):
        return math.lcm(*(v.denominator for _, v in self.values)) if self.values else 1

    def __call__(self, k):
        k %= self.modulus
        if math.gcd(k, self.modulus) != 1:
            raise DomainError(f"{k} is not a unit mod {self.modulus}")
        return dict(self.values)[k]


def cyclic_invariant(chi, a, p):
    """v_p(a) * chi(Frob_p) in (1/n)Z/Z at a prime not dividing the conductor."""
    require_prime(p)
    a = as_rational(a)
    if a == 0:
        raise DomainError("invariant of zero")
    if chi.modulus % p == 0:
        raise RamifiedCaseError(f"prime {p} divides the modulus {chi.modulus}")
    return (valuation(a, p) * chi(p)) % 1


def invariant_sum(character, x, places=None):
    """Sum of local invariants of the cyclic algebra (E, x) over the given places.

    `character` is either an integer D (E = Q(sqrt(D)), every place allowed) or a
    DirichletCharacter (only primes prime to its modulus).
    """
    x = as_rational(x)
    if isinstance(character, DirichletCharacter):
        if places is None:
            places = [Place.finite(p) for p in factor(x).primes]
        total = Fraction(0)
        for v in places:
            if v.is_real:
                continue
            total += cyclic_invariant(character, x, v.prime)
        return total % 1
    D = as_rational(character)
    if places is None:
        places = relevant_places(x, D)
    return sum((_symbol_to_invariant(hilbert_symbol(x, D, v)) for v in places), Fraction(0)) % 1


# -- local norm test ----------------------------------------------------------


@dataclass(frozen=True)
class NormCandidate:
    """The element b * (t - a) of k, with t known to `precision` (N_v, or eps at the real place)."""

    b: KElement
    t: Fraction
    precision: object = None

    def __post_init__(self):
        object.__setattr__(self, "t", as_rational(self.t))
        if self.precision is not None:
            object.__setattr__(self, "precision", as_rational(self.precision))
            if self.precision <= 0:
                raise DomainError("precision must be positive")

    @property
    def difference(self):
        return self.b.field.from_rational(self.t) - self.b.field.gen

    @property
    def value(self):
        return self.b * self.difference


def local_norm_test(candidate, L, place, w=None):
    """Whether b(t - a) is a norm from L tensor Q_v (only the component at w if given).

    The verdict must hold for every t within the candidate's precision of the
    given t; otherwise it is Undetermined(InsufficientPrecision).
    """
    _check_candidate(candidate, L)
    if L.degree == 1:
        return NormVerdict.is_norm()
    if place.is_real:
        unstable = set()
        if candidate.precision is not None:
            eps = candidate.precision
            unstable = {
                i
                for i, root in enumerate(L.base.real_roots)
                if root.compare(candidate.t - eps) >= 0 and root.compare(candidate.t + eps) <= 0
            }
        return _real_test(candidate.value, L, unstable)
    p = place.prime
    K = L.base
    if K.is_rational and L.degree == 2:
        diff = candidate.t - (-K.P.coeff(0))
        if diff == 0:
            if candidate.precision is None:
                return NormVerdict.not_norm()
            return NormVerdict.undetermined(INSUFFICIENT_PRECISION)
        slack = 3 if p == 2 else 1
        if candidate.precision is not None and valuation(diff, p) + slack > candidate.precision:
            return NormVerdict.undetermined(INSUFFICIENT_PRECISION)
        return _quadratic_test(candidate.value.rational(), L, p)
    if not L.is_unramified(p):
        return _ramified_verdict(L, p)
    components = [w] if w is not None else places_above(K, p)
    return combine_verdicts(_unramified_candidate_test(candidate, L, wi) for wi in components)


def element_norm_test(x, L, place, w=None):
    """Whether the exact element x of k is a local norm from L at v (or at w)."""
    if not isinstance(x, KElement) or x.field != L.base:
        raise DomainError("element must lie in the base field of L")
    if x.is_zero:
        return NormVerdict.not_norm()
    if L.degree == 1:
        return NormVerdict.is_norm()
    if place.is_real:
        return _real_test(x, L, set())
    p = place.prime
    if L.base.is_rational and L.degree == 2:
        return _quadratic_test(x.rational(), L, p)
    if not L.is_unramified(p):
        return _ramified_verdict(L, p)
    components = [w] if w is not None else places_above(L.base, p)
    return combine_verdicts(_unramified_element_test(x, L, wi) for wi in components)


def _check_candidate(candidate, L):
    if not isinstance(candidate, NormCandidate) or candidate.b.field != L.base:
        raise DomainError("element must be a NormCandidate over the base field of L")
    if candidate.b.is_zero:
        raise DomainError("b must be nonzero")


def _ramified_verdict(L, p):
    return NormVerdict.undetermined(NON_QUADRATIC_WILD if L.degree % p == 0 else RAMIFIED_CASE)


def _real_test(x, L, unstable):
    """Component-wise over the real places of k; `unstable` holds root indices whose sign may move."""
    verdicts = []
    for i, root in enumerate(L.base.real_roots):
        if L.real_root_count(root) > 0:
            verdicts.append(NormVerdict.is_norm())
        elif i in unstable:
            verdicts.append(NormVerdict.undetermined(INSUFFICIENT_PRECISION))
        elif x.sign_at(root) > 0:
            verdicts.append(NormVerdict.is_norm())
        else:
            verdicts.append(NormVerdict.not_norm())
    return combine_verdicts(verdicts)


def quadratic_discriminant(L):
    beta, gamma = L.coeffs[1].rational(), L.coeffs[0].rational()
    return beta * beta - 4 * gamma


def _quadratic_test(x, L, p):
    if x == 0:
        return NormVerdict.not_norm()
    symbol = hilbert_symbol(x, quadratic_discriminant(L), Place.finite(p))
    return NormVerdict.is_norm() if symbol == 1 else NormVerdict.not_norm()


def _degree_gcd(L, w):
    degrees = L.residue_degrees(w)
    return None if degrees is None else math.gcd(*degrees)


def _unramified_element_test(x, L, w):
    d = _degree_gcd(L, w)
    if d is None:
        return NormVerdict.undetermined(RAMIFIED_CASE)
    if d == 1:
        return NormVerdict.is_norm()
    return NormVerdict.is_norm() if x.valuation_at(w) % d == 0 else NormVerdict.not_norm()


def _unramified_candidate_test(candidate, L, w):
    d = _degree_gcd(L, w)
    if d is None:
        return NormVerdict.undetermined(RAMIFIED_CASE)
    if d == 1:
        return NormVerdict.is_norm()
    v_diff = candidate.difference.valuation_at(w)
    if v_diff is INFINITY:
        if candidate.precision is None:
            return NormVerdict.not_norm()
        return NormVerdict.undetermined(INSUFFICIENT_PRECISION)
    if candidate.precision is not None and v_diff >= candidate.precision:
        return NormVerdict.undetermined(INSUFFICIENT_PRECISION)
    wx = candidate.b.valuation_at(w) + v_diff
    logger.debug("place %s: residue gcd %d, w(x) = %d", w.as_json(), d, wx)
    return NormVerdict.is_norm() if wx % d == 0 else NormVerdict.not_norm()
