"""Number fields Q[t]/(P), relative extensions L/k and the places above a rational prime.

The order Z[a] stands in for the ring of integers, so every prime dividing
disc(P) (or a coefficient denominator of P) is treated as ramified and must
sit in S. At the remaining primes P mod p is squarefree and the places above
p are read off its factorization.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
import logging

import sympy
from sympy.polys.domains import ZZ
from sympy.polys.factortools import dup_zz_hensel_lift

from .arith import INFINITY, as_rational, factor, is_prime, rational_residue, valuation
from .errors import DomainError, NeedsSInclusion, RamifiedPrime
from .finite_fields import FqField, PolyOverFq, factor_mod, roots_in_field
from .polys import X, PolyOverQ, count_real_roots, discriminant, inverse_mod, isolate_real_roots

logger = logging.getLogger(__name__)

T = sympy.Symbol("t")
A = sympy.Symbol("a")


@dataclass(frozen=True)
class NumberFieldAbs:
    """k = Q[t]/(P) for a monic irreducible P; `a` is the class of t."""

    P: PolyOverQ

    def __post_init__(self):
        if self.P.degree < 1:
            raise DomainError("defining polynomial must have degree >= 1")
        if not self.P.is_monic:
            raise DomainError(f"defining polynomial {self.P} is not monic")
        if self.P.degree > 1 and not self.P.is_irreducible():
            raise DomainError(f"defining polynomial {self.P} is reducible over Q")

    @property
    def degree(self):
        return self.P.degree

    @property
    def is_rational(self):
        return self.degree == 1

    @cached_property
    def discriminant(self):
        return discriminant(self.P)

    @cached_property
    def real_roots(self):
        return tuple(isolate_real_roots(self.P))

    @cached_property
    def real_place_count(self):
        return count_real_roots(self.P)

    @cached_property
    def bad_primes(self):
        """Primes dividing disc(P) or a coefficient denominator of P."""
        primes = set(self.P.denominator_primes())
        disc = self.discriminant
        if disc != 1:
            primes.update(factor(disc).primes)
        return frozenset(primes)

    def is_unramified(self, p):
        return p not in self.bad_primes

    @cached_property
    def norm_form(self):
        """N(c_0 + c_1 a + ... ) as ((exponents), coefficient) terms in the c_j."""
        cs = sympy.symbols(f"c0:{self.degree}")
        expr = sympy.resultant(self.P.as_expr(T), sum(c * T**j for j, c in enumerate(cs)), T)
        poly = sympy.Poly(sympy.expand(expr), *cs)
        return tuple((exps, as_rational(coeff)) for exps, coeff in poly.terms())

    def norm_of(self, coeffs):
        """Norm of the element with the given coordinates in the basis 1, a, a^2, ..."""
        if self.is_rational:
            return self.element(coeffs).norm()
        coeffs = tuple(coeffs) + (0,) * (self.degree - len(coeffs))
        total = Fraction(0)
        for exps, coeff in self.norm_form:
            term = coeff
            for c, e in zip(coeffs, exps):
                if e:
                    term *= Fraction(c) ** e
            total += term
        return total

    def element(self, coeffs):
        return KElement(self, PolyOverQ(tuple(coeffs)))

    def from_poly(self, poly):
        return KElement(self, poly)

    def from_rational(self, q):
        return KElement(self, PolyOverQ.constant(q))

    @property
    def gen(self):
        return KElement(self, PolyOverQ.x())

    @property
    def one(self):
        return self.from_rational(1)

    @property
    def zero(self):
        return KElement(self, PolyOverQ())

    def __str__(self):
        return f"Q[t]/({self.P.as_expr(T)})"


@dataclass(frozen=True)
class KElement:
    """Element of k stored as a polynomial in a of degree < [k:Q]."""

    field: NumberFieldAbs
    poly: PolyOverQ

    def __post_init__(self):
        if self.poly.degree >= self.field.degree:
            object.__setattr__(self, "poly", self.poly % self.field.P)

    def _lift(self, other):
        if isinstance(other, KElement):
            if other.field != self.field:
                raise DomainError("elements of different number fields")
            return other
        return self.field.from_rational(other)

    def __add__(self, other):
        return KElement(self.field, self.poly + self._lift(other).poly)

    __radd__ = __add__

    def __neg__(self):
        return KElement(self.field, -self.poly)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        return KElement(self.field, (self.poly * self._lift(other).poly) % self.field.P)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero:
            raise ZeroDivisionError("inverse of zero in a number field")
        return KElement(self.field, inverse_mod(self.poly, self.field.P))

    def __truediv__(self, other):
        return self * self._lift(other).inverse()

    def __rtruediv__(self, other):
        return self._lift(other) * self.inverse()

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        result, base = self.field.one, self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    @property
    def is_zero(self):
        return self.poly.is_zero

    @property
    def is_rational(self):
        return self.poly.degree <= 0

    def rational(self):
        if not self.is_rational:
            raise DomainError(f"{self} is not rational")
        return self.poly.coeff(0)

    def norm(self):
        """N_{k/Q}: the resultant Res(P, c), P being monic."""
        if self.field.is_rational:
            return self.poly(self.field.P.coeff(0) * -1)
        if self.is_rational:
            return self.poly.coeff(0) ** self.field.degree
        return as_rational(sympy.resultant(self.field.P.as_expr(T), self.poly.as_expr(T), T))

    def charpoly(self):
        """Characteristic polynomial of multiplication by this element, in x."""
        expr = sympy.resultant(self.field.P.as_expr(T), X - self.poly.as_expr(T), T)
        return PolyOverQ.from_sympy(sympy.expand(expr), X)

    def sign_at(self, root):
        """Sign of this element at the real embedding a -> root."""
        return root.sign_of(self.poly)

    def denominator_primes(self):
        return self.poly.denominator_primes()

    def is_integral_at(self, p):
        return all(c.denominator % p for c in self.poly.coeffs)

    def reduce_at(self, place):
        """Image in the residue field of `place` (a -> u)."""
        F = place.residue_field
        return F.reduce([rational_residue(c, F.p) for c in self.poly.coeffs])

    def valuation_at(self, place):
        """w(c) at an unramified place w, via the Hensel-lifted local factor of P."""
        if self.is_zero:
            return INFINITY
        p = place.p
        shift = min(valuation(c, p) for c in self.poly.coeffs if c)
        unit_part = self.poly.scale(Fraction(p) ** -shift)
        precision = valuation(KElement(self.field, unit_part).norm(), p) + 1
        modulus = p**precision
        H = place.lifted_factor(self.field, precision)
        residues = [rational_residue(c, modulus) for c in unit_part.coeffs]
        reduced = _reduce_mod_monic(residues, H, modulus)
        found = [valuation(c, p) for c in reduced if c % modulus]
        return shift + min(found)

    def as_expr(self, var=A):
        return self.poly.as_expr(var)

    def __str__(self):
        return str(self.as_expr())


def _reduce_mod_monic(coeffs, monic, modulus):
    """Remainder of an integer polynomial by a monic one, coefficients mod `modulus` (ascending)."""
    rem = [c % modulus for c in coeffs]
    d = len(monic) - 1
    for i in range(len(rem) - 1, d - 1, -1):
        c = rem[i]
        if c:
            for j in range(d + 1):
                rem[i - d + j] = (rem[i - d + j] - c * monic[j]) % modulus
    return rem[:d]


@dataclass(frozen=True)
class PlaceAbove:
    """A place of k above the rational prime p with local factor h_w mod p."""

    p: int
    factor: PolyOverFq
    ramification: int = 1

    @property
    def residue_degree(self):
        return self.factor.degree

    @cached_property
    def residue_field(self):
        ints = [self.factor.field.to_int(c) for c in self.factor.coeffs]
        return FqField(self.p, tuple(ints))

    def factor_ints(self):
        return [self.factor.field.to_int(c) for c in self.factor.coeffs]

    def lifted_factor(self, field, precision):
        """Monic integer factor of P mod p**precision lifting h_w (ascending coefficients)."""
        if precision <= 1:
            return self.factor_ints()
        p = self.p
        modulus = p**precision
        P_ints = [rational_residue(c, modulus) for c in field.P.coeffs]
        local = [pl.factor_ints() for pl in places_above(field, p)]
        index = local.index(self.factor_ints())
        lifted = dup_zz_hensel_lift(
            p,
            ZZ.map(list(reversed(P_ints))),
            [ZZ.map(list(reversed(h))) for h in local],
            precision,
            ZZ,
        )
        return [int(c) % modulus for c in reversed(lifted[index])]

    def as_json(self):
        return {"p": self.p, "factor": self.factor_ints(), "f": self.residue_degree, "e": self.ramification}


def reduce_mod_p(poly, p):
    F = FqField.prime(p)
    return PolyOverFq(F, tuple(F.from_rational(c) for c in poly.coeffs))


def places_above(K, p):
    """One place per irreducible factor of P mod p; p must be unramified in Z[a]."""
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    if not K.is_unramified(p):
        raise RamifiedPrime(p)
    return [PlaceAbove(p, h) for h, _ in factor_mod(reduce_mod_p(K.P, p))]


def splits_completely(K, p):
    return all(w.residue_degree == 1 for w in places_above(K, p))


def positive_valuation_place(K, t0, p):
    """The place w | p with w(t0 - a) > 0, or None when p does not divide P(t0)."""
    t0 = as_rational(t0)
    if not K.is_unramified(p):
        raise NeedsSInclusion(p, f"prime {p} is ramified in {K}")
    if t0.denominator % p == 0:
        raise NeedsSInclusion(p, f"t0 = {t0} is not integral at {p}")
    if valuation(K.P(t0), p) <= 0:
        return None
    F = FqField.prime(p)
    t_bar = F.from_rational(t0)
    for w in places_above(K, p):
        if w.factor.degree == 1 and not w.factor(t_bar):
            return w
    raise AssertionError(f"no local factor of {K.P} vanishes at {t0} mod {p}")


class DegreeOne(Enum):
    YES = "Yes"
    NO = "No"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class RelativeExtension:
    """L = k[x]/(g) with g monic in x, coefficients elements of k (ascending)."""

    base: NumberFieldAbs
    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(self.base.from_rational(c) if not isinstance(c, KElement) else c for c in self.coeffs)
        if len(coeffs) < 2:
            raise DomainError("relative polynomial must have degree >= 1")
        if coeffs[-1].poly != PolyOverQ.constant(1):
            raise DomainError("relative polynomial must be monic in x")
        object.__setattr__(self, "coeffs", coeffs)
        if self.degree > 1 and self.relative_discriminant_norm == 0:
            raise DomainError("relative polynomial is not squarefree")

    @classmethod
    def from_expr(cls, base, expr):
        """Build from a sympy expression in x and a."""
        poly = sympy.Poly(sympy.expand(expr), X)
        coeffs = []
        for c in reversed(poly.all_coeffs()):
            coeffs.append(base.from_poly(PolyOverQ.from_sympy(sympy.Poly(c, A), A)))
        return cls(base, tuple(coeffs))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def as_expr(self):
        return sum(c.as_expr(T) * X**i for i, c in enumerate(self.coeffs))

    def __str__(self):
        return str(sympy.expand(self.as_expr().subs(T, A)))

    @cached_property
    def relative_discriminant(self):
        expr = sympy.discriminant(self.as_expr(), X) if self.degree > 1 else sympy.Integer(1)
        return self.base.from_poly(PolyOverQ.from_sympy(sympy.Poly(sympy.expand(expr), T), T))

    @cached_property
    def relative_discriminant_norm(self):
        return self.relative_discriminant.norm()

    @cached_property
    def ramified_primes(self):
        """Primes where L/k may ramify, plus the bad primes of k and coefficient denominators."""
        primes = set(self.base.bad_primes)
        for c in self.coeffs:
            primes.update(c.denominator_primes())
        disc = self.relative_discriminant_norm
        if disc != 1 and disc != -1:
            primes.update(factor(disc).primes)
        return frozenset(primes)

    def is_unramified(self, p):
        return p not in self.ramified_primes

    def reduce_at(self, place):
        F = place.residue_field
        for c in self.coeffs:
            if not c.is_integral_at(place.p):
                return None
        return PolyOverFq(F, tuple(c.reduce_at(place) for c in self.coeffs))

    def residue_degrees(self, place):
        """Degrees of the places of L over w, or None if the reduction is not squarefree."""
        g_bar = self.reduce_at(place)
        if g_bar is None or g_bar.gcd(g_bar.derivative()).degree > 0:
            return None
        return sorted(h.degree for h, _ in factor_mod(g_bar))

    def real_root_count(self, root):
        """Number of real roots of g specialised at the real embedding a -> root."""
        seq = _sturm_over_k(self.coeffs)
        at_minus, at_plus = [], []
        for poly in seq:
            lead = poly[-1].sign_at(root)
            at_plus.append(lead)
            at_minus.append(lead if (len(poly) - 1) % 2 == 0 else -lead)
        return _variations(at_minus) - _variations(at_plus)


def _variations(signs):
    signs = [s for s in signs if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _strip_k(coeffs):
    coeffs = list(coeffs)
    while coeffs and coeffs[-1].is_zero:
        coeffs.pop()
    return coeffs


def _rem_over_k(f, g):
    rem = list(f)
    lead_inv = g[-1].inverse()
    d = len(g) - 1
    for i in range(len(rem) - 1, d - 1, -1):
        c = rem[i] * lead_inv
        if not c.is_zero:
            for j in range(d + 1):
                rem[i - d + j] = rem[i - d + j] - c * g[j]
    return _strip_k(rem[:d])


def _sturm_over_k(coeffs):
    f = list(coeffs)
    df = _strip_k(c * i for i, c in enumerate(f) if i)
    seq = [f, df]
    while len(seq[-1]) > 1:
        r = _rem_over_k(seq[-2], seq[-1])
        if not r:
            break
        seq.append([-c for c in r])
    return seq


def has_degree_one_place_over(L, w):
    """Whether L has a place of degree 1 over the place w of its base field."""
    if L.degree == 1:
        return DegreeOne.YES
    g_bar = L.reduce_at(w)
    if g_bar is None or g_bar.gcd(g_bar.derivative()).degree > 0:
        return DegreeOne.UNDETERMINED
    return DegreeOne.YES if roots_in_field(g_bar) else DegreeOne.NO


def absolute_polynomial(L):
    """Defining polynomial of L over Q: Res_t(P(t), g(x - c t, t)) for the first squarefree c."""
    P = L.base.P.as_expr(T)
    g = L.as_expr()
    for c in (0, 1, -1, 2, -2, 3, -3, 4, -4, 5):
        expr = sympy.expand(sympy.resultant(P, g.subs(X, X - c * T), T))
        candidate = PolyOverQ.from_sympy(expr, X)
        if candidate.is_squarefree():
            return candidate.monic()
    raise DomainError(f"no primitive element found for {L}")
