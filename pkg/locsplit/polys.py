"""Polynomials over Q: exact arithmetic, discriminants, resultants and Sturm sequences."""

from dataclasses import dataclass
from fractions import Fraction
import math

import sympy

from .arith import as_rational
from .errors import DomainError

X = sympy.Symbol("x")


def _strip(coeffs):
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


@dataclass(frozen=True)
class PolyOverQ:
    """Polynomial with Fraction coefficients, ascending degree, no trailing zeros."""

    coeffs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _strip(as_rational(c) for c in self.coeffs))

    @classmethod
    def constant(cls, c):
        return cls((c,))

    @classmethod
    def x(cls):
        return cls((0, 1))

    @classmethod
    def from_descending(cls, coeffs):
        return cls(tuple(reversed(list(coeffs))))

    @classmethod
    def from_sympy(cls, expr, var=X):
        poly = expr if isinstance(expr, sympy.Poly) else sympy.Poly(expr, var)
        if any(not c.is_Rational for c in poly.all_coeffs()):
            raise DomainError(f"{expr} is not a rational polynomial in {var}")
        return cls.from_descending(as_rational(c) for c in poly.all_coeffs())

    # -- shape -------------------------------------------------------------

    @property
    def degree(self):
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self):
        return not self.coeffs

    @property
    def leading(self):
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    @property
    def is_monic(self):
        return self.leading == 1

    @property
    def has_integer_coeffs(self):
        return all(c.denominator == 1 for c in self.coeffs)

    def coeff(self, i):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def monic(self):
        if self.is_zero:
            raise DomainError("the zero polynomial has no monic associate")
        return self.scale(1 / self.leading)

    def scale(self, c):
        c = as_rational(c)
        return PolyOverQ(tuple(c * a for a in self.coeffs))

    def integer_coeffs(self):
        """(d, ints) with d * self = ints, d the least positive denominator."""
        d = 1
        for c in self.coeffs:
            d = d * c.denominator // math.gcd(d, c.denominator)
        return d, [int(c * d) for c in self.coeffs]

    def denominator_primes(self):
        d, _ = self.integer_coeffs()
        return tuple(sorted(int(p) for p in sympy.primefactors(d)))

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, PolyOverQ):
            return other
        return PolyOverQ.constant(other)

    def __add__(self, other):
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return PolyOverQ(tuple(self.coeff(i) + other.coeff(i) for i in range(n)))

    __radd__ = __add__

    def __neg__(self):
        return PolyOverQ(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if self.is_zero or other.is_zero:
            return PolyOverQ()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return PolyOverQ(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, e):
        result = PolyOverQ.constant(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __divmod__(self, other):
        other = self._coerce(other)
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        quot = [Fraction(0)] * max(len(rem) - len(other.coeffs) + 1, 0)
        lead = other.leading
        for shift in range(len(quot) - 1, -1, -1):
            c = rem[shift + other.degree] / lead
            quot[shift] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[shift + j] -= c * b
        return PolyOverQ(tuple(quot)), PolyOverQ(tuple(rem[: other.degree] if other.degree > 0 else ()))

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __call__(self, value):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * value + c
        return acc

    def derivative(self):
        return PolyOverQ(tuple(i * c for i, c in enumerate(self.coeffs) if i))

    def compose(self, inner):
        acc = PolyOverQ()
        for c in reversed(self.coeffs):
            acc = acc * inner + c
        return acc

    def gcd(self, other):
        """Monic gcd (zero only when both inputs are zero)."""
        a, b = self, self._coerce(other)
        while not b.is_zero:
            a, b = b, a % b
        return a if a.is_zero else a.monic()

    def is_squarefree(self):
        return self.gcd(self.derivative()).degree <= 0

    def squarefree_part(self):
        if self.degree <= 0:
            return self
        return (self // self.gcd(self.derivative())).monic()

    # -- sympy bridge ------------------------------------------------------

    def to_sympy(self, var=X):
        return sympy.Poly.from_list(
            [sympy.Rational(c.numerator, c.denominator) for c in reversed(self.coeffs)] or [0],
            var,
            domain="QQ",
        )

    def as_expr(self, var=X):
        return self.to_sympy(var).as_expr()

    def is_irreducible(self):
        if self.degree < 1:
            return False
        return bool(self.to_sympy().is_irreducible)

    def __str__(self):
        return str(self.as_expr()) if not self.is_zero else "0"


def discriminant(f):
    """Discriminant of f; zero exactly when f has a repeated root."""
    if f.degree < 1:
        raise DomainError("discriminant of a constant polynomial")
    if f.degree == 1:
        return Fraction(1)
    return as_rational(sympy.discriminant(f.as_expr(), X))


def resultant(f, g):
    if f.is_zero or g.is_zero:
        return Fraction(0)
    return as_rational(sympy.resultant(f.as_expr(), g.as_expr(), X))


# -- real roots --------------------------------------------------------------


def sturm_sequence(f):
    seq = [f, f.derivative()]
    while not seq[-1].is_zero:
        r = -(seq[-2] % seq[-1])
        if r.is_zero:
            break
        seq.append(r)
    return [p for p in seq if not p.is_zero]


def _sign(value):
    return (value > 0) - (value < 0)


def _variations(signs):
    signs = [s for s in signs if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _variations_at(seq, value):
    return _variations([_sign(p(value)) for p in seq])


def _variations_at_infinity(seq, positive):
    signs = []
    for p in seq:
        s = _sign(p.leading)
        if not positive and p.degree % 2:
            s = -s
        signs.append(s)
    return _variations(signs)


def count_real_roots(f, interval=None):
    """Number of distinct real roots of a squarefree f, optionally inside the open interval (lo, hi)."""
    if f.is_zero:
        raise DomainError("the zero polynomial has infinitely many roots")
    if f.degree == 0:
        return 0
    if not f.is_squarefree():
        raise DomainError("count_real_roots needs a squarefree polynomial; divide by gcd(f, f') first")
    seq = sturm_sequence(f)
    if interval is None:
        return _variations_at_infinity(seq, False) - _variations_at_infinity(seq, True)
    lo, hi = (as_rational(e) for e in interval)
    if lo >= hi:
        return 0
    count = _variations_at(seq, lo) - _variations_at(seq, hi)
    # Sturm counts (lo, hi]
    if f(hi) == 0:
        count -= 1
    return count


def root_bound(f):
    """Cauchy bound: every complex root has absolute value below it."""
    lead = abs(f.leading)
    return 1 + max((abs(c) / lead for c in f.coeffs[:-1]), default=Fraction(0))


@dataclass(frozen=True)
class RealRoot:
    """A real root of the squarefree `poly`, isolated in [lo, hi] (lo == hi for a rational root)."""

    poly: PolyOverQ
    lo: Fraction
    hi: Fraction

    @property
    def is_exact(self):
        return self.lo == self.hi

    @property
    def midpoint(self):
        return (self.lo + self.hi) / 2

    def refine(self):
        if self.is_exact:
            return self
        mid = self.midpoint
        at_mid = self.poly(mid)
        if at_mid == 0:
            return RealRoot(self.poly, mid, mid)
        if _sign(self.poly(self.lo)) != _sign(at_mid):
            return RealRoot(self.poly, self.lo, mid)
        return RealRoot(self.poly, mid, self.hi)

    def refine_to(self, width):
        root = self
        while root.hi - root.lo > width:
            root = root.refine()
        return root

    def sign_of(self, q):
        """Exact sign of q at this root."""
        q = q if isinstance(q, PolyOverQ) else PolyOverQ.constant(q)
        if q.degree <= 0:
            return _sign(q.leading)
        if self.is_exact:
            return _sign(q(self.lo))
        common = self.poly.gcd(q)
        if common.degree > 0 and count_real_roots(common, (self.lo, self.hi)) > 0:
            return 0
        q_free = q.squarefree_part()
        root = self
        while not root.is_exact and (
            q_free(root.lo) == 0 or q_free(root.hi) == 0 or count_real_roots(q_free, (root.lo, root.hi)) > 0
        ):
            root = root.refine()
        return _sign(q(root.lo))

    def compare(self, value):
        """Sign of (root - value)."""
        return self.sign_of(PolyOverQ((-as_rational(value), 1)))

    def __float__(self):
        return float(self.midpoint)


def isolate_real_roots(f):
    """Isolating intervals for the real roots of a squarefree f, in increasing order."""
    f = f.squarefree_part() if not f.is_squarefree() else f
    if f.degree < 1:
        return []
    bound = root_bound(f)
    roots = []
    pending = [(-bound, bound)]
    while pending:
        lo, hi = pending.pop()
        n = count_real_roots(f, (lo, hi))
        if n == 0:
            continue
        if n == 1 and f(lo) != 0 and f(hi) != 0:
            roots.append(RealRoot(f, lo, hi))
            continue
        mid = (lo + hi) / 2
        if f(mid) == 0:
            roots.append(RealRoot(f, mid, mid))
        pending.append((lo, mid))
        pending.append((mid, hi))
    return sorted(roots, key=lambda r: r.lo)


def inverse_mod(f, m):
    """Inverse of f modulo m in Q[x]; f and m must be coprime."""
    r0, r1 = m, f % m
    s0, s1 = PolyOverQ(), PolyOverQ.constant(1)
    while not r1.is_zero:
        q, r = divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
    if r0.degree != 0:
        raise DomainError(f"{f} is not invertible modulo {m}")
    return (s0 * (1 / r0.leading)) % m
