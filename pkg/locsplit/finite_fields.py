"""Finite fields F_p[u]/(h) and polynomials over them.

Field elements are tuples of residues in descending degree (the galoistools
convention), reduced modulo h and p. Polynomials over the field keep their
coefficients in ascending degree. Over a prime field factorization goes
straight to sympy's galoistools; over an extension it runs squarefree,
distinct-degree and Cantor-Zassenhaus equal-degree splitting here.
"""

from dataclasses import dataclass
from functools import cached_property
import logging
import random

from sympy.polys.domains import ZZ
from sympy.polys.galoistools import (
    gf_add,
    gf_factor,
    gf_from_int_poly,
    gf_gcdex,
    gf_irreducible_p,
    gf_mul,
    gf_rem,
    gf_sub,
)

from .arith import as_rational, is_prime
from .config import DEFAULT_SEED
from .errors import DomainError

logger = logging.getLogger(__name__)


def _gf(coeffs, p):
    return tuple(int(c) for c in gf_from_int_poly(ZZ.map(list(coeffs)), p))


@dataclass(frozen=True)
class FqField:
    """F_p[u]/(h) for a monic irreducible h given in ascending integer coefficients."""

    p: int
    modulus: tuple = (0, 1)

    def __post_init__(self):
        if not is_prime(self.p):
            raise DomainError(f"characteristic {self.p} is not prime")
        h = tuple(int(c) % self.p for c in self.modulus)
        while h and h[-1] == 0:
            h = h[:-1]
        if len(h) < 2 or h[-1] != 1:
            raise DomainError("defining polynomial must be monic of degree >= 1")
        if not gf_irreducible_p(ZZ.map(list(reversed(h))), self.p, ZZ):
            raise DomainError(f"defining polynomial {h} is reducible mod {self.p}")
        object.__setattr__(self, "modulus", h)

    @classmethod
    def prime(cls, p):
        return cls(p, (0, 1))

    @property
    def degree(self):
        return len(self.modulus) - 1

    @property
    def order(self):
        return self.p**self.degree

    @property
    def is_prime_field(self):
        return self.degree == 1

    @cached_property
    def _h(self):
        return ZZ.map(list(reversed(self.modulus)))

    # -- elements ----------------------------------------------------------

    @property
    def zero(self):
        return ()

    @property
    def one(self):
        return (1,)

    @property
    def generator(self):
        """Class of u, the root of the defining polynomial."""
        return self.reduce((0, 1))

    def reduce(self, ascending):
        """Element given by an integer polynomial in u (ascending coefficients)."""
        f = gf_from_int_poly(ZZ.map(list(reversed(list(ascending)))), self.p)
        return tuple(int(c) for c in gf_rem(f, self._h, self.p, ZZ))

    def from_int(self, n):
        n %= self.p
        return (n,) if n else ()

    def from_rational(self, q):
        q = as_rational(q)
        if q.denominator % self.p == 0:
            raise DomainError(f"{q} is not integral at {self.p}")
        return self.from_int(q.numerator * pow(q.denominator, -1, self.p))

    def to_int(self, a):
        """Integer value of a prime-subfield element."""
        if len(a) > 1:
            raise DomainError(f"{a} is not in the prime field")
        return a[0] if a else 0

    def add(self, a, b):
        return tuple(int(c) for c in gf_add(list(a), list(b), self.p, ZZ))

    def sub(self, a, b):
        return tuple(int(c) for c in gf_sub(list(a), list(b), self.p, ZZ))

    def neg(self, a):
        return self.sub((), a)

    def mul(self, a, b):
        return tuple(int(c) for c in gf_rem(gf_mul(list(a), list(b), self.p, ZZ), self._h, self.p, ZZ))

    def inv(self, a):
        if not a:
            raise ZeroDivisionError("inverse of zero in a finite field")
        s, _, g = gf_gcdex(ZZ.map(list(a)), self._h, self.p, ZZ)
        # g is a nonzero constant since h is irreducible
        scale = pow(int(g[0]), -1, self.p)
        return self.mul(tuple(int(c) for c in s), (scale,))

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def power(self, a, e):
        if e < 0:
            return self.power(self.inv(a), -e)
        result, base = self.one, a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def elements(self):
        """Every element; only sensible for small fields."""
        for n in range(self.order):
            digits = []
            for _ in range(self.degree):
                n, r = divmod(n, self.p)
                digits.append(r)
            yield self.reduce(digits)

    def random_element(self, rng):
        return self.reduce([rng.randrange(self.p) for _ in range(self.degree)])


@dataclass(frozen=True)
class PolyOverFq:
    """Polynomial over an FqField, ascending coefficients, no trailing zeros."""

    field: FqField
    coeffs: tuple = ()

    def __post_init__(self):
        coeffs = list(self.coeffs)
        while coeffs and not coeffs[-1]:
            coeffs.pop()
        object.__setattr__(self, "coeffs", tuple(tuple(c) for c in coeffs))

    @classmethod
    def from_ints(cls, field, ints):
        return cls(field, tuple(field.from_int(c) for c in ints))

    @classmethod
    def x(cls, field):
        return cls(field, ((), field.one))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def is_zero(self):
        return not self.coeffs

    @property
    def leading(self):
        return self.coeffs[-1] if self.coeffs else ()

    def coeff(self, i):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else ()

    def _new(self, coeffs):
        return PolyOverFq(self.field, tuple(coeffs))

    def __add__(self, other):
        F = self.field
        n = max(len(self.coeffs), len(other.coeffs))
        return self._new(F.add(self.coeff(i), other.coeff(i)) for i in range(n))

    def __sub__(self, other):
        F = self.field
        n = max(len(self.coeffs), len(other.coeffs))
        return self._new(F.sub(self.coeff(i), other.coeff(i)) for i in range(n))

    def __mul__(self, other):
        F = self.field
        if self.is_zero or other.is_zero:
            return self._new(())
        out = [()] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if b:
                    out[i + j] = F.add(out[i + j], F.mul(a, b))
        return self._new(out)

    def scale(self, c):
        return self._new(self.field.mul(c, a) for a in self.coeffs)

    def __divmod__(self, other):
        F = self.field
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        quot = [()] * max(len(rem) - len(other.coeffs) + 1, 0)
        lead_inv = F.inv(other.leading)
        for shift in range(len(quot) - 1, -1, -1):
            c = F.mul(rem[shift + other.degree], lead_inv)
            quot[shift] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[shift + j] = F.sub(rem[shift + j], F.mul(c, b))
        return self._new(quot), self._new(rem[: other.degree])

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def monic(self):
        if self.is_zero:
            raise DomainError("the zero polynomial has no monic associate")
        return self.scale(self.field.inv(self.leading))

    def derivative(self):
        F = self.field
        return self._new(F.mul(F.from_int(i), c) for i, c in enumerate(self.coeffs) if i)

    def __call__(self, value):
        F = self.field
        acc = ()
        for c in reversed(self.coeffs):
            acc = F.add(F.mul(acc, value), c)
        return acc

    def gcd(self, other):
        a, b = self, other
        while not b.is_zero:
            a, b = b, a % b
        return a if a.is_zero else a.monic()

    def powmod(self, e, modulus):
        result = self._new((self.field.one,)) % modulus
        base = self % modulus
        while e:
            if e & 1:
                result = (result * base) % modulus
            base = (base * base) % modulus
            e >>= 1
        return result

    def is_one(self):
        return self.coeffs == (self.field.one,)

    def __str__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{list(c)}*x^{i}")
        return " + ".join(reversed(terms)) or "0"


# -- factorization ------------------------------------------------------------


def _default_rng(rng):
    return rng if rng is not None else random.Random(DEFAULT_SEED)


def _prime_field_factor(f):
    F = f.field
    ints = [F.to_int(c) for c in reversed(f.coeffs)]
    _, factors = gf_factor(ZZ.map(ints), F.p, ZZ)
    return [(PolyOverFq.from_ints(F, list(reversed([int(c) for c in g]))), int(k)) for g, k in factors]


def _pth_root(f):
    """g with g(x)^p = f(x), for f with zero derivative."""
    F = f.field
    root_exp = F.order // F.p
    return PolyOverFq(F, tuple(F.power(f.coeffs[i], root_exp) for i in range(0, len(f.coeffs), F.p)))


def squarefree_decomposition(f):
    """[(g, k)] with f = lc * prod g^k, each g monic squarefree and pairwise coprime."""
    F = f.field
    f = f.monic()
    if f.degree <= 0:
        return []
    result = []
    derivative = f.derivative()
    if derivative.is_zero:
        return [(g, k * F.p) for g, k in squarefree_decomposition(_pth_root(f))]
    c = f.gcd(derivative)
    w = f // c
    i = 1
    while w.degree > 0:
        y = w.gcd(c)
        z = w // y
        if z.degree > 0:
            result.append((z.monic(), i))
        i += 1
        w, c = y, c // y
    if c.degree > 0:
        result.extend((g, k * F.p) for g, k in squarefree_decomposition(_pth_root(c.monic())))
    merged = {}
    for g, k in result:
        merged.setdefault(k, []).append(g)
    return [(g, k) for k in sorted(merged) for g in merged[k]]


def distinct_degree(f):
    """[(g_d, d)]: g_d the product of the degree-d irreducible factors of the squarefree monic f."""
    F = f.field
    x = PolyOverFq.x(F)
    out = []
    h = x % f
    rest = f
    d = 0
    while rest.degree >= 2 * (d + 1):
        d += 1
        h = h.powmod(F.order, rest)
        g = rest.gcd(h - x)
        if g.degree > 0:
            out.append((g, d))
            rest = rest // g
            h = h % rest
    if rest.degree > 0:
        out.append((rest.monic(), rest.degree))
    return out


def _trace_map(a, d, f):
    """a + a^2 + ... + a^(2^(m-1)) mod f, m = field degree * d, over characteristic 2."""
    F = f.field
    m = F.degree * d
    acc = a
    term = a
    for _ in range(m - 1):
        term = (term * term) % f
        acc = acc + term
    return acc


def equal_degree(f, d, rng=None):
    """Monic irreducible factors of a squarefree monic f all of whose factors have degree d."""
    rng = _default_rng(rng)
    F = f.field
    if f.degree == d:
        return [f.monic()]
    if f.degree <= 0:
        return []
    while True:
        a = PolyOverFq(F, tuple(F.random_element(rng) for _ in range(f.degree)))
        if a.degree <= 0:
            continue
        if F.p == 2:
            b = _trace_map(a, d, f)
        else:
            b = a.powmod((F.order**d - 1) // 2, f) - PolyOverFq(F, (F.one,))
        g = f.gcd(b)
        if 0 < g.degree < f.degree:
            break
    return equal_degree(g, d, rng) + equal_degree((f // g).monic(), d, rng)


def factor_mod(f, rng=None):
    """Irreducible factorization [(monic factor, multiplicity)] of a nonzero polynomial over F_q."""
    if f.is_zero:
        raise DomainError("cannot factor the zero polynomial")
    if f.degree == 0:
        return []
    if f.field.is_prime_field:
        factors = _prime_field_factor(f)
    else:
        rng = _default_rng(rng)
        factors = []
        for g, k in squarefree_decomposition(f):
            for part, d in distinct_degree(g):
                factors.extend((h, k) for h in equal_degree(part, d, rng))
    return sorted(factors, key=lambda fk: (fk[0].degree, fk[0].coeffs, fk[1]))


def roots_in_field(f, rng=None):
    """Distinct roots of f in its coefficient field, each verified by evaluation."""
    if f.is_zero:
        raise DomainError("the zero polynomial vanishes everywhere")
    F = f.field
    if f.degree == 0:
        return []
    x = PolyOverFq.x(F)
    f = f.monic()
    linear_part = f.gcd(x.powmod(F.order, f) - x)
    roots = []
    for g in equal_degree(linear_part, 1, _default_rng(rng)) if linear_part.degree > 0 else []:
        root = F.neg(g.coeff(0))
        if f(root):
            raise AssertionError(f"root {root} does not annihilate {f}")
        roots.append(root)
    return sorted(roots)
