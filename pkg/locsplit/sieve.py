"""Prime values of binary forms.

`hh1_search` looks for (lam, mu) making every form an S-unit times a single
prime. The Irving helpers build the integral cubic form attached to a cubic
field with one real place and scan it for values avoiding the primes p = 1 mod q.
"""

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
import logging
import math

import sympy
from sympy import isprime, primerange

from . import config
from .arith import CongruenceSystem, as_rational, crt_solve, factor, factor_integer, rational_residue, strip_primes
from .errors import DomainError, InfeasibleAtPrecision, InternalConsistencyError
from .fields import T, KElement, NumberFieldAbs
from .local_symbols import REAL, Place, sorted_places
from .polys import X, PolyOverQ, isolate_real_roots
from .workers import merge_counters, run_chunks, split_range

logger = logging.getLogger(__name__)

Y = sympy.Symbol("y")


@dataclass(frozen=True)
class HomogeneousForm:
    """sum_i c_i x^i y^(d - i) with integer c_i; `coeffs` ascending in x, length d + 1."""

    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(as_rational(c) for c in self.coeffs)
        if len(coeffs) < 2:
            raise DomainError("a binary form needs degree >= 1")
        if any(c.denominator != 1 for c in coeffs):
            raise DomainError("binary forms must have integer coefficients")
        if not any(coeffs):
            raise DomainError("the zero form")
        object.__setattr__(self, "coeffs", tuple(int(c) for c in coeffs))

    @classmethod
    def from_expr(cls, expr):
        """From a sympy expression homogeneous in x and y."""
        poly = sympy.Poly(sympy.expand(expr), X, Y)
        if not poly.is_homogeneous:
            raise DomainError(f"{expr} is not homogeneous in x, y")
        d = poly.total_degree()
        return cls(tuple(poly.coeff_monomial(X**i * Y ** (d - i)) for i in range(d + 1)))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, x, y):
        d = self.degree
        return sum(c * x**i * y ** (d - i) for i, c in enumerate(self.coeffs))

    def dehomogenized(self):
        """f(x, 1)."""
        return PolyOverQ(self.coeffs)

    def as_expr(self):
        d = self.degree
        return sum(c * X**i * Y ** (d - i) for i, c in enumerate(self.coeffs))

    def content(self):
        return math.gcd(*self.coeffs)

    def is_irreducible(self):
        if self.degree == 1:
            return True
        if self.coeffs[-1] == 0:
            return False
        return self.dehomogenized().is_irreducible()

    def discriminant(self):
        if self.degree < 2 or self.coeffs[-1] == 0:
            raise DomainError("discriminant needs degree >= 2 with nonzero x^d coefficient")
        return as_rational(sympy.discriminant(self.dehomogenized().as_expr(X), X))

    def __str__(self):
        return str(self.as_expr())


# -- (HH1) search --------------------------------------------------------------


@dataclass(frozen=True)
class BinaryTarget:
    """(lam_v, mu_v) at a place; precision N at a finite place, epsilon for the chordal metric at the real one."""

    place: Place
    lam: Fraction
    mu: Fraction
    precision: Fraction

    def __post_init__(self):
        for name in ("lam", "mu", "precision"):
            object.__setattr__(self, name, as_rational(getattr(self, name)))
        if self.precision <= 0:
            raise DomainError(f"precision at {self.place} must be positive")
        if self.place.is_real:
            if self.lam == 0 and self.mu == 0:
                raise DomainError("the real target must not be (0, 0)")
        else:
            if self.precision.denominator != 1:
                raise DomainError(f"precision at {self.place} must be an integer")
            p = self.place.prime
            if self.lam.denominator % p == 0 or self.mu.denominator % p == 0:
                raise DomainError(f"target at {p} must be {p}-integral")

    def as_json(self):
        return {"v": str(self.place), "lam": str(self.lam), "mu": str(self.mu), "precision": str(self.precision)}


def _merge_binary_targets(targets):
    by_place = {}
    for target in targets:
        previous = by_place.get(target.place)
        if previous is None:
            by_place[target.place] = target
            continue
        if target.place.is_real:
            if previous != target:
                raise InfeasibleAtPrecision("two different real targets")
            continue
        p = target.place.prime
        modulus = p ** int(min(previous.precision, target.precision))
        if any(rational_residue(a - b, modulus) for a, b in ((previous.lam, target.lam), (previous.mu, target.mu))):
            raise InfeasibleAtPrecision(f"targets at {p} are CRT-incompatible modulo {modulus}")
        by_place[target.place] = max(previous, target, key=lambda tg: tg.precision)
    return [by_place[v] for v in sorted_places(by_place)]


def chordal_close(lam, mu, target):
    """|lam mu_v - mu lam_v| <= eps * |(lam, mu)| * |(lam_v, mu_v)|, compared on squares."""
    cross = lam * target.mu - mu * target.lam
    return cross * cross <= target.precision**2 * (lam * lam + mu * mu) * (target.lam**2 + target.mu**2)


@dataclass(frozen=True)
class FormCertificate:
    index: int
    value: int
    s_part: dict
    prime: int

    def as_json(self):
        return {
            "i": self.index,
            "value": str(self.value),
            "s_part": {str(p): e for p, e in sorted(self.s_part.items())},
            "prime": str(self.prime),
            "exponent": 1,
            "primality": "deterministic" if self.prime < 2**64 else "bpsw",
        }


@dataclass(frozen=True)
class HH1Solution:
    lam: int
    mu: int
    certificates: tuple

    def as_json(self):
        return {"lam": self.lam, "mu": self.mu, "forms": [c.as_json() for c in self.certificates]}


@dataclass
class HH1Search:
    hits: list
    stats: Counter
    exhausted: bool = True

    def as_json(self):
        return {"hits": len(self.hits), "exhausted": self.exhausted, "stats": dict(sorted(self.stats.items()))}


def _finite_s(S):
    return sorted(v.prime for v in S if not v.is_real)


def _check_local_solubility(forms, S):
    """Every prime outside S must admit (lam, mu) with no form divisible by it."""
    primes = _finite_s(S)
    suspects = set(primerange(2, sum(f.degree for f in forms) + 1))
    for f in forms:
        if f.content() != 1:
            suspects |= set(factor(f.content()).primes)
    for p in sorted(suspects - set(primes)):
        if not any(all(f(a, b) % p for f in forms) for a in range(p) for b in range(p)):
            raise DomainError(f"every value of the forms is divisible by {p}; add {p} to S")


def hh1_check(forms, S, targets, lam, mu):
    """HH1Solution if (lam, mu) meets every condition, else None."""
    lam, mu = int(lam), int(mu)
    for target in targets:
        if target.place.is_real:
            if lam * target.lam + mu * target.mu <= 0 or not chordal_close(lam, mu, target):
                return None
        else:
            modulus = target.place.prime ** int(target.precision)
            if (lam - rational_residue(target.lam, modulus)) % modulus or (mu - rational_residue(target.mu, modulus)) % modulus:
                return None
    primes = _finite_s(S)
    certificates = []
    for i, f in enumerate(forms, start=1):
        value = f(lam, mu)
        if value == 0:
            return None
        s_part, cofactor = strip_primes(value, primes)
        if not isprime(cofactor):
            return None
        certificates.append(FormCertificate(i, value, s_part, cofactor))
    return HH1Solution(lam, mu, tuple(certificates))


def verify_hh1_solution(forms, S, targets, solution):
    """Recompute every certificate from scratch."""
    fresh = hh1_check(forms, S, targets, solution.lam, solution.mu)
    if fresh is None or fresh != solution:
        return False
    primes = set(_finite_s(S))
    for cert in fresh.certificates:
        rebuilt = cert.prime * math.prod(p**e for p, e in cert.s_part.items())
        if rebuilt != abs(cert.value) or cert.prime in primes or factor_integer(cert.prime) != {cert.prime: 1}:
            return False
    return True


def _axis_class(targets, coordinate):
    pairs = []
    for target in targets:
        if not target.place.is_real:
            modulus = target.place.prime ** int(target.precision)
            pairs.append((modulus, rational_residue(getattr(target, coordinate), modulus)))
    return crt_solve(CongruenceSystem.from_pairs(pairs))


def _sieve_segment(forms, S, targets, lam_bound, lam_class, mu_class, segment):
    stats = Counter()
    hits = []
    lo, hi = segment
    r_mu, m_mu = mu_class
    r_lam, m_lam = lam_class
    primes = _finite_s(S)
    for mu in range(lo + (r_mu - lo) % m_mu, hi, m_mu):
        for lam in range(-lam_bound + (r_lam + lam_bound) % m_lam, lam_bound + 1, m_lam):
            if math.gcd(lam, mu) != 1:
                continue
            stats["tried"] += 1
            solution = hh1_check(forms, S, targets, lam, mu)
            if solution is None:
                stats["rejected"] += 1
                continue
            hits.append(solution)
        stats["mu_values"] += 1
    logger.debug("segment [%d, %d): %d hits over S-primes %s", lo, hi, len(hits), primes)
    return hits, stats


def hh1_search(forms, S, targets=(), mu_bound=config.DEFAULT_MU_MAX, lam_bound=None, jobs=config.DEFAULT_JOBS, limit=None):
    """Coprime (lam, mu), 1 <= mu <= mu_bound, |lam| <= lam_bound, in canonical (mu, lam) order."""
    forms = tuple(forms)
    if not forms:
        raise DomainError("hh1_search needs at least one form")
    for i, f in enumerate(forms, start=1):
        if not f.is_irreducible():
            raise DomainError(f"form {i} ({f}) is reducible")
    S = frozenset(S) | {REAL}
    targets = _merge_binary_targets(targets)
    for target in targets:
        if target.place not in S:
            raise DomainError(f"target at {target.place}, which is not in S")
    _check_local_solubility(forms, S)
    lam_bound = mu_bound if lam_bound is None else lam_bound
    lam_class = _axis_class(targets, "lam")
    mu_class = _axis_class(targets, "mu")

    segments = split_range(1, mu_bound + 1, config.SIEVE_SEGMENT)
    wave = max(jobs, 1)
    hits, counters = [], []
    exhausted = True
    for start in range(0, len(segments), wave):
        results = run_chunks(
            lambda seg: _sieve_segment(forms, S, targets, lam_bound, lam_class, mu_class, seg),
            segments[start : start + wave],
            jobs,
        )
        for seg_hits, seg_stats in results:
            hits.extend(seg_hits)
            counters.append(seg_stats)
        if limit is not None and len(hits) >= limit:
            hits = hits[:limit]
            exhausted = start + wave >= len(segments)
            break
    for solution in hits:
        if not verify_hh1_solution(forms, S, targets, solution):
            raise InternalConsistencyError(f"hit ({solution.lam}, {solution.mu}) fails re-verification")
    stats = merge_counters(counters)
    stats["hits"] = len(hits)
    logger.info("hh1 search: %d hits from %d pairs", len(hits), stats["tried"])
    return HH1Search(hits, stats, exhausted)


# -- Irving's cubic forms --------------------------------------------------------


@dataclass(frozen=True)
class IrvingForm:
    field: NumberFieldAbs
    q: int
    a1: KElement
    a2: Fraction
    b1: KElement
    b2: Fraction
    c: int
    form: HomogeneousForm

    @property
    def scale(self):
        return Fraction(self.c) ** self.q

    def as_json(self):
        return {
            "K": str(self.field.P.as_expr(T)),
            "q": self.q,
            "a1": str(self.a1),
            "a2": str(self.a2),
            "b1": str(self.b1),
            "b2": str(self.b2),
            "c": str(self.c),
            "f": str(self.form),
            "coefficients": [str(c) for c in self.form.coeffs],
            "discriminant": str(self.form.discriminant()),
        }


def _clearing_integer(values, q):
    """Smallest m > 0 with m^q * v integral for every v."""
    m = 1
    for v in values:
        if v.denominator == 1:
            continue
        for p, e in factor_integer(v.denominator).items():
            need = -(-e // q)
            have = 0
            while m % p ** (have + 1) == 0:
                have += 1
            if need > have:
                m *= p ** (need - have)
    return m


def irving_form_build(K, q, a1, a2, b1, b2):
    """c and f(x, y) = c^q N_{K/Q}(b1 ((a2 - a1) x + y / b2)), integral with positive x^3 coefficient."""
    if K.degree != 3:
        raise DomainError(f"{K} is not a cubic field")
    if K.real_place_count != 1:
        raise DomainError(f"{K} has {K.real_place_count} real places; exactly one is required")
    if q < 7 or not isprime(q):
        raise DomainError(f"q = {q} must be a prime >= 7")
    a1 = a1 if isinstance(a1, KElement) else K.from_rational(a1)
    b1 = b1 if isinstance(b1, KElement) else K.from_rational(b1)
    a2, b2 = as_rational(a2), as_rational(b2)
    if a1.is_rational:
        raise DomainError("a1 must generate K")
    if b1.is_zero or b2 == 0:
        raise DomainError("b1 and b2 must be nonzero")
    linear = b1 * (K.from_rational(a2) - a1)
    expr = sympy.resultant(
        K.P.as_expr(T),
        linear.poly.as_expr(T) * X + b1.poly.as_expr(T) * Y / sympy.Rational(b2.numerator, b2.denominator),
        T,
    )
    g = sympy.Poly(sympy.expand(expr), X, Y)
    coeffs = [as_rational(g.coeff_monomial(X**i * Y ** (3 - i))) for i in range(4)]
    c = _clearing_integer(coeffs, q)
    if coeffs[3] < 0:
        c = -c
    scaled = [Fraction(c) ** q * v for v in coeffs]
    form = HomogeneousForm(tuple(scaled))
    logger.info("irving form: c = %d, f = %s", c, form)
    return IrvingForm(K, q, a1, a2, b1, b2, c, form)


def irving_identity(irving, tau, lam):
    """Both sides of f(lam, mu) / lam^3 = c^q N(b1 (tau - a1)) with mu = lam b2 (tau - a2)."""
    tau, lam = as_rational(tau), as_rational(lam)
    if lam == 0:
        raise DomainError("lam must be nonzero")
    mu = lam * irving.b2 * (tau - irving.a2)
    lhs = irving.form(lam, mu) / lam**3
    rhs = irving.scale * (irving.b1 * (irving.field.from_rational(tau) - irving.a1)).norm()
    return lhs, rhs


def irving_sign_check(form):
    """Whether every real root of f(x, 1) is negative."""
    fx = form.form.dehomogenized() if isinstance(form, IrvingForm) else form.dehomogenized()
    if fx(0) == 0:
        return False
    return all(root.compare(0) < 0 for root in isolate_real_roots(fx.squarefree_part()))


@dataclass(frozen=True)
class ForbiddenHit:
    x: int
    y: int
    value: int
    factorization: object
    roots_of_two: dict = field(default_factory=dict)

    def as_json(self):
        return {
            "x": self.x,
            "y": self.y,
            "value": str(self.value),
            "factorization": self.factorization.as_json(),
            "roots_of_two": {str(p): r for p, r in sorted(self.roots_of_two.items())},
        }


def qth_root_of_two(p, q):
    """r with r^q = 2 mod p, for p not 1 mod q (so x -> x^q is a bijection of F_p^*)."""
    return pow(2, pow(q, -1, p - 1), p)


def _forbidden_segment(f, S_primes, q, x_lo, x_hi, congruence, cofactor, segment):
    hits = []
    stats = Counter()
    y_lo, y_hi = segment
    modulus, rx, ry = congruence
    for y in range(y_lo + (ry - y_lo) % modulus, y_hi, modulus):
        for x in range(x_lo + (rx - x_lo) % modulus, x_hi + 1, modulus):
            stats["tried"] += 1
            value = cofactor(x, y) * f(x, y)
            if value == 0:
                stats["zero"] += 1
                continue
            fact = factor(value)
            outside = [p for p in fact.primes if p not in S_primes]
            if any(p % q == 1 for p in outside):
                stats["forbidden"] += 1
                continue
            roots = {p: qth_root_of_two(p, q) for p in outside if p != 2}
            hits.append(ForbiddenHit(x, y, value, fact, roots))
    return hits, stats


def forbidden_class_scan(
    f,
    S,
    q,
    x_range=(1, config.DEFAULT_FORBIDDEN_BOX),
    y_range=(1, config.DEFAULT_FORBIDDEN_BOX),
    congruence=None,
    cofactor=None,
    jobs=config.DEFAULT_JOBS,
    limit=None,
):
    """Positive (x, y) in the box whose cofactor(x, y) * f(x, y) has no prime p = 1 mod q outside S.

    The cofactor defaults to y; `congruence` is (modulus, x residue, y residue).
    """
    if not isprime(q):
        raise DomainError(f"q = {q} is not prime")
    if x_range[0] < 1 or y_range[0] < 1:
        raise DomainError("the scan runs over positive pairs only (x0, y0 >= 1)")
    cofactor = cofactor or HomogeneousForm((1, 0))
    congruence = congruence or (1, 0, 0)
    S_primes = set(_finite_s(S))
    segments = split_range(y_range[0], y_range[1] + 1, config.SIEVE_SEGMENT)
    hits, counters = [], []
    for part_hits, part_stats in run_chunks(
        lambda seg: _forbidden_segment(f, S_primes, q, x_range[0], x_range[1], congruence, cofactor, seg), segments, jobs
    ):
        hits.extend(part_hits)
        counters.append(part_stats)
        if limit is not None and len(hits) >= limit:
            hits = hits[:limit]
            break
    for hit in hits:
        if any(pow(r, q, p) != 2 % p for p, r in hit.roots_of_two.items()):
            raise InternalConsistencyError(f"q-th root certificate fails for ({hit.x}, {hit.y})")
    stats = merge_counters(counters)
    stats["hits"] = len(hits)
    return hits, stats
