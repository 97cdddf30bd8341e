from fractions import Fraction

import pytest

from locsplit.errors import DomainError
from locsplit.finite_fields import FqField, PolyOverFq, factor_mod, roots_in_field
from locsplit.polys import PolyOverQ, count_real_roots, discriminant, isolate_real_roots


def multiply_out(factors, field):
    product = PolyOverFq(field, (field.one,))
    for g, k in factors:
        for _ in range(k):
            product = product * g
    return product


def is_irreducible(f):
    factors = factor_mod(f)
    return len(factors) == 1 and factors[0][1] == 1 and factors[0][0].degree == f.degree


def test_arithmetic_and_division():
    f = PolyOverQ((-1, 0, 1))
    g = PolyOverQ((1, 1))
    q, r = divmod(f, g)
    assert q == PolyOverQ((-1, 1))
    assert r.is_zero
    assert f(Fraction(1, 2)) == Fraction(-3, 4)
    assert f.gcd(PolyOverQ((-1, 1))) == PolyOverQ((-1, 1))


def test_discriminants():
    assert discriminant(PolyOverQ((1, 0, 1))) == -4
    assert discriminant(PolyOverQ((-1, -1, 0, 1))) == -23
    assert discriminant(PolyOverQ((1, -3, 0, 1))) == 81


def test_sturm_counts():
    f = PolyOverQ((-2, 0, 1))
    assert count_real_roots(f) == 2
    assert count_real_roots(f, (0, 2)) == 1
    assert count_real_roots(PolyOverQ((1, 0, 1))) == 0
    assert count_real_roots(PolyOverQ((-1, -1, 0, 1))) == 1
    with pytest.raises(DomainError):
        count_real_roots(PolyOverQ((1, 2, 1)))


def test_root_isolation_and_signs():
    roots = isolate_real_roots(PolyOverQ((-2, 0, 1)))
    assert len(roots) == 2
    negative, positive = roots
    assert positive.compare(Fraction(141, 100)) > 0
    assert positive.compare(Fraction(142, 100)) < 0
    assert negative.compare(0) < 0
    assert positive.refine_to(Fraction(1, 1000)).hi - positive.refine_to(Fraction(1, 1000)).lo <= Fraction(1, 1000)
    assert positive.sign_of(PolyOverQ((-2, 0, 1))) == 0


def test_factor_mod_prime():
    F = FqField.prime(5)
    f = PolyOverFq.from_ints(F, (1, 0, 1))
    factors = factor_mod(f)
    assert [g.degree for g, _ in factors] == [1, 1]
    assert multiply_out(factors, F) == f
    assert roots_in_field(f) == [(2,), (3,)]
    assert not is_irreducible(f)
    assert is_irreducible(PolyOverFq.from_ints(FqField.prime(3), (1, 0, 1)))


def test_factor_mod_extension_field():
    F9 = FqField(3, (1, 0, 1))
    f = PolyOverFq.from_ints(F9, (1, 0, 1))
    factors = factor_mod(f)
    assert [g.degree for g, _ in factors] == [1, 1]
    assert len(roots_in_field(f)) == 2
    assert multiply_out(factors, F9) == f


def test_reducible_modulus_rejected():
    with pytest.raises(DomainError):
        FqField(5, (1, 0, 1))
