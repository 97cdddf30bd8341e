import pytest

from locsplit.errors import CyclicAlready, DomainError, NotFound
from locsplit.fields import NumberFieldAbs
from locsplit.galois_class import (
    AlmostAbelian,
    almost_abelian_test,
    cycle_type,
    cycle_type_scan,
    cyclic_resolvent_cubic,
    find_split_prime,
    is_affine_pattern,
    violates_fixed_point_bound,
)
from locsplit.instance_io import parse_poly
from locsplit.polys import PolyOverQ


def test_cycle_types_of_gaussian_polynomial():
    profile = cycle_type_scan(parse_poly("x^2+1"), 20)
    assert profile.types == [(1, 1), (2,)]
    assert profile.first_prime == {(1, 1): 5, (2,): 3}
    assert profile.scanned == 7
    assert profile.skipped == 1


def test_cycle_type_of_pure_cubic():
    assert cycle_type(parse_poly("x^3-2"), 5) == (1, 2)
    assert cycle_type(parse_poly("x^3-2"), 31) == (1, 1, 1)


def test_scan_is_identical_across_job_counts():
    f = parse_poly("x^4-2")
    assert cycle_type_scan(f, 1200).as_json() == cycle_type_scan(f, 1200, jobs=3).as_json()


def test_pattern_predicates():
    assert violates_fixed_point_bound((1, 1, 3))
    assert not violates_fixed_point_bound((1, 2, 2))
    assert not violates_fixed_point_bound((1, 1, 1, 1, 1))
    assert is_affine_pattern((1, 2, 2), 5)
    assert is_affine_pattern((5,), 5)
    assert not is_affine_pattern((1, 1, 3), 5)
    assert not is_affine_pattern((2, 3), 5)


def test_small_degrees():
    assert almost_abelian_test(parse_poly("x^2+1")).value is AlmostAbelian.ABELIAN
    cyclic = almost_abelian_test(parse_poly("x^3-3*x-1"))
    assert cyclic.value is AlmostAbelian.AFFINE_COMPATIBLE and cyclic.abelian
    pure = almost_abelian_test(parse_poly("x^3-2"))
    assert pure.value is AlmostAbelian.AFFINE_COMPATIBLE and not pure.abelian


def test_symmetric_quintic_is_rejected():
    verdict = almost_abelian_test(parse_poly("x^5-x-1"))
    assert verdict.value is AlmostAbelian.REJECTED
    assert verdict.witness_prime <= 200
    assert violates_fixed_point_bound(verdict.witness_type)
    assert verdict.as_json()["witness"]["p"] == verdict.witness_prime


def test_frobenius_quintic_is_not_rejected():
    verdict = almost_abelian_test(parse_poly("x^5-2"))
    assert verdict.value is AlmostAbelian.AFFINE_COMPATIBLE
    assert not verdict.abelian


def test_composite_degrees():
    assert almost_abelian_test(parse_poly("x^4+1")).value is AlmostAbelian.ABELIAN
    assert almost_abelian_test(parse_poly("x^4-2")).value is AlmostAbelian.OUTSIDE_DEFINITION


def test_non_integral_polynomial_rejected():
    with pytest.raises(DomainError):
        almost_abelian_test(PolyOverQ((1, 0, 2)))


def test_cyclic_resolvents():
    assert cyclic_resolvent_cubic(parse_poly("x^3-x-1")) == parse_poly("x^2+23")
    assert cyclic_resolvent_cubic(parse_poly("x^3-2")) == parse_poly("x^2+108")
    with pytest.raises(CyclicAlready):
        cyclic_resolvent_cubic(parse_poly("x^3-3*x-1"))


def test_split_primes():
    gaussian = NumberFieldAbs(parse_poly("x^2+1"))
    pure_cubic = NumberFieldAbs(parse_poly("x^3-2"))
    assert find_split_prime([gaussian]) == 5
    assert find_split_prime([pure_cubic]) == 31
    assert find_split_prime([gaussian], exclude=[5, 13]) == 17
    with pytest.raises(NotFound):
        find_split_prime([gaussian], bound=4)
