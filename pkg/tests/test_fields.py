from fractions import Fraction

import pytest

from locsplit.errors import RamifiedPrime
from locsplit.fields import (
    DegreeOne,
    NumberFieldAbs,
    RelativeExtension,
    absolute_polynomial,
    has_degree_one_place_over,
    places_above,
    positive_valuation_place,
    splits_completely,
)
from locsplit.polys import PolyOverQ


def test_places_above_in_gaussian_field(gaussian_field):
    assert [w.residue_degree for w in places_above(gaussian_field, 5)] == [1, 1]
    assert [w.residue_degree for w in places_above(gaussian_field, 3)] == [2]
    assert splits_completely(gaussian_field, 13)
    assert not splits_completely(gaussian_field, 7)
    with pytest.raises(RamifiedPrime):
        places_above(gaussian_field, 2)


def test_element_norms(gaussian_field):
    x = gaussian_field.element((7, 1))
    assert x.norm() == 50
    assert gaussian_field.norm_of((7, 1)) == 50
    assert gaussian_field.norm_of((3,)) == 9
    assert (x * x.inverse()) == gaussian_field.one


def test_valuation_at_split_places(gaussian_field):
    x = gaussian_field.element((2, 1))
    valuations = sorted(x.valuation_at(w) for w in places_above(gaussian_field, 5))
    assert valuations == [0, 1]
    assert gaussian_field.from_rational(Fraction(25, 3)).valuation_at(places_above(gaussian_field, 5)[0]) == 2


def test_cubic_field_and_relative_extension():
    K = NumberFieldAbs(PolyOverQ((-2, 0, 0, 1)))
    assert K.real_place_count == 1
    assert K.bad_primes == {2, 3}
    L = RelativeExtension(K, (K.gen * -1, 0, 1))
    assert absolute_polynomial(L).degree == 6
    assert 2 in L.ramified_primes


def test_positive_valuation_place_and_degree_one():
    K = NumberFieldAbs(PolyOverQ((0, 1)))
    L = RelativeExtension(K, (1, 0, 1))
    w5 = positive_valuation_place(K, 25, 5)
    assert w5 is not None
    assert has_degree_one_place_over(L, w5) is DegreeOne.YES
    w3 = positive_valuation_place(K, 45, 3)
    assert has_degree_one_place_over(L, w3) is DegreeOne.NO
    assert positive_valuation_place(K, 25, 3) is None
