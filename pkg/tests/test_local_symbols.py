from fractions import Fraction
import random

import pytest

from locsplit.errors import DomainError, RamifiedCaseError
from locsplit.fields import NumberFieldAbs, RelativeExtension
from locsplit.local_symbols import (
    NON_QUADRATIC_WILD,
    RAMIFIED_CASE,
    REAL,
    DirichletCharacter,
    Norm,
    NormCandidate,
    Place,
    cyclic_invariant,
    element_norm_test,
    hilbert_symbol,
    invariant_sum,
    local_norm_test,
    reciprocity_defect,
)
from locsplit.polys import PolyOverQ


def test_place_parsing():
    assert Place.parse("real") is REAL
    assert Place.parse(" 7 ") == Place(7)
    assert str(Place(7)) == "7"
    with pytest.raises(DomainError):
        Place.parse("8")


@pytest.mark.parametrize(
    "a, b, place, expected",
    [
        (-1, -1, Place(2), -1),
        (-1, -1, REAL, -1),
        (2, 3, Place(3), -1),
        (2, 3, Place(2), -1),
        (2, 3, REAL, 1),
        (5, -4, Place(2), 1),
        (Fraction(1, 9), 7, Place(3), 1),
    ],
)
def test_hilbert_symbol(a, b, place, expected):
    assert hilbert_symbol(a, b, place) == expected


def test_hilbert_symbol_of_zero():
    with pytest.raises(DomainError):
        hilbert_symbol(0, 3, REAL)


def test_reciprocity_holds_on_random_pairs():
    rng = random.Random(5)
    for _ in range(40):
        a = Fraction(rng.choice([-1, 1]) * rng.randint(1, 500), rng.randint(1, 60))
        b = Fraction(rng.choice([-1, 1]) * rng.randint(1, 500), rng.randint(1, 60))
        assert reciprocity_defect(a, b) == 0


def test_hilbert_symbol_identities_on_random_rationals():
    rng = random.Random(17)
    places = [REAL, Place(2), Place(3), Place(5), Place(7)]

    def draw():
        return Fraction(rng.choice([-1, 1]) * rng.randint(1, 300), rng.randint(1, 50))

    for _ in range(40):
        a, b, c = draw(), draw(), draw()
        for v in places:
            assert hilbert_symbol(a, b, v) == hilbert_symbol(b, a, v)
            assert hilbert_symbol(a * c, b, v) == hilbert_symbol(a, b, v) * hilbert_symbol(c, b, v)
            assert hilbert_symbol(a, -a, v) == 1
            if a != 1:
                assert hilbert_symbol(a, 1 - a, v) == 1


def test_kronecker_character():
    chi = DirichletCharacter.kronecker(-4)
    assert chi.modulus == 4
    assert chi(5) == 0
    assert chi(3) == Fraction(1, 2)
    assert chi.order == 2
    assert cyclic_invariant(chi, 3, 3) == Fraction(1, 2)
    assert cyclic_invariant(chi, 9, 3) == 0
    with pytest.raises(RamifiedCaseError):
        cyclic_invariant(chi, 3, 2)


def test_character_from_generators():
    chi = DirichletCharacter.from_generators(7, {3: Fraction(1, 3)})
    assert chi.order == 3
    assert chi(2) == Fraction(2, 3)
    with pytest.raises(DomainError):
        DirichletCharacter.from_generators(7, {6: Fraction(1, 3)})


def test_invariant_sums():
    for x in (5, 3, Fraction(-7, 6), 30):
        assert invariant_sum(-4, x) == 0
    assert invariant_sum(DirichletCharacter.kronecker(-4), 15) == Fraction(1, 2)


def test_local_norm_test_over_gaussian_entry(gauss):
    entry = gauss.entries[0]
    L = entry.extension

    def verdict(t, place, precision=None):
        return local_norm_test(NormCandidate(entry.b, t, precision), L, place).kind

    assert verdict(5, REAL) is Norm.IS_NORM
    assert verdict(-5, REAL) is Norm.NOT_NORM
    assert verdict(9, Place(3)) is Norm.IS_NORM
    assert verdict(3, Place(3)) is Norm.NOT_NORM
    assert verdict(9, Place(3), 2) is Norm.UNDETERMINED
    assert verdict(5, REAL, 10) is Norm.UNDETERMINED


def test_ramified_verdicts_over_pure_cubic():
    K = NumberFieldAbs(PolyOverQ((-2, 0, 0, 1)))
    L = RelativeExtension(K, (K.gen * -1, 0, 1))
    candidate = NormCandidate(K.one, 5)
    at_two = local_norm_test(candidate, L, Place(2))
    at_three = local_norm_test(candidate, L, Place(3))
    assert at_two.kind is Norm.UNDETERMINED and at_two.reason == NON_QUADRATIC_WILD
    assert at_three.kind is Norm.UNDETERMINED and at_three.reason == RAMIFIED_CASE


def test_unramified_element_test_over_pure_cubic():
    K = NumberFieldAbs(PolyOverQ((-2, 0, 0, 1)))
    L = RelativeExtension(K, (K.gen * -1, 0, 1))
    assert element_norm_test(K.from_rational(5), L, Place(5)).kind is Norm.NOT_NORM
    assert element_norm_test(K.from_rational(25), L, Place(5)).kind is Norm.IS_NORM
    with pytest.raises(DomainError):
        element_norm_test(Fraction(5), L, Place(5))
