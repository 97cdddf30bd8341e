from fractions import Fraction
import random

import pytest

from locsplit.conjecture import (
    LocalTarget,
    Mobius,
    Mode,
    Overall,
    Shape,
    change_variables,
    check_condition1,
    check_condition1prime,
    check_condition2,
    evaluate,
    extend_places,
    integral_rescaling,
    linear_forms,
    locally_split,
    pullback,
    round_trip_holds,
    s_unit_denominators,
    search_t0,
    theorem_shape,
    translate_instance,
    verify_hypotheses,
)
from locsplit.errors import DomainError, HypothesisFailure, InfeasibleAtPrecision, VacuousInstance
from locsplit.fields import DegreeOne
from locsplit.instance_io import parse_instance
from locsplit.local_symbols import REAL, Norm, Place
from locsplit.polys import PolyOverQ


@pytest.mark.parametrize("t0, expected", [(45, Overall.FAIL), (25, Overall.PASS), (Fraction(13, 4), Overall.PASS)])
def test_condition2_over_gaussian_instance(gauss, t0, expected):
    assert evaluate(gauss, t0).overall is expected


def test_condition2_items(gauss):
    items = check_condition2(gauss, 45)
    assert {(item.prime, item.verdict) for item in items} == {(3, DegreeOne.NO), (5, DegreeOne.YES)}
    assert check_condition2(gauss, 1) == []
    with pytest.raises(DomainError):
        check_condition2(gauss, 0)


def test_condition1_at_a_dyadic_target():
    inst = parse_instance("entry: P=t; g=x^2+1; b=1\nS: real, 2\ntarget: v=2 t=5/4 N=1\n")
    assert check_condition1(inst, Fraction(13, 4))
    assert not check_condition1(inst, Fraction(9, 4))


def test_condition1prime_needs_a_common_sign(real_quadratic_instance):
    assert not check_condition1prime(real_quadratic_instance, 3)
    assert check_condition1prime(real_quadratic_instance, Fraction(1, 2))


def test_weak_mode_replaces_the_real_condition(real_quadratic_instance):
    strong = evaluate(real_quadratic_instance, Fraction(7, 8))
    weak = evaluate(real_quadratic_instance, Fraction(7, 8), mode=Mode.WEAK)
    assert strong.condition1[REAL]
    assert weak.condition1prime


def test_instance_enlarges_s_for_ramification(real_quadratic_instance):
    assert Place(2) in real_quadratic_instance.S
    inst = parse_instance("entry: P=t; g=x^2+3; b=1\n")
    assert inst.finite_primes == [2, 3]
    assert inst.enlarged == (2, 3)


def test_conflicting_targets_are_infeasible():
    with pytest.raises(InfeasibleAtPrecision):
        parse_instance("entry: P=t; g=x^2+1; b=1\nS: real, 2\ntarget: v=2 t=1 N=3\ntarget: v=2 t=3 N=3\n")


def test_hypotheses():
    inst = parse_instance("entry: P=t; g=x^2+1; b=1\nS: real, 2\ntarget: v=2 t=1 N=3\ntarget: real t=10 eps=1\n")
    verdicts = verify_hypotheses(inst)
    assert verdicts[(1, Place(2))].kind is Norm.IS_NORM
    assert verdicts[(1, REAL)].kind is Norm.IS_NORM
    vacuous = parse_instance("entry: P=t; g=x^2+1; b=1\nS: real, 2\ntarget: real t=-10 eps=1\n")
    with pytest.raises(VacuousInstance):
        search_t0(vacuous, height_bound=20)


def test_search_finds_seventeen():
    inst = parse_instance("entry: P=t; g=x^2+1; b=1\nS: real, 2\ntarget: v=2 t=1 N=3\ntarget: real t=10 eps=10\n")
    result = search_t0(inst, height_bound=100)
    found = [t0 for t0, _ in result.hits]
    assert Fraction(17) in found
    assert Fraction(9) not in found
    assert all(t0 % 8 == 1 and abs(t0 - 10) <= 10 for t0 in found)
    assert result.stats["hits"] == len(found)
    assert result.exhausted


def test_search_is_identical_across_job_counts():
    inst = parse_instance("entry: P=t; g=x^2+1; b=1\nS: real, 2\ntarget: v=2 t=1 N=2\n")
    one = search_t0(inst, height_bound=60, denominator_bound=4)
    four = search_t0(inst, height_bound=60, denominator_bound=4, jobs=4)
    assert [t for t, _ in one.hits] == [t for t, _ in four.hits]


def test_s_unit_denominators():
    assert s_unit_denominators([2, 3], 10) == [1, 2, 3, 4, 6, 8, 9]
    assert s_unit_denominators([], 10) == [1]


def test_mobius_maps():
    m = Mobius(2, 1, 1, 1)
    assert m(1) == Fraction(3, 2)
    assert m.inverse()(m(5)) == 5
    with pytest.raises(DomainError):
        Mobius(1, 1, 1, 1)
    with pytest.raises(DomainError):
        m(-1)


def test_change_of_variables_identity(gauss):
    change = change_variables(gauss, Mobius(1, 1, 0, 1), t0_prime=26)
    assert change.transformed.entries[0].P == PolyOverQ((-1, 1))
    assert change.conclusions["t0"] == "25"
    assert change.conclusions["1"] is True
    assert change.conclusions["identity"]
    assert change.conclusions["round_trip"]
    assert change.conclusions["ok"]


def test_change_of_variables_hypothesis_ii(gauss):
    # alpha a + beta = 0 for a = 0
    with pytest.raises(HypothesisFailure) as info:
        change_variables(gauss, Mobius(1, 0, 0, 1))
    assert info.value.clause == "ii"
    with pytest.raises(HypothesisFailure) as info:
        change_variables(gauss, Mobius(3, 1, 0, 1))
    assert info.value.clause == "ii"


SQRT2_INSTANCE = """
entry: P=t^2-2; g=x^2+1; b=1
S: real, 2, 3, 5, 7
target: v=2 t=1 N=3
target: v=3 t=1 N=2
target: real t=10 eps=1
"""

# (alpha, beta) with beta^2 - 2 alpha^2 supported on S
SQRT2_UNIT_PAIRS = [(1, 1), (1, 2), (1, 3), (2, 3), (2, 2), (3, 3), (1, 4), (3, 4), (2, 1), (3, 5)]


def test_change_of_variables_conclusions_for_random_maps():
    inst = parse_instance(SQRT2_INSTANCE)
    rng = random.Random(9)
    checked = 0
    for _ in range(40):
        alpha, beta = rng.choice(SQRT2_UNIT_PAIRS)
        beta *= rng.choice([-1, 1])
        gamma = rng.choice([-3, -2, -1, 1, 2, 3])
        delta = rng.randint(-5, 5)
        if alpha * delta == beta * gamma:
            continue
        t0_prime = Fraction(rng.randint(-30, 30), rng.randint(1, 5))
        if t0_prime * gamma == alpha:
            continue
        try:
            change = change_variables(inst, Mobius(alpha, beta, gamma, delta), t0_prime=t0_prime)
        except HypothesisFailure:
            continue
        checked += 1
        outcome = change.conclusions
        assert outcome["identity"]
        assert outcome["round_trip"]
        assert outcome["1"] == "conditional"
        assert outcome["2"] and outcome["3"] and outcome["4"] in (True, None)
        assert outcome["ok"]
    assert checked >= 8


def test_pullback_restores_entries_up_to_the_determinant(gauss):
    change = change_variables(gauss, Mobius(2, 1, 1, 3))
    assert change.transformed.entries[0].P == PolyOverQ((Fraction(-1, 3), 1))
    [back] = pullback(change)
    original = gauss.entries[0]
    assert back.P == original.P
    assert back.extension == original.extension
    assert back.b == original.b * 5
    assert round_trip_holds(change)


def test_extend_places_keeps_condition2(gauss):
    extended = extend_places(gauss, [3, 5])
    rng = random.Random(21)
    for _ in range(40):
        t0 = Fraction(rng.choice([-1, 1]) * rng.randint(1, 500), rng.choice([1, 2, 4, 7]))
        if t0.numerator % 3 == 0 or t0.numerator % 5 == 0:
            continue
        before = {(item.prime, item.verdict) for item in check_condition2(gauss, t0)}
        after = {(item.prime, item.verdict) for item in check_condition2(extended, t0)}
        assert before == after


def test_translate_instance(gauss):
    moved = translate_instance(gauss, 3)
    assert moved.entries[0].P == PolyOverQ((3, 1))
    assert moved.S == gauss.S


def test_integral_rescaling():
    inst = parse_instance("entry: P=t-1; g=x^2+1; b=1\nS: real, 2\n")
    m, change = integral_rescaling(inst)
    assert (m.alpha, m.beta, m.gamma, m.delta) == (16, 0, 0, 4)
    assert change.transformed.entries[0].P == PolyOverQ((-4, 1))


def test_linear_forms_and_shape(gauss):
    assert linear_forms(gauss) == [(1, 0)]
    assert theorem_shape(gauss) is Shape.SMALL_DEGREE


def test_locally_split(gauss):
    assert locally_split(gauss, 25)
    assert locally_split(gauss, 26)
    assert not locally_split(gauss, 45)


def test_extend_places(gauss):
    extended = extend_places(gauss, [5])
    target = extended.target_at(Place(5))
    assert target.value == Fraction(1, 25)
    assert target.precision == 1
    assert Place(5) in extended.S
    assert extend_places(gauss, [2]).S == gauss.S


def test_local_target_validation():
    with pytest.raises(DomainError):
        LocalTarget(Place(2), 1, Fraction(1, 2))
    with pytest.raises(DomainError):
        LocalTarget(REAL, 1, 0)
