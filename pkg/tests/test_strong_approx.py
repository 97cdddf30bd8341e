import random
from fractions import Fraction

import pytest

from locsplit.arith import prime_support, valuation
from locsplit.conjecture import LocalTarget, check_condition2
from locsplit.errors import DomainError
from locsplit.fields import DegreeOne
from locsplit.instance_io import parse_constraint, parse_instance
from locsplit.local_symbols import REAL, Norm, Place
from locsplit.strong_approx import (
    ConstraintPair,
    LinearForm,
    NormCertificate,
    NormMultiplierProblem,
    PuncturedAffineProblem,
    line_trick_solve,
    local_target_verdicts,
    norm_multiplier_solve,
    verify_norm_certificate,
    w_fiber_verify,
)

AXES = ConstraintPair(LinearForm((1, 0)), LinearForm((0, 1)))


def test_constraint_pair_geometry():
    assert AXES.contains((0, 0))
    assert not AXES.contains((0, 1))
    assert AXES.meets_line((1, 1), (-1, -1))
    assert not AXES.meets_line((1, 1), (1, 0))
    with pytest.raises(DomainError):
        ConstraintPair(LinearForm((1, 1)), LinearForm((2, 2), 1))
    assert parse_constraint("x1 - 1; x2 + 2*x1", 2).contains((1, -2))


def test_line_trick_without_real_target():
    prob = PuncturedAffineProblem(2, (AXES,), frozenset({REAL, Place(3)}), {Place(3): ((1, 1), 2)}, 5)
    result = line_trick_solve(prob)
    assert result.checks["ok"]
    assert all(valuation(x - 1, 3) >= 2 for x in result.point)
    assert not AXES.contains(result.point)


def test_line_trick_with_real_target():
    targets = {Place(3): ((1, 1), 2), REAL: ((10, -4), Fraction(1, 2))}
    prob = PuncturedAffineProblem(2, (AXES,), frozenset({REAL, Place(3)}), targets, 5)
    result = line_trick_solve(prob)
    assert result.checks["ok"]
    assert abs(result.point[0] - 10) <= Fraction(1, 2)
    assert abs(result.point[1] + 4) <= Fraction(1, 2)
    assert all(valuation(x - 1, 3) >= 2 for x in result.point)
    for x in result.point:
        assert set(prime_support(x.denominator)) <= {3, 5}


def test_line_trick_is_reproducible():
    targets = {Place(2): ((Fraction(1, 2), 3, 0), 3), REAL: ((0, 0, 7), 1)}
    excluded = (ConstraintPair(LinearForm((1, 0, 0)), LinearForm((0, 1, 0), -3)),)
    prob = PuncturedAffineProblem(3, excluded, frozenset({REAL, Place(2)}), targets, 3)
    assert line_trick_solve(prob).point == line_trick_solve(prob).point


def test_line_trick_preconditions():
    with pytest.raises(DomainError):
        PuncturedAffineProblem(1, (), frozenset({REAL}), {}, 5)
    with pytest.raises(DomainError):
        PuncturedAffineProblem(2, (AXES,), frozenset({REAL, Place(3)}), {Place(3): ((0, 0), 1)}, 5)
    with pytest.raises(DomainError):
        PuncturedAffineProblem(2, (AXES,), frozenset({REAL, Place(3)}), {}, 3)


def test_norm_multiplier_over_gaussian_field(gaussian_field):
    targets = (LocalTarget(Place(2), 2, 3),)
    prob = NormMultiplierProblem(gaussian_field, frozenset({REAL, Place(2)}), targets)
    cert = norm_multiplier_solve(prob)
    assert valuation(cert.t - 2, 2) >= 3
    assert cert.v0 == 5
    assert all(p % 4 == 1 for p in cert.split_primes)
    assert verify_norm_certificate(gaussian_field, cert, prob.S, targets)["ok"]
    assert cert.as_json()["t"] == str(cert.t)


def test_certificate_from_a_known_element(gaussian_field):
    S = frozenset({REAL, Place(2)})
    targets = (LocalTarget(Place(2), 2, 3),)
    cert = NormCertificate.from_element(gaussian_field, (7, 1), S, 13)
    assert cert.t == 50
    assert cert.split_primes == [5]
    checks = verify_norm_certificate(gaussian_field, cert, S, targets)
    assert checks["ok"]
    assert checks["certificate_primes"]
    tampered = NormCertificate.from_element(gaussian_field, (7, 1), S, 13)
    tampered.t = Fraction(51)
    assert not verify_norm_certificate(gaussian_field, tampered, S, targets)["ok"]


def test_norm_multiplier_rejects_non_norm_target(gaussian_field):
    prob = NormMultiplierProblem(gaussian_field, frozenset({REAL, Place(2)}), (LocalTarget(Place(2), -1, 3),))
    assert local_target_verdicts(prob)[Place(2)].kind is Norm.NOT_NORM
    with pytest.raises(DomainError):
        norm_multiplier_solve(prob)


def test_norm_multiplier_with_real_target(gaussian_field):
    targets = (LocalTarget(REAL, 100, 10),)
    cert = norm_multiplier_solve(NormMultiplierProblem(gaussian_field, frozenset({REAL}), targets))
    assert abs(cert.t - 100) <= 10
    assert 2 not in cert.split_primes
    assert verify_norm_certificate(gaussian_field, cert, frozenset({REAL, Place(2)}), targets)["ok"]


def test_w_fiber_verify(gauss):
    by_place = {r.place: r.label for r in w_fiber_verify(gauss, 25, [Place(5), Place(3), REAL])}
    assert by_place == {Place(5): "Yes", Place(3): "Yes", REAL: "Yes"}
    assert w_fiber_verify(gauss, 3, [Place(3)])[0].label == "No"
    assert w_fiber_verify(gauss, -3, ["real"])[0].label == "No"


def test_w_fiber_over_ramified_cubic_is_undetermined():
    inst = parse_instance("entry: P=t^3-2; g=x^2-a; b=1\nS: real\n")
    report = w_fiber_verify(inst, 5, [Place(2)])[0]
    assert report.verdict is Norm.UNDETERMINED



def test_condition2_pass_agrees_with_fiber_points(gauss):
    rng = random.Random(13)
    checked = 0
    for _ in range(200):
        t0 = Fraction(rng.randint(1, 2000), rng.choice([1, 2, 4]))
        items = check_condition2(gauss, t0)
        if not items or any(item.verdict is not DegreeOne.YES for item in items):
            continue
        reports = w_fiber_verify(gauss, t0, sorted({item.prime for item in items}))
        decided = [r for r in reports if r.verdict is not Norm.UNDETERMINED]
        assert all(r.verdict is Norm.IS_NORM for r in decided), t0
        checked += len(decided)
    assert checked > 0
