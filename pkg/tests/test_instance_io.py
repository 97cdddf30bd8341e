from fractions import Fraction

import pytest

from conftest import instance_path
from locsplit.errors import InfeasibleAtPrecision, InstanceParseError
from locsplit.instance_io import (
    apply_precision,
    load_instance,
    parse_binary_target,
    parse_instance,
    parse_linear_form,
    parse_point_target,
    parse_value_target,
)
from locsplit.local_symbols import REAL, Place


def test_load_gauss_instance():
    inst = load_instance(instance_path("gauss.inst"))
    assert inst.n == 1
    assert inst.finite_primes == [2]
    assert inst.targets == ()


def test_load_instance_with_targets():
    inst = load_instance(instance_path("gauss-targets.inst"))
    assert inst.target_at(Place(2)).value == 1
    assert inst.real_target.precision == 10


def test_conflicting_instance_file():
    with pytest.raises(InfeasibleAtPrecision):
        load_instance(instance_path("empty-S-conflict.inst"))


def test_parse_errors_carry_positions():
    with pytest.raises(InstanceParseError) as info:
        parse_instance("# header\nentry: P=t^2-2; g=x^2-a; b=1\nbogus: 1\n")
    assert (info.value.line, info.value.column) == (3, 1)

    with pytest.raises(InstanceParseError) as info:
        parse_instance("entry: P=t^2-2; g=x^2-a; b=z\n")
    assert info.value.line == 1
    assert info.value.column is not None

    with pytest.raises(InstanceParseError) as info:
        parse_instance("entry: P=t^2-2; g=x^2-a\n")
    assert "b=" in str(info.value)


def test_reducible_polynomial_is_a_parse_error():
    with pytest.raises(InstanceParseError):
        parse_instance("entry: P=t^2-4; g=x^2+1; b=1\n")


def test_target_lines():
    inst = parse_instance("entry: P=t; g=x^2+1; b=1\nS: real, 2, 5\ntarget: v=5 t=1/2 N=2\ntarget: real t=-3 eps=1/10\n")
    assert inst.target_at(Place(5)).value == Fraction(1, 2)
    assert inst.real_target.precision == Fraction(1, 10)
    with pytest.raises(InstanceParseError):
        parse_instance("entry: P=t; g=x^2+1; b=1\nS: real, 2\ntarget: v=2 t=1\n")


def test_target_outside_s_is_rejected():
    with pytest.raises(InstanceParseError):
        parse_instance("entry: P=t; g=x^2+1; b=1\nS: real\ntarget: v=7 t=1 N=1\n")


def test_command_line_values():
    target = parse_value_target("2:5/4:3")
    assert (target.place, target.value, target.precision) == (Place(2), Fraction(5, 4), 3)
    assert parse_point_target("real:1,-2:1/10") == (REAL, (1, -2), Fraction(1, 10))
    assert parse_binary_target("3:1,2:4").mu == 2
    with pytest.raises(InstanceParseError):
        parse_value_target("2:5/4")
    form = parse_linear_form("2*x1 - x3 + 1/2", 3)
    assert form.coeffs == (2, 0, -1)
    assert form.constant == Fraction(1, 2)
    with pytest.raises(InstanceParseError):
        parse_linear_form("x1*x2", 2)


def test_apply_precision():
    inst = load_instance(instance_path("gauss-targets.inst"))
    tightened = apply_precision(inst, "2:5,real:1")
    assert tightened.target_at(Place(2)).precision == 5
    assert tightened.real_target.precision == 1
    with pytest.raises(InstanceParseError):
        apply_precision(inst, "3:2")
