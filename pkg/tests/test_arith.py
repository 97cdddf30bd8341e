from fractions import Fraction

import pytest

from locsplit.arith import (
    INFINITY,
    CongruenceSystem,
    as_rational,
    crt_solve,
    factor,
    factor_integer,
    height,
    is_rational_square,
    rational_residue,
    strip_primes,
    use_factor_cache,
    valuation,
)
from locsplit.cache import FactorCache
from locsplit.errors import DomainError


def test_as_rational_accepts_common_spellings():
    assert as_rational("13/4") == Fraction(13, 4)
    assert as_rational(7) == Fraction(7)
    assert as_rational(Fraction(-1, 3)) == Fraction(-1, 3)
    with pytest.raises(DomainError):
        as_rational("thirteen")
    with pytest.raises(DomainError):
        as_rational(True)


def test_factor_of_a_rational():
    f = factor(Fraction(-45, 8))
    assert f.sign == -1
    assert f.factors == ((2, -3), (3, 2), (5, 1))
    assert f.value() == Fraction(-45, 8)
    assert f.primes == (2, 3, 5)
    assert f.exponent(7) == 0


def test_factor_rejects_zero():
    with pytest.raises(DomainError):
        factor(0)


def test_valuation():
    assert valuation(Fraction(45, 8), 2) == -3
    assert valuation(45, 3) == 2
    assert valuation(45, 7) == 0
    assert valuation(0, 5) is INFINITY
    assert INFINITY > 10**9
    with pytest.raises(DomainError):
        valuation(4, 6)


def test_height_and_squares():
    assert height(Fraction(-13, 4)) == 13
    assert height(Fraction(1, 9)) == 9
    assert is_rational_square(Fraction(9, 4))
    assert not is_rational_square(-4)
    assert not is_rational_square(8)


def test_rational_residue_and_strip_primes():
    assert rational_residue(Fraction(1, 3), 8) == 3
    with pytest.raises(DomainError):
        rational_residue(Fraction(1, 2), 8)
    assert strip_primes(-360, [2, 3]) == ({2: 3, 3: 2}, 5)


def test_crt_solve():
    residue, modulus = crt_solve(CongruenceSystem.from_pairs([(8, 1), (9, 4), (5, 2)]))
    assert modulus == 360
    assert residue % 8 == 1 and residue % 9 == 4 and residue % 5 == 2
    assert crt_solve(CongruenceSystem()) == (0, 1)


def test_crt_rejects_bad_moduli():
    with pytest.raises(DomainError):
        CongruenceSystem.from_pairs([(6, 1)])
    with pytest.raises(DomainError):
        crt_solve(CongruenceSystem.from_pairs([(4, 1), (8, 3)]))


def test_factor_cache_round_trip(tmp_path):
    path = tmp_path / "factors.jsonl"
    cache = FactorCache(str(path))
    use_factor_cache(cache)
    try:
        assert factor_integer(2**4 * 3 * 101) == {2: 4, 3: 1, 101: 1}
    finally:
        use_factor_cache(None)
    reloaded = FactorCache(str(path))
    assert len(reloaded) == 1
    assert reloaded.get(2**4 * 3 * 101) == {2: 4, 3: 1, 101: 1}


def test_factor_cache_drops_corrupt_lines(tmp_path):
    path = tmp_path / "factors.jsonl"
    path.write_text(
        '{"n": "12", "factors": [["2", 2], ["3", 1]]}\n'
        '{"n": "15", "factors": [["3", 1], ["7", 1]]}\n'
        '{"n": "21", "factors": [["21", 1]]}\n'
        "not json\n"
    )
    cache = FactorCache(str(path))
    assert len(cache) == 1
    assert cache.dropped == 3
    assert cache.get(15) is None
