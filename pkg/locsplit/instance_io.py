"""Line-oriented instance files.

    # comment
    entry: P=t^2-2; g=x^2-a; b=1
    S: real, 2, 3
    target: v=2 t=5/4 N=3
    target: real t=10 eps=1/10
"""

import logging
import re

import sympy
from sympy.parsing.sympy_parser import (
    convert_xor,
    implicit_multiplication_application,
    parse_expr,
    standard_transformations,
)

from .arith import as_rational
from .conjecture import ConjectureInstance, Entry, LocalTarget
from .errors import DomainError, InstanceParseError, LocsplitError
from .fields import A, T, NumberFieldAbs, RelativeExtension
from .local_symbols import REAL, Place
from .polys import X, PolyOverQ
from .sieve import Y, BinaryTarget, HomogeneousForm
from .strong_approx import ConstraintPair, LinearForm

logger = logging.getLogger(__name__)

TRANSFORMATIONS = standard_transformations + (implicit_multiplication_application, convert_xor)
SYMBOLS = {"t": T, "x": X, "a": A}


def parse_polynomial(text, allowed, line=None, column=None):
    """Sympy expression for `text`, using only the variables named in `allowed`."""
    local = {name: SYMBOLS[name] for name in allowed}
    try:
        expr = parse_expr(text, local_dict=local, transformations=TRANSFORMATIONS)
    except (SyntaxError, TypeError, ValueError, sympy.SympifyError) as e:
        offset = getattr(e, "offset", None)
        col = column + offset - 1 if column is not None and offset else column
        raise InstanceParseError(f"cannot parse polynomial {text!r}", line, col) from e
    stray = {str(s) for s in expr.free_symbols} - set(allowed)
    if stray:
        raise InstanceParseError(f"unexpected variable(s) {sorted(stray)} in {text!r}", line, column)
    if not expr.is_polynomial(*[SYMBOLS[name] for name in allowed]):
        raise InstanceParseError(f"{text!r} is not a polynomial", line, column)
    return sympy.expand(expr)


def parse_poly(text, var="x"):
    return PolyOverQ.from_sympy(parse_polynomial(text, [var]), SYMBOLS[var])


def parse_rational(text, line=None, column=None):
    try:
        return as_rational(text)
    except DomainError as e:
        raise InstanceParseError(str(e), line, column) from e


def parse_places(text, line=None, column=None):
    places = set()
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            places.add(Place.parse(item))
        except DomainError as e:
            raise InstanceParseError(str(e), line, column) from e
    return places


def _fields(body, column):
    """Split 'k=v; k=v' or 'k=v k=v' into {key: (value, column)}."""
    out = {}
    for match in re.finditer(r"(\w+)\s*=\s*([^;]+?)(?=\s*;|\s+\w+\s*=|\s*$)", body):
        out[match.group(1)] = (match.group(2).strip(), column + match.start(2))
    return out


def _build_entry(fields, line):
    for key in ("P", "g", "b"):
        if key not in fields:
            raise InstanceParseError(f"entry is missing {key}=", line)
    (p_text, p_col), (g_text, g_col), (b_text, b_col) = fields["P"], fields["g"], fields["b"]
    P = PolyOverQ.from_sympy(parse_polynomial(p_text, ["t"], line, p_col), T)
    try:
        K = NumberFieldAbs(P)
    except LocsplitError as e:
        raise InstanceParseError(str(e), line, p_col) from e
    try:
        L = RelativeExtension.from_expr(K, parse_polynomial(g_text, ["x", "a"], line, g_col))
    except LocsplitError as e:
        raise InstanceParseError(str(e), line, g_col) from e
    b_poly = PolyOverQ.from_sympy(sympy.Poly(parse_polynomial(b_text, ["a"], line, b_col), A), A)
    try:
        return Entry(L, K.from_poly(b_poly))
    except LocsplitError as e:
        raise InstanceParseError(str(e), line, b_col) from e


def _build_target(body, column, line):
    fields = _fields(body, column)
    head = body.split()[0] if body.split() else ""
    if head.lower() == "real":
        place = REAL
    elif "v" in fields:
        text, col = fields["v"]
        try:
            place = Place.parse(text)
        except DomainError as e:
            raise InstanceParseError(str(e), line, col) from e
    else:
        raise InstanceParseError("target needs v=<prime> or 'real'", line, column)
    if "t" not in fields:
        raise InstanceParseError("target needs t=", line, column)
    key = "eps" if place.is_real else "N"
    if key not in fields:
        raise InstanceParseError(f"target at {place} needs {key}=", line, column)
    t_text, t_col = fields["t"]
    p_text, p_col = fields[key]
    t = parse_rational(t_text, line, t_col)
    precision = parse_rational(p_text, line, p_col)
    try:
        return LocalTarget(place, t, precision)
    except DomainError as e:
        raise InstanceParseError(str(e), line, column) from e


def parse_instance(text):
    entries, places, targets = [], set(), []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if ":" not in line:
            raise InstanceParseError("expected '<keyword>: ...'", number, 1)
        keyword, body = line.split(":", 1)
        column = len(keyword) + 2
        keyword = keyword.strip().lower()
        if keyword == "entry":
            entries.append(_build_entry(_fields(body, column), number))
        elif keyword == "s":
            places |= parse_places(body, number, column)
        elif keyword == "target":
            targets.append(_build_target(body, column, number))
        else:
            raise InstanceParseError(f"unknown keyword {keyword!r}", number, 1)
    if not entries:
        raise InstanceParseError("instance has no entry lines")
    try:
        return ConjectureInstance(tuple(entries), frozenset(places), tuple(targets))
    except DomainError as e:
        raise InstanceParseError(str(e)) from e


def load_instance(path):
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    logger.debug("parsing instance %s", path)
    return parse_instance(text)


# -- command-line values ----------------------------------------------------------

LINEAR_TRANSFORMATIONS = standard_transformations + (convert_xor,)


def parse_element(text, K):
    """Element of K written as a polynomial in a."""
    expr = parse_polynomial(text, ["a"])
    return K.from_poly(PolyOverQ.from_sympy(sympy.Poly(expr, A), A))


def parse_linear_form(text, dimension):
    """Affine-linear form in x1, ..., xn (explicit '*')."""
    names = {f"x{i}": sympy.Symbol(f"x{i}") for i in range(1, dimension + 1)}
    try:
        expr = sympy.expand(parse_expr(text, local_dict=names, transformations=LINEAR_TRANSFORMATIONS))
    except (SyntaxError, TypeError, ValueError, sympy.SympifyError) as e:
        raise InstanceParseError(f"cannot parse linear form {text!r}") from e
    stray = {str(s) for s in expr.free_symbols} - set(names)
    if stray:
        raise InstanceParseError(f"unexpected variable(s) {sorted(stray)} in {text!r}")
    symbols = list(names.values())
    poly = sympy.Poly(expr, *symbols)
    if poly.total_degree() > 1:
        raise InstanceParseError(f"{text!r} is not affine-linear")
    coeffs = tuple(as_rational(poly.coeff_monomial(s)) for s in symbols)
    return LinearForm(coeffs, as_rational(poly.coeff_monomial(1)))


def parse_constraint(text, dimension):
    """'form ; form' -> ConstraintPair."""
    parts = [part for part in text.split(";") if part.strip()]
    if len(parts) != 2:
        raise InstanceParseError(f"constraint {text!r} must be two forms separated by ';'")
    try:
        return ConstraintPair(parse_linear_form(parts[0], dimension), parse_linear_form(parts[1], dimension))
    except DomainError as e:
        raise InstanceParseError(str(e)) from e


def parse_binary_form(text):
    """Homogeneous form in x and y."""
    try:
        expr = parse_expr(text, local_dict={"x": X, "y": Y}, transformations=TRANSFORMATIONS)
    except (SyntaxError, TypeError, ValueError, sympy.SympifyError) as e:
        raise InstanceParseError(f"cannot parse form {text!r}") from e
    try:
        return HomogeneousForm.from_expr(expr)
    except (DomainError, sympy.PolynomialError) as e:
        raise InstanceParseError(str(e)) from e


def _split_spec(text, parts):
    pieces = text.split(":")
    if len(pieces) != parts:
        raise InstanceParseError(f"expected {parts} ':'-separated fields in {text!r}")
    try:
        place = Place.parse(pieces[0])
    except DomainError as e:
        raise InstanceParseError(str(e)) from e
    return place, pieces[1:]


def parse_value_target(text):
    """'v:t:precision', e.g. '2:5/4:3' or 'real:10:1/10'."""
    place, (t, precision) = _split_spec(text, 3)
    try:
        return LocalTarget(place, parse_rational(t), parse_rational(precision))
    except DomainError as e:
        raise InstanceParseError(str(e)) from e


def parse_point_target(text):
    """'v:x1,...,xn:precision' -> (place, point, precision)."""
    place, (point, precision) = _split_spec(text, 3)
    return place, tuple(parse_rational(x) for x in point.split(",")), parse_rational(precision)


def parse_binary_target(text):
    """'v:lam,mu:precision'."""
    place, (pair, precision) = _split_spec(text, 3)
    values = [parse_rational(x) for x in pair.split(",")]
    if len(values) != 2:
        raise InstanceParseError(f"expected lam,mu in {text!r}")
    try:
        return BinaryTarget(place, values[0], values[1], parse_rational(precision))
    except DomainError as e:
        raise InstanceParseError(str(e)) from e


def apply_precision(inst, spec):
    """Override target precisions from 'v:precision,v:precision'."""
    overrides = {}
    for item in spec.split(","):
        if not item.strip():
            continue
        place, (precision,) = _split_spec(item.strip(), 2)
        overrides[place] = parse_rational(precision)
    targets = []
    for target in inst.targets:
        precision = overrides.pop(target.place, target.precision)
        targets.append(LocalTarget(target.place, target.value, precision))
    if overrides:
        raise InstanceParseError(f"--precision names places without a target: {sorted(str(v) for v in overrides)}")
    return ConjectureInstance(inst.entries, inst.S, tuple(targets))
