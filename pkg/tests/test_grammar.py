import pytest
import sympy as sp
from hypothesis import given

from koopres.errors import PolynomialParseError
from koopres.grammar import format_pretty, identifiers, parse_components, parse_polynomial
from koopres.presets import XP_CHART
from koopres.symbolic import MultiPolynomial

from strategies import CHART4, polynomials

x, p = MultiPolynomial.var(XP_CHART, "x"), MultiPolynomial.var(XP_CHART, "p")


@pytest.mark.parametrize("text, expected", [
    ("x*p", x * p),
    ("-0.5*x", x * sp.Rational(-1, 2)),
    ("x^2 + p**2", x**2 + p**2),
    ("(x + i*p)*(x - i*p)", x**2 + p**2),
    ("2i*x - 3", x * 2 * sp.I - 3),
    ("1/3 - .25e1*p", p * sp.Rational(-5, 2) + sp.Rational(1, 3)),
    ("(x+p)^0", MultiPolynomial.const(XP_CHART, 1)),
    ("0", MultiPolynomial.zero(XP_CHART)),
])
def test_parse_examples(text, expected):
    assert parse_polynomial(text, XP_CHART) == expected


def test_decimals_are_exact():
    assert parse_polynomial("0.3*x", XP_CHART).coefficient((1, 0)) == sp.Rational(3, 10)


@pytest.mark.parametrize("text, position", [
    ("x+*p", 2),
    ("x^-1", 2),
    ("x/p", 1),
    ("q*x", 0),
    ("", 0),
    ("x^1.5", 2),
    ("(x+p", 4),
    ("x $ p", 2),
])
def test_parse_errors_carry_position(text, position):
    with pytest.raises(PolynomialParseError) as info:
        parse_polynomial(text, XP_CHART)
    assert info.value.position == position
    assert f"position {position}" in str(info.value)


def test_component_errors_report_offset_in_whole_string():
    with pytest.raises(PolynomialParseError) as info:
        parse_components("x, p^^2", XP_CHART)
    assert info.value.position == 5


def test_components():
    assert parse_components("x, -2*p^2", XP_CHART) == [x, p**2 * -2]


def test_identifiers_in_order():
    assert identifiers("p*x + i*p - y") == ["p", "x", "y"]
    assert parse_polynomial("y^2").chart.names == ("y",)


@given(polynomials(CHART4, 4, 6, complex_coeffs=True))
def test_canonical_text_roundtrip(f):
    assert parse_polynomial(f.to_text(), CHART4) == f


def test_canonical_text_format():
    f = parse_polynomial("(3+2i)*x^2*p - 0.5*x + 1/3", XP_CHART)
    assert f.to_text() == "(1/3+0i) + (-1/2+0i)*x^1 + (3+2i)*x^2*p^1"
    assert format_pretty(f) == "0.333333 - 0.5*x + (3+2i)*x^2*p"
    assert format_pretty(MultiPolynomial.zero(XP_CHART)) == "0"
