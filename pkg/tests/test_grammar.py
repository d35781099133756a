import re
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from strategies import expressions

from sal import params as P
from sal.equations import EquationSpec, b_equation, camassa_holm, novikov, riemann
from sal.errors import ParseError, SpecError
from sal.grammar import format_expr, format_spec, parse_document, parse_expr, parse_spec, tokenize
from sal.jet import JetExpr


class TestParseExpr:
    def test_linear(self):
        e = parse_expr("3*u")
        ((key, c),) = e.terms()
        assert key.uexp == (1, 0) and c == P.to_param(3)

    def test_symbolic_exponent(self):
        ((key, c),) = parse_expr("gamma*u^b").terms()
        assert key.uexp == (0, 1) and c == P.param("gamma")

    def test_merge(self):
        assert parse_expr("2*u + u") == parse_expr("3*u")

    def test_affine_exponents(self):
        assert parse_expr("u^(b - 1)*u") == parse_expr("u^b")
        assert parse_expr("u^(2*b + 1/2)").terms()[0][0].uexp == (Fraction(1, 2), 2)

    def test_rational_and_negative_exponent(self):
        assert parse_expr("u^-1*u") == JetExpr.const(1)
        assert parse_expr("1/2*u^-3/2") == parse_expr("1/2*u^(-3/2)")

    def test_parameter_expression_power(self):
        assert parse_expr("(b + 2)^-1*(b + 2)") == JetExpr.const(1)

    def test_jet_variables_and_formals(self):
        assert parse_expr("u_xt") == parse_expr("u_tx")
        assert parse_expr("v*g''").has_v
        assert parse_expr("h'''").has_formal

    def test_log(self):
        e = parse_expr("ln(u)^2")
        assert e.terms()[0][0].log == 2

    def test_unary_minus(self):
        assert parse_expr("-u + u") == JetExpr()
        assert parse_expr("2*-u") == parse_expr("-2*u")


class TestErrors:
    @pytest.mark.parametrize(
        "text",
        ["3*", "u +* u", "(u", "u)", "u^u", "u^(b*b)", "2 u", "u_y", "ln(v)", "sin(u)", "3.5*u", "u/2", "x"],
    )
    def test_spans_inside_input(self, text):
        with pytest.raises(ParseError) as info:
            parse_expr(text)
        span = info.value.span
        assert 0 <= span.start <= span.end <= len(text)

    def test_unknown_character_position(self):
        with pytest.raises(ParseError) as info:
            parse_expr("u + $")
        assert info.value.span.start == 4
        assert info.value.span.column == 5

    def test_line_numbers_in_documents(self):
        with pytest.raises(ParseError) as info:
            parse_spec("epsilon: -1\nf: 3*u +\ng: 0\nh: 0\n")
        assert info.value.span.line == 2


def _spaced(text, seed):
    """Insert whitespace between every pair of tokens."""
    toks = [t.text for t in tokenize(text) if t.kind != "eof"]
    pads = [" ", "  ", "\t", "\n", ""]
    return "".join(tok + pads[(seed + i) % len(pads)] for i, tok in enumerate(toks))


@settings(max_examples=60, deadline=None)
@given(expressions(), st.integers(0, 4))
def test_whitespace_insensitive(e, seed):
    text = format_expr(e)
    assert parse_expr(_spaced(text, seed)) == e


@settings(max_examples=100, deadline=None)
@given(expressions())
def test_round_trip(e):
    assert parse_expr(format_expr(e)) == e


def test_format_is_plain_ascii():
    text = format_expr(parse_expr("2*gamma*(b + 2)^-1*u^(b + 2) - 2*beta*u^(b + 1)*u_xx + ln(u)"))
    assert re.fullmatch(r"[ -~]+", text)


class TestParseSpec:
    def test_power_law_keys(self):
        assert parse_spec("epsilon: -1\nb: 1\ngamma: 3\nbeta: 1\n") == camassa_holm()

    def test_explicit_keys(self):
        spec = parse_spec('epsilon: -1\nf: 4*u^2\ng: -3*u\nh: -1*u^2\n')
        assert spec == novikov()

    def test_inconsistent(self):
        with pytest.raises(SpecError, match="inconsistent"):
            parse_spec("epsilon: -1\nb: 1\ngamma: 3\nbeta: 1\nf: 5*u\n")

    def test_consistent_dual(self):
        assert parse_spec("epsilon: -1\nb: 1\ngamma: 3\nbeta: 1\nf: 3*u\n") == camassa_holm()

    def test_sigma_delta_form(self):
        text = "epsilon: -1\nb: 1\ngamma: B + 1\nsigma: -B\ndelta: -1\n"
        assert parse_spec(text) == b_equation()

    def test_comments_and_blank_lines(self):
        text = "# Camassa-Holm\n\nname: CH\nepsilon: -1  # dispersion\nb: 1\ngamma: 3\nbeta: 1\n"
        assert parse_spec(text).name == "CH"

    @pytest.mark.parametrize(
        "text, message",
        [
            ("f: u\ng: 0\nh: 0\n", "epsilon"),
            ("epsilon: 0\nf: u\ng: 0\n", "h"),
            ("epsilon: 0\nb: 1\nbeta: 1\n", "gamma"),
            ("epsilon: 0\nb: 1\ngamma: 1\n", "beta"),
            ("epsilon: 0\nf: u\ng: 0\nh: 0\nmu: 1\n", "unknown key"),
            ("epsilon: 0\nf: u_x\ng: 0\nh: 0\n", "function of u"),
            ("epsilon: 0\nb: 2\ngamma: 1\nbeta: 1\nc: 1\n", "c must vanish"),
        ],
    )
    def test_invalid(self, text, message):
        with pytest.raises(SpecError, match=message):
            parse_spec(text)

    def test_duplicate_key(self):
        with pytest.raises(ParseError, match="duplicate"):
            parse_document("epsilon: 0\nepsilon: 1\n")

    def test_non_constant_parameter(self):
        with pytest.raises(ParseError, match="constant"):
            parse_spec("epsilon: u\nf: u\ng: 0\nh: 0\n")

    @pytest.mark.parametrize(
        "spec",
        [
            camassa_holm(),
            riemann(),
            b_equation(),
            EquationSpec.ssa_family("eps", 0, "gamma", "beta", "c", name="b = 0"),
            EquationSpec.formal(),
            EquationSpec.from_functions(-1, parse_expr("u^-1*ln(u)"), parse_expr("2"), parse_expr("u")),
        ],
    )
    def test_round_trip(self, spec):
        back = parse_spec(format_spec(spec))
        assert back == spec
        assert back.equation() == spec.equation()
