from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sal import params as P
from sal.adjoint import adjoint, check_power_law_family, strict_self_adjointness, unified_family
from sal.equations import EquationSpec, b_equation, bbm, camassa_holm, formal_lagrangian, novikov
from sal.grammar import parse_expr
from sal.jet import JetExpr, substitute_dependent

E = parse_expr


class TestFormalLagrangian:
    def test_trivial_member(self):
        spec = EquationSpec.from_functions(0, JetExpr(), JetExpr(), JetExpr())
        assert formal_lagrangian(spec) == E("v*u_t")

    def test_camassa_holm(self):
        expect = E("v*(u_t - u_txx + 3*u*u_x - 2*u_x*u_xx - u*u_xxx)")
        assert formal_lagrangian(camassa_holm()) == expect


class TestAdjoint:
    def test_transport(self):
        spec = EquationSpec.from_functions(0, JetExpr.formal("f"), JetExpr(), JetExpr())
        assert adjoint(spec) == E("-v_t - f*v_x")

    def test_linear_third_order(self):
        spec = EquationSpec.from_functions(0, JetExpr(), JetExpr(), JetExpr.const(1))
        assert adjoint(spec) == E("-v_t - v_xxx")

    def test_substituted_formal(self):
        lhs = substitute_dependent(adjoint(EquationSpec.formal()))
        expect = E(
            "-u_t - eps*u_txx - h*u_xxx - f*u_x"
            " + u_x^3*(u*g'' - u*h''' + 2*g' - 3*h'')"
            " + u_x*u_xx*(3*u*g' - 3*u*h'' - 6*h' + 2*g)"
        )
        assert lhs == expect


class TestStrictSelfAdjointness:
    def test_formal(self):
        verdict = strict_self_adjointness(EquationSpec.formal())
        assert verdict.multiplier == JetExpr.const(-1)
        assert sorted(map(str, verdict.conditions)) == sorted(
            map(str, [E("3*g + 3*u*g' - 6*h' - 3*u*h''"), E("2*g' + u*g'' - 3*h'' - u*h'''")])
        )
        assert verdict.required_g == E("c*u^-1 + u^-1*h + h'")

    @pytest.mark.parametrize("spec", [camassa_holm(), novikov(), bbm()])
    def test_named_members(self, spec):
        verdict = strict_self_adjointness(spec)
        assert verdict.is_ssa and verdict.c_value == P.ZERO
        assert verdict.multiplier == JetExpr.const(-1)

    def test_b_equation(self):
        assert strict_self_adjointness(b_equation(2)).is_ssa
        assert not strict_self_adjointness(b_equation(3)).is_ssa
        (cond,) = strict_self_adjointness(b_equation()).conditions
        assert cond == E("-B + 2")

    def test_dispersionless_f(self):
        spec = EquationSpec.from_functions(0, E("u^3 + ln(u)"), JetExpr(), JetExpr())
        verdict = strict_self_adjointness(spec)
        assert verdict.is_ssa and verdict.c_value == P.ZERO

    def test_linear_dispersion_constant(self):
        # h = -u + k with g = -2 needs g = (u h)'/u + c/u, i.e. c = -k
        spec = EquationSpec.from_functions(-1, E("3*u"), E("-2"), E("-u + 1"))
        verdict = strict_self_adjointness(spec)
        assert verdict.is_ssa and verdict.c_value == P.to_param(-1)

    @pytest.mark.parametrize(
        "g, h",
        [("-2", "-u"), ("-3*u", "-u^2"), ("3*u^-1 + 2*ln(u) + 1", "u*ln(u)"), ("-u^(b - 1)*(b + 1)", "-u^b")],
    )
    def test_closure(self, g, h):
        spec = EquationSpec.from_functions("eps", E("gamma*u^2"), E(g), E(h))
        assert (substitute_dependent(adjoint(spec)) + spec.equation()).is_zero
        assert strict_self_adjointness(spec).is_ssa


class TestPowerLawFamily:
    def test_examples(self):
        delta = P.param("delta")
        assert check_power_law_family(2, 3 * delta, delta).is_ssa
        v0 = check_power_law_family(0, "sigma", "delta")
        assert v0.is_ssa and v0.c_value == P.param("sigma") - delta
        v1 = check_power_law_family(1, 3 * delta, delta)
        assert not v1.is_ssa and v1.conditions == [E("delta")]

    def test_symbolic_special_case(self):
        verdict = check_power_law_family()
        assert not verdict.is_ssa
        assert set(verdict.special_cases) == {0}
        assert verdict.special_cases[0].is_ssa

    @settings(max_examples=50, deadline=None)
    @given(
        st.fractions(min_value=-3, max_value=3, max_denominator=3),
        st.fractions(min_value=-4, max_value=4, max_denominator=5),
        st.fractions(min_value=-4, max_value=4, max_denominator=5),
        st.booleans(),
    )
    def test_agrees_with_direct_check(self, b, sigma, delta, on_family):
        if on_family:
            sigma = (b + 1) * delta
        fam = check_power_law_family(b, sigma, delta)
        direct = strict_self_adjointness(EquationSpec.power_law(-1, b, 1, sigma, delta))
        assert fam.is_ssa == direct.is_ssa
        if b != 0:
            assert fam.is_ssa == (sigma == (b + 1) * delta)
        else:
            assert fam.is_ssa and fam.c_value == P.to_param(Fraction(sigma - delta))


class TestUnifiedFamily:
    def test_members(self):
        assert unified_family(1) == camassa_holm()
        assert unified_family(2) == novikov()

    def test_symbolic(self):
        assert strict_self_adjointness(unified_family()).is_ssa
