import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sal import params as P
from sal.equations import EquationSpec, bbm, camassa_holm, novikov
from sal.errors import OrderOverflowError
from sal.grammar import parse_expr
from sal.jet import DerivIndex, JetExpr, U, total_derivative, var
from sal.symmetry import (
    Generator,
    classify_scaling,
    invariance_residual,
    prolong,
    scaling,
    scaling_exponent,
    translation,
)

E = parse_expr


def zeta(pg, name):
    dep, _, orders = name.partition("_")
    return pg.zeta[DerivIndex(dep, orders.count("t"), orders.count("x"))]


class TestProlong:
    def test_scaling_third_extension(self):
        pg = prolong(scaling(), 3)
        assert zeta(pg, "u_t") == E("(b + 1)*u_t")
        for name in ("u_x", "u_xx", "u_xxx"):
            assert zeta(pg, name) == var(name)
        assert zeta(pg, "u_txx") == E("(b + 1)*u_txx")

    @pytest.mark.parametrize("axis", "tx")
    def test_translation(self, axis):
        pg = prolong(translation(axis), 4)
        assert all(z.is_zero for z in pg.zeta.values())

    def test_dilation_in_u(self):
        pg = prolong(Generator(JetExpr(), JetExpr(), U), 2)
        for idx, z in pg.zeta.items():
            assert z == JetExpr.var("u", idx.t_order, idx.x_order)

    def test_order_bounds(self):
        with pytest.raises(OrderOverflowError):
            prolong(scaling(), 0)
        with pytest.raises(OrderOverflowError):
            prolong(scaling(), 99)

    @pytest.mark.parametrize(
        "X",
        [Generator(E("2*t + 1"), E("3*t"), E("u^2")), scaling(-2), scaling()],
        ids=["affine", "X_-2", "X_b"],
    )
    def test_recursion_property(self, X):
        pg = prolong(X, 3)
        for idx, z in pg.zeta.items():
            if idx.order == 3:
                continue
            for axis in "tx":
                child = idx.shifted(axis)
                if child not in pg.zeta:
                    continue
                expect = total_derivative(z, axis)
                for m in "tx":
                    nxt = idx.shifted(m)
                    expect = expect - total_derivative(X.coefficient(m), axis) * JetExpr.var("u", nxt.t_order, nxt.x_order)
                assert pg.zeta[child] == expect


class TestInvariance:
    def test_scaling_on_formal_class(self):
        res = invariance_residual(scaling(), EquationSpec.formal())
        assert res.multiplier == E("b + 1")
        expected = [E("u*f' + f - (b + 1)*f"), E("u*g' + 2*g - (b + 1)*g"), E("u*h' + h - (b + 1)*h")]
        assert sorted(map(str, res.conditions)) == sorted(map(str, expected))

    @pytest.mark.parametrize("axis", "tx")
    @pytest.mark.parametrize("spec", [camassa_holm(), novikov(), bbm(), EquationSpec.formal()])
    def test_translations(self, axis, spec):
        res = invariance_residual(translation(axis), spec)
        assert res.is_symmetry and res.multiplier.is_zero

    def test_camassa_holm_scaling(self):
        ch = EquationSpec.from_functions(-1, E("3*u"), E("-2"), E("-u"))
        res = invariance_residual(scaling(1), ch)
        assert res.is_symmetry and res.multiplier == JetExpr.const(2)

    def test_wrong_scaling_reports_conditions(self):
        res = invariance_residual(scaling(2), camassa_holm())
        assert not res.is_symmetry and res.conditions


class TestClassifyScaling:
    def test_generic(self):
        family = classify_scaling()
        assert (family.spec.f, family.spec.g, family.spec.h) == (E("gamma*u^b"), E("sigma*u^(b - 1)"), E("delta*u^b"))

    def test_bbm_member(self):
        member = classify_scaling(1).spec.subs({"sigma": 0, "delta": 0, "gamma": -1, "eps": -1})
        assert member.equation() == bbm().equation()

    @settings(max_examples=25, deadline=None)
    @given(st.fractions(min_value=-4, max_value=4, max_denominator=4))
    def test_soundness(self, b):
        family = classify_scaling(b)
        res = invariance_residual(scaling(b), family.spec)
        assert res.is_symmetry
        assert res.multiplier == JetExpr.const(P.to_param(b) + 1)

    def test_symbolic_soundness(self):
        res = invariance_residual(scaling(), classify_scaling().spec)
        assert res.is_symmetry and res.multiplier == E("b + 1")


def test_scaling_exponent():
    assert scaling_exponent(camassa_holm()) == P.to_param(1)
    assert scaling_exponent(novikov()) == P.to_param(2)
    explicit = EquationSpec.from_functions(-1, E("4*u^2"), E("-3*u"), E("-u^2"))
    assert scaling_exponent(explicit) == P.to_param(2)
    mixed = EquationSpec.from_functions(0, E("u + u^2"), E("0"), E("0"))
    assert scaling_exponent(mixed) is None
