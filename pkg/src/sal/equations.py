"""Equation specifications for u_t + eps u_txx + f u_x + g u_x u_xx + h u_xxx = 0."""

from dataclasses import dataclass, field, replace
from typing import Optional

from . import params as P
from .errors import SpecError
from .jet import JetExpr, V, var

U_T = var("u_t")
U_X = var("u_x")
U_XX = var("u_xx")
U_XXX = var("u_xxx")
U_TXX = var("u_txx")


def u_to(exponent, shift=0):
    """u^(exponent + shift) for an exponent that is affine in b."""
    aff = P.affine_in_b(P.to_param(exponent))
    if aff is None:
        raise SpecError(f"exponent {exponent} is not of the form q + n*b")
    q, n = aff
    return JetExpr.u_power(q + shift, n)


@dataclass(frozen=True)
class PowerLaw:
    """f = gamma u^b, g = sigma u^(b-1), h = delta u^b."""

    b: P.ParamExpr
    gamma: P.ParamExpr
    sigma: P.ParamExpr
    delta: P.ParamExpr
    beta: Optional[P.ParamExpr] = None
    c: Optional[P.ParamExpr] = None


@dataclass(frozen=True)
class EquationSpec:
    epsilon: P.ParamExpr
    f: JetExpr
    g: JetExpr
    h: JetExpr
    # the power-law view is derived data and does not take part in equality
    power: Optional[PowerLaw] = field(default=None, compare=False)
    name: str = field(default="", compare=False)

    def __post_init__(self):
        for label in ("f", "g", "h"):
            value = getattr(self, label)
            if not isinstance(value, JetExpr):
                object.__setattr__(self, label, JetExpr.coerce(value))
            elif not value.is_ucoeff:
                raise SpecError(f"{label} must be a function of u only, got {value}")
        object.__setattr__(self, "epsilon", P.to_param(self.epsilon))
        if self.power is not None:
            pw = self.power
            expect = (
                u_to(pw.b) * pw.gamma,
                u_to(pw.b, -1) * pw.sigma,
                u_to(pw.b) * pw.delta,
            )
            if (self.f, self.g, self.h) != expect:
                raise SpecError("power-law parameters disagree with f, g, h")

    # constructors ------------------------------------------------------
    @classmethod
    def formal(cls, epsilon="eps"):
        """Class member with unspecified f, g, h."""
        return cls(P.to_param(epsilon), JetExpr.formal("f"), JetExpr.formal("g"), JetExpr.formal("h"), name="formal")

    @classmethod
    def from_functions(cls, epsilon, f, g, h, name=""):
        return cls(P.to_param(epsilon), JetExpr.coerce(f), JetExpr.coerce(g), JetExpr.coerce(h), name=name)

    @classmethod
    def power_law(cls, epsilon="eps", b="b", gamma="gamma", sigma="sigma", delta="delta", name=""):
        b, gamma, sigma, delta = (P.to_param(x) for x in (b, gamma, sigma, delta))
        pw = PowerLaw(b, gamma, sigma, delta)
        return cls(P.to_param(epsilon), u_to(b) * gamma, u_to(b, -1) * sigma, u_to(b) * delta, pw, name=name)

    @classmethod
    def ssa_family(cls, epsilon="eps", b="b", gamma="gamma", beta="beta", c=0, name=""):
        """Scale-invariant strictly self-adjoint members.

        For b != 0 this is u_t + eps u_txx + gamma u^b u_x = (b+1) beta u^(b-1) u_x u_xx
        + beta u^b u_xxx; for b = 0 the right-hand side is
        beta u_x u_xx / u + (beta - c) u_xxx.
        """
        b, gamma, beta, c = (P.to_param(x) for x in (b, gamma, beta, c))
        if b == P.ZERO:
            sigma, delta = -beta, c - beta
        else:
            if c != P.ZERO:
                raise SpecError("the constant c must vanish when b != 0")
            sigma, delta = -(b + 1) * beta, -beta
        spec = cls.power_law(epsilon, b, gamma, sigma, delta, name=name)
        return replace(spec, power=replace(spec.power, beta=beta, c=c))

    # views -------------------------------------------------------------
    def equation(self):
        """The left-hand side F as a jet expression."""
        return U_T + U_TXX * self.epsilon + self.f * U_X + self.g * U_X * U_XX + self.h * U_XXX

    @property
    def is_formal(self):
        return any(x.has_formal for x in (self.f, self.g, self.h))

    def free_params(self):
        names = P.free_params(self.epsilon)
        for x in (self.f, self.g, self.h):
            names |= x.free_params()
        return names

    def subs(self, values):
        """Specialise parameters (a value for b must be rational)."""
        pw = None
        if self.power is not None:
            pw = PowerLaw(
                *(None if x is None else P.substitute(x, values) for x in (
                    self.power.b, self.power.gamma, self.power.sigma, self.power.delta,
                    self.power.beta, self.power.c))
            )
        return EquationSpec(
            P.substitute(self.epsilon, values),
            self.f.subs_params(values),
            self.g.subs_params(values),
            self.h.subs_params(values),
            pw,
            name=self.name,
        )

    def instantiate(self, **functions):
        """Replace formal f, g, h (given as keyword expressions)."""
        return EquationSpec(
            self.epsilon,
            self.f.instantiate(functions),
            self.g.instantiate(functions),
            self.h.instantiate(functions),
            name=self.name,
        )


def formal_lagrangian(spec):
    """v * F in canonical form.

    The symmetrised eps (u_txx + u_xtx + u_xxt)/3 term collapses to eps u_txx
    because mixed partials are identified; component formulas that need the
    three orderings separately weight each ordered derivative by the inverse
    number of orderings (see :func:`sal.currents.ordered_partial`).
    """
    return V * spec.equation()


# named members -------------------------------------------------------------


def camassa_holm():
    return EquationSpec.ssa_family(-1, 1, 3, 1, name="Camassa-Holm")


def novikov():
    return EquationSpec.ssa_family(-1, 2, 4, 1, name="Novikov")


def bbm(gamma=-1):
    """u_t - u_txx + gamma u u_x = 0; gamma = -1 is u_t = u_txx + u u_x."""
    return EquationSpec.ssa_family(-1, 1, gamma, 0, name="Benjamin-Bona-Mahony")


def riemann(b="b", gamma="gamma"):
    return EquationSpec.ssa_family(0, b, gamma, 0, name="Riemann")


def b_equation(B="B"):
    """u_t - u_txx + (B+1) u u_x = B u_x u_xx + u u_xxx."""
    B = P.to_param(B)
    return EquationSpec.power_law(-1, 1, B + 1, -B, -1, name="b-equation")
