"""Adjoint equations and strict self-adjointness of the class."""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import params as P
from .equations import EquationSpec, formal_lagrangian
from .errors import NotIntegrableError
from .jet import ONE_KEY, DerivIndex, JetExpr, U, integrate_u, match_multiple, substitute_dependent, variational_derivative

_UT = ((DerivIndex("u", 1, 0), 1),)
_UX_UXX = ((DerivIndex("u", 0, 1), 1), (DerivIndex("u", 0, 2), 1))


def adjoint(spec):
    """F* = delta(v F)/delta u."""
    return variational_derivative(formal_lagrangian(spec), "u")


@dataclass
class SsaVerdict:
    is_ssa: bool
    multiplier: JetExpr
    conditions: list
    c_value: Optional[P.ParamExpr] = None
    # formal specs: the expression g has to equal, with integration constant c
    required_g: Optional[JetExpr] = None
    special_cases: dict = field(default_factory=dict)


def _split_constant(r):
    """Split r(u) into its u-independent part and the remaining power groups."""
    const = P.ZERO
    groups = []
    for key, c in r.terms():
        if key == ONE_KEY:
            const = c
        else:
            groups.append(JetExpr.const(c))
    return const, groups


def _solve_for_g(integrated):
    """Rewrite ``alpha u g + R = alpha c`` as g = -R/(alpha u) + c/u."""
    rest = integrated.instantiate({"g": JetExpr()})
    lead = integrated - rest
    ((key, alpha),) = lead.terms()
    if key.formal != ((("g", 0), 1),) or key.uexp != (1, 0) or key.jet or key.log:
        raise ValueError(f"integrated condition {integrated} is not linear in u*g")
    inv_u = JetExpr.u_power(-1)
    return (-rest * inv_u).scale(1 / alpha) + inv_u * P.param("c")


def strict_self_adjointness(spec):
    """Decide whether F*|_{v=u} = lambda F.

    The multiplier is read from the u_t coefficient.  For formal f, g, h the
    residual coefficient conditions are returned along with the form of g they
    integrate to.  For concrete coefficients the constant c in
    u g - (u h)' = c is recovered, and every non-constant part of the left-hand
    side becomes a parameter condition.
    """
    F = spec.equation()
    on_u = substitute_dependent(adjoint(spec))
    m = match_multiple(on_u, F)
    if spec.is_formal:
        if m is None:
            return SsaVerdict(False, JetExpr(), [])
        mixed = on_u.coefficient(_UX_UXX) - m.multiplier * F.coefficient(_UX_UXX)
        try:
            required = _solve_for_g(integrate_u(mixed))
        except (NotIntegrableError, ValueError):
            required = None
        return SsaVerdict(not m.conditions, m.multiplier, m.conditions, required_g=required)

    lam = on_u.coefficient(_UT)
    r = U * spec.g - (U * spec.h).diff_u()
    c, groups = _split_constant(r)
    return SsaVerdict(not groups, lam, groups, c_value=c if not groups else None)


def _collisions(exponents):
    """Values of b at which two distinct affine exponents q + n b coincide."""
    values = set()
    exps = list(exponents)
    for i, (q1, n1) in enumerate(exps):
        for q2, n2 in exps[i + 1:]:
            if n1 != n2:
                values.add(Fraction(q2 - q1) / (n1 - n2))
    return sorted(values)


def check_power_law_family(b="b", sigma="sigma", delta="delta", epsilon="eps", gamma="gamma"):
    """Strict self-adjointness of u_t + eps u_txx + gamma u^b u_x + sigma u^(b-1) u_x u_xx + delta u^b u_xxx.

    With symbolic b the generic verdict is returned and the exceptional values
    of b (where two powers of u merge) are analysed separately in
    ``special_cases``.
    """
    spec = EquationSpec.power_law(epsilon, b, gamma, sigma, delta)
    verdict = strict_self_adjointness(spec)
    if "b" in P.free_params(P.to_param(b)):
        r = U * spec.g - (U * spec.h).diff_u()
        exps = {key.uexp for key, _ in r.terms()} | {(Fraction(0), 0)}
        for value in _collisions(exps):
            sub = {"b": value}
            verdict.special_cases[value] = strict_self_adjointness(
                EquationSpec.power_law(
                    P.substitute(P.to_param(epsilon), sub), value,
                    P.substitute(P.to_param(gamma), sub),
                    P.substitute(P.to_param(sigma), sub),
                    P.substitute(P.to_param(delta), sub),
                )
            )
    return verdict


def unified_family(b="b"):
    """u_t - u_txx + (b+2) u^b u_x = (b+1) u^(b-1) u_x u_xx + u^b u_xxx."""
    b = P.to_param(b)
    return EquationSpec.ssa_family(-1, b, b + 2, 1, name="unified")
