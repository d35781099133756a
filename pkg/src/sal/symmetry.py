"""Point-symmetry prolongation and the scaling classification of the class."""

from dataclasses import dataclass, field
from typing import Optional

from . import params as P
from .equations import EquationSpec
from .errors import DegenerateMatchError, OrderOverflowError, SpecError
from .jet import DerivIndex, JetExpr, T, U, match_multiple, max_jet_order, total_derivative, var


@dataclass(frozen=True)
class Generator:
    """X = tau d/dt + xi d/dx + eta d/du with tau, xi in {a t + const}, eta = eta(u)."""

    tau: JetExpr
    xi: JetExpr
    eta: JetExpr
    name: str = field(default="", compare=False)

    def __post_init__(self):
        for label in ("tau", "xi", "eta"):
            object.__setattr__(self, label, JetExpr.coerce(getattr(self, label)))
        if self.tau.jet_vars() or self.xi.jet_vars() or self.eta.jet_vars():
            raise ValueError("generator coefficients must not depend on derivatives of u")

    @property
    def characteristic(self):
        """W = eta - tau u_t - xi u_x."""
        return self.eta - self.tau * var("u_t") - self.xi * var("u_x")

    def coefficient(self, axis):
        return self.tau if axis == "t" else self.xi


def scaling(b="b"):
    """X_b = u d/du - b t d/dt, the generator of (x, t, u) -> (x, l^-b t, l u)."""
    b = P.to_param(b)
    return Generator(-T * b, JetExpr(), U, name=f"X_b(b={b})")


def translation(axis):
    one = JetExpr.const(1)
    if axis == "t":
        return Generator(one, JetExpr(), JetExpr(), name="d/dt")
    return Generator(JetExpr(), one, JetExpr(), name="d/dx")


@dataclass(frozen=True)
class ProlongedGenerator:
    base: Generator
    zeta: dict

    def apply(self, F):
        """X^(k) F for an expression in (t, u, derivatives of u)."""
        out = self.base.tau * F.diff_t_explicit() + self.base.eta * F.diff_u()
        for idx in F.jet_vars():
            if idx.dependent != "u":
                raise ValueError("prolonged generators act on u-expressions only")
            if idx not in self.zeta:
                raise OrderOverflowError(f"prolongation lacks {idx.name}")
            out = out + self.zeta[idx] * F.diff_var(idx)
        return out


def _parent(idx):
    if idx.x_order:
        return DerivIndex("u", idx.t_order, idx.x_order - 1), "x"
    return DerivIndex("u", idx.t_order - 1, 0), "t"


def zeta_step(X, parent_zeta, parent, axis):
    """zeta_{J,i} = D_i(zeta_J) - D_i(tau) u_{J,t} - D_i(xi) u_{J,x}."""
    out = total_derivative(parent_zeta, axis)
    for m in ("t", "x"):
        dcoef = total_derivative(X.coefficient(m), axis)
        if dcoef:
            nxt = parent.shifted(m)
            out = out - dcoef * JetExpr.var("u", nxt.t_order, nxt.x_order)
    return out


def prolong(X, k):
    if not 1 <= k <= max_jet_order():
        raise OrderOverflowError(f"prolongation order {k} outside 1..{max_jet_order()}")
    zeta = {}
    base = DerivIndex("u", 0, 0)
    for order in range(1, k + 1):
        for t_order in range(order + 1):
            idx = DerivIndex("u", t_order, order - t_order)
            parent, axis = _parent(idx)
            pz = X.eta if parent == base else zeta[parent]
            zeta[idx] = zeta_step(X, pz, parent, axis)
    return ProlongedGenerator(X, zeta)


@dataclass
class InvarianceResult:
    multiplier: Optional[JetExpr]
    conditions: list

    @property
    def is_symmetry(self):
        return self.multiplier is not None and not self.conditions


def invariance_residual(X, spec):
    """Compare X^(3) F with lambda F; empty conditions mean X is a symmetry."""
    F = spec.equation()
    XF = prolong(X, max(F.max_order(), 1)).apply(F)
    m = match_multiple(XF, F)
    if m is None:
        # no multiplier can work; report what the pivot would give and the misfit
        cf = F.coefficient(((DerivIndex("u", 1, 0), 1),))
        lam = XF.coefficient(((DerivIndex("u", 1, 0), 1),)).scale(1 / cf.as_param())
        return InvarianceResult(None, [r for r in _residuals(XF, F, lam)])
    return InvarianceResult(m.multiplier, m.conditions)


def _residuals(a, b, lam):
    ca, cb = a.coefficients(), b.coefficients()
    for mono in set(ca) | set(cb):
        r = ca.get(mono, JetExpr()) - lam * cb.get(mono, JetExpr())
        if r:
            yield r


@dataclass(frozen=True)
class ScalingFamily:
    b: P.ParamExpr
    exponents: dict  # name -> (q, n): f ~ u^(q + n b)
    spec: EquationSpec


def _solve_euler_condition(cond):
    """Solve alpha u phi' + beta phi = 0 for a single formal phi: phi ~ u^(-beta/alpha)."""
    names = {name for key, _ in cond.terms() for (name, _), _ in key.formal}
    if len(names) != 1:
        raise SpecError(f"condition {cond} is not a first-order equation in one function")
    (name,) = names
    alpha = beta = P.ZERO
    for key, c in cond.terms():
        if key.jet or key.t or key.log or len(key.formal) != 1 or key.formal[0][1] != 1:
            raise SpecError(f"condition {cond} is outside the Euler-equation form")
        (_, order), _ = key.formal[0]
        if order == 1 and key.uexp == (1, 0):
            alpha = alpha + c
        elif order == 0 and key.uexp == (0, 0):
            beta = beta + c
        else:
            raise SpecError(f"condition {cond} is outside the Euler-equation form")
    if alpha == P.ZERO:
        raise SpecError(f"condition {cond} does not involve {name}'")
    aff = P.affine_in_b(-beta / alpha)
    if aff is None:
        raise SpecError(f"exponent {-beta / alpha} is not affine in b")
    return name, aff


def classify_scaling(b="b", epsilon="eps"):
    """Class members invariant under X_b: f = gamma u^b, g = sigma u^(b-1), h = delta u^b."""
    b = P.to_param(b)
    res = invariance_residual(scaling(b), EquationSpec.formal(epsilon))
    if res.multiplier is None:
        raise SpecError("scaling generator admits no multiplier")
    exponents = dict(_solve_euler_condition(c) for c in res.conditions)
    constants = {"f": "gamma", "g": "sigma", "h": "delta"}
    funcs = {}
    for name in ("f", "g", "h"):
        q, n = exponents.get(name, (0, 0))
        funcs[name] = JetExpr.u_power(q, n) * P.param(constants[name])
    spec = EquationSpec.from_functions(epsilon, funcs["f"], funcs["g"], funcs["h"], name="scale-invariant")
    # record the power-law view when the exponents have the expected shape
    if exponents.get("f") == exponents.get("h") and exponents.get("g") is not None:
        q, n = exponents["f"]
        if P.from_affine(q, n) == b and exponents["g"] == (q - 1, n):
            spec = EquationSpec.power_law(epsilon, b, "gamma", "sigma", "delta", name="scale-invariant")
    return ScalingFamily(b, exponents, spec)


def scaling_exponent(spec):
    """The b for which X_b is a symmetry of ``spec``, or None.

    When every b works (no u-dependent terms), 0 is returned.
    """
    if spec.power is not None:
        return spec.power.b if invariance_residual(scaling(spec.power.b), spec).is_symmetry else None
    b = P.param("b")
    res = invariance_residual(scaling(b), spec)
    if res.multiplier is None:
        return None
    equations = [c for cond in res.conditions for _, c in cond.terms()]
    candidate = None
    bi = P.PARAM_NAMES.index("b")
    for eq in equations:
        num = eq.numer
        if num.degree(bi) == 1:
            lead = P.FIELD(num.diff(num.ring.gens[bi]))
            rest = P.FIELD(num) - lead * b
            candidate = -rest / lead
            break
        if num.degree(bi) > 1:
            raise SpecError("scaling condition is nonlinear in b")
    if candidate is None:
        if equations:
            return None
        return P.ZERO
    if P.affine_in_b(candidate) is None or "b" in P.free_params(candidate):
        return None
    try:
        if P.as_fraction(candidate) is None:
            return None
        if invariance_residual(scaling(candidate), spec).is_symmetry:
            return candidate
    except (DegenerateMatchError, ZeroDivisionError):
        return None
    return None
