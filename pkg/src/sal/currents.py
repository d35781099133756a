"""Conserved vectors from the formal Lagrangian, their reduction and characteristics."""

from dataclasses import dataclass
from math import comb
from typing import Optional

from . import params as P
from .adjoint import strict_self_adjointness
from .equations import EquationSpec, bbm, camassa_holm, formal_lagrangian, novikov, riemann
from .errors import NonConservationError, NotASymmetryError, NotIntegrableError, UnsupportedSpecError
from .jet import (
    DerivIndex,
    JetExpr,
    integrate_u,
    substitute_dependent,
    total_derivative,
    total_derivatives,
)
from .symmetry import invariance_residual, scaling

_STRIP_LIMIT = 500


@dataclass(frozen=True)
class ConservedVector:
    c0: JetExpr
    c1: JetExpr
    characteristic: Optional[JetExpr] = None
    local: bool = True

    def divergence(self):
        return total_derivative(self.c0, "t") + total_derivative(self.c1, "x")


def ordered_partial(L, t_count, x_count):
    """dL/du_w for one ordered word w with the given letter counts.

    Mixed partials are identified in the canonical algebra, so the symmetric
    Lagrangian spreads the coefficient of u_(t^a x^b) evenly over its
    comb(a+b, a) orderings.
    """
    idx = DerivIndex("u", t_count, x_count)
    return L.diff_var(idx).scale(P.ONE / comb(t_count + x_count, t_count))


def _words(n):
    """(t-count, x-count, number of ordered words) for words of length n."""
    return [(a, n - a, comb(n, a)) for a in range(n + 1)]


def _component(W, L, axis, order):
    """The sum over the derivatives of W in the component along ``axis``."""
    ti, xi = (1, 0) if axis == "t" else (0, 1)
    out = JetExpr()
    for s in range(order):
        for ja, jb, jn in _words(s):
            inner = JetExpr()
            for r in range(order - s):
                for ka, kb, kn in _words(r):
                    partial = ordered_partial(L, ti + ja + ka, xi + jb + kb)
                    if partial:
                        term = total_derivatives(partial, ka, kb).scale(kn)
                        inner = inner - term if r % 2 else inner + term
            if inner:
                out = out + total_derivatives(W, ja, jb) * inner.scale(jn)
    return out


def raw_vector(X, spec):
    """Components (tau L + ..., xi L + ...) with the v-dependence kept."""
    L = formal_lagrangian(spec)
    W = X.characteristic
    order = L.max_order()
    c0 = X.tau * L + _component(W, L, "t", order)
    c1 = X.xi * L + _component(W, L, "x", order)
    return c0, c1


def ibragimov_vector(X, spec, check=True):
    """Conserved vector associated with the symmetry ``X`` of ``spec``.

    For strictly self-adjoint specs v is replaced by u and the characteristic
    is filled in.  Otherwise the nonlocal (v-dependent) vector is returned
    with ``local`` false.  ``check=False`` skips the invariance test; a
    generator that is not a symmetry then surfaces as NonConservationError.
    """
    if check:
        res = invariance_residual(X, spec)
        if not res.is_symmetry:
            raise NotASymmetryError(res.conditions)
    c0, c1 = raw_vector(X, spec)
    if not strict_self_adjointness(spec).is_ssa:
        return ConservedVector(c0, c1, None, local=False)
    c0, c1 = substitute_dependent(c0), substitute_dependent(c1)
    vec = ConservedVector(c0, c1)
    return ConservedVector(c0, c1, characteristic_of(vec, spec))


# trivial parts --------------------------------------------------------------


def _rank(idx):
    return (idx.dependent, idx.t_order, idx.x_order)


def _peel(key, coeff):
    """An antiderivative P with D_x P = term + (lower-ranked terms), or None."""
    if not key.jet:
        return None
    top, power = max(key.jet, key=lambda vp: _rank(vp[0]))
    if power != 1 or top.x_order == 0:
        return None
    lower = DerivIndex(top.dependent, top.t_order, top.x_order - 1)
    jet = dict(key.jet)
    del jet[top]
    if lower.dependent == "u" and lower.order == 0:
        # c(t, u) u_x: the antiderivative is an integral in u
        try:
            return integrate_u(JetExpr({key._replace(jet=()): coeff}))
        except NotIntegrableError:
            return None
    p = jet.get(lower, 0)
    jet[lower] = p + 1
    new_key = key._replace(jet=tuple(sorted(jet.items(), key=lambda vp: vp[0].sort_key())))
    return JetExpr({new_key: coeff / (p + 1)})


def _is_function_of_t(key):
    return not key.jet and key.uexp == (0, 0) and not key.log and not key.formal


def strip_trivial(C):
    """Remove trivial parts so that c0 has no D_x-image term.

    Pairs (D_x P, -D_t P) are moved out of c0 by integrating by parts in x,
    and flux terms depending on t alone (whose D_x vanishes) are dropped.
    """
    rest = C.c0
    acc = JetExpr()
    for _ in range(_STRIP_LIMIT):
        for key, coeff in sorted(rest.terms(), key=lambda kc: _term_rank(kc[0]), reverse=True):
            piece = _peel(key, coeff)
            if piece is not None:
                break
        else:
            break
        rest = rest - total_derivative(piece, "x")
        acc = acc + piece
    flux = C.c1 + total_derivative(acc, "t")
    flux = JetExpr({k: c for k, c in flux.terms() if not _is_function_of_t(k)})
    return ConservedVector(rest, flux, C.characteristic, C.local)


def _term_rank(key):
    return sorted((_rank(v), p) for v, p in key.jet)[::-1]


# characteristics ------------------------------------------------------------


def characteristic_of(C, spec):
    """The multiplier lam with D_t c0 + D_x c1 = lam F."""
    if not C.local or C.c0.has_v or C.c1.has_v:
        raise NonConservationError("characteristic_of needs a local (v-free) vector")
    F = spec.equation()
    pivot = DerivIndex("u", 1, 2) if spec.epsilon != P.ZERO else DerivIndex("u", 1, 0)
    lead = F.diff_var(pivot).as_param()
    rem = C.divergence()
    lam = JetExpr()
    while True:
        top = max((dict(k.jet).get(pivot, 0) for k, _ in rem.terms()), default=0)
        if top == 0:
            break
        q = JetExpr({k: c for k, c in rem.terms() if dict(k.jet).get(pivot, 0) == top})
        q = q.diff_var(pivot).scale(P.ONE / (top * lead))
        lam = lam + q
        rem = rem - q * F
    if rem:
        raise NonConservationError(f"divergence leaves remainder {rem} after dividing by F")
    return lam


# Reference conservation laws ---------------------------------------------


@dataclass(frozen=True)
class TableRow:
    label: str
    spec: EquationSpec
    density: str
    flux: str


def _table():
    return [
        # BBM written as u_t - u_txx + u u_x = 0; the printed flux fixes gamma = 1
        TableRow("Benjamin-Bona-Mahony", bbm(1), "u^2 + u_x^2", "2/3*u^3 - 2*u*u_tx"),
        TableRow("Camassa-Holm", camassa_holm(), "u^2 + u_x^2", "2*u^3 - 2*u^2*u_xx - 2*u*u_tx"),
        TableRow("Novikov", novikov(), "u^2 + u_x^2", "2*u^4 - 2*u^3*u_xx - 2*u*u_tx"),
        TableRow("Riemann", riemann(), "u^2", "2*gamma*(b + 2)^-1*u^(b + 2)"),
        TableRow(
            "b = 0",
            EquationSpec.ssa_family("eps", 0, "gamma", "beta", "c", name="b = 0"),
            "u^2 - eps*u_x^2",
            "gamma*u^2 - 2*(beta - c)*u*u_xx + 2*eps*u*u_tx - c*u_x^2",
        ),
        TableRow(
            "b = -2",
            EquationSpec.ssa_family("eps", -2, "gamma", "beta", name="b = -2"),
            "u^2 - eps*u_x^2",
            "-2*beta*u^-1*u_xx + 2*gamma*ln(u) + 2*eps*u*u_tx",
        ),
    ]


TABLE_ROWS = _table()


def table_row(spec):
    """Reduced (density, flux) from the scaling symmetry of a strictly self-adjoint power-law spec.

    b = 0 uses u d/du and b = -2 uses u d/du + 2t d/dt; both are X_b.
    """
    if spec.power is None:
        raise UnsupportedSpecError("table rows need a power-law spec")
    if not strict_self_adjointness(spec).is_ssa:
        raise UnsupportedSpecError(f"{spec.name or 'spec'} is not strictly self-adjoint")
    C = strip_trivial(ibragimov_vector(scaling(spec.power.b), spec))
    return C.c0, C.c1
