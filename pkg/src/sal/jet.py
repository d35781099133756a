"""Canonical polynomial expressions on the (t, x; u, v) jet space.

An expression is a finite sum of terms

    coeff * t^i * u^e * (ln u)^k * prod(formal-derivatives) * prod(jet-vars)

where ``coeff`` is a parameter rational function, ``e = q + n*b`` is affine in
the parameter ``b``, the formal factors are derivatives of the coefficient
functions f, g, h, and the jet variables are derivatives of u (order >= 1)
and of v (any order, including bare v).  Terms are stored in a dict keyed by
everything except the coefficient, so equal expressions have equal dicts.
"""

import os
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

from . import params as P
from .errors import DegenerateMatchError, NotIntegrableError, OrderOverflowError

DEFAULT_MAX_JET_ORDER = 6
FORMAL_NAMES = ("f", "g", "h")
_ZERO_EXP = (Fraction(0), 0)


def max_jet_order():
    value = os.environ.get("SAL_MAX_JET_ORDER")
    return int(value) if value else DEFAULT_MAX_JET_ORDER


class DerivIndex(NamedTuple):
    dependent: str
    t_order: int
    x_order: int

    @property
    def order(self):
        return self.t_order + self.x_order

    @property
    def name(self):
        if self.order == 0:
            return self.dependent
        return f"{self.dependent}_{'t' * self.t_order}{'x' * self.x_order}"

    def shifted(self, axis):
        if axis == "t":
            return DerivIndex(self.dependent, self.t_order + 1, self.x_order)
        return DerivIndex(self.dependent, self.t_order, self.x_order + 1)

    def sort_key(self):
        return (self.order, self.t_order, self.x_order, self.dependent)


class Key(NamedTuple):
    jet: tuple  # ((DerivIndex, power), ...)
    t: int
    uexp: tuple  # (Fraction q, int n): exponent q + n*b
    log: int
    formal: tuple  # (((name, order), power), ...)


ONE_KEY = Key((), 0, _ZERO_EXP, 0, ())


def _merge(a, b, sort_key=None):
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for k, p in b:
        d[k] = d.get(k, 0) + p
    return tuple(sorted(d.items(), key=sort_key))


def _jet_sort(item):
    return item[0].sort_key()


def _mul_keys(k1, k2):
    return Key(
        _merge(k1.jet, k2.jet, _jet_sort),
        k1.t + k2.t,
        (k1.uexp[0] + k2.uexp[0], k1.uexp[1] + k2.uexp[1]),
        k1.log + k2.log,
        _merge(k1.formal, k2.formal),
    )


def _replace_power(items, k, p, sort_key=None):
    d = dict(items)
    if p:
        d[k] = p
    else:
        d.pop(k, None)
    return tuple(sorted(d.items(), key=sort_key))


@lru_cache(maxsize=None)
def _exp_param(q, n):
    return P.from_affine(q, n)


def monomial_sort_key(jet):
    return (
        sum(v.order * p for v, p in jet),
        sum(p for _, p in jet),
        tuple((v.sort_key(), p) for v, p in jet),
    )


def term_sort_key(key):
    return (
        monomial_sort_key(key.jet),
        key.t,
        tuple((name, order, p) for (name, order), p in key.formal),
        (key.uexp[1], key.uexp[0]),
        key.log,
    )


class JetExpr:
    """Immutable canonical jet-space expression.  See module docstring."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms=None):
        self._terms = {k: c for k, c in (terms or {}).items() if c}
        self._hash = None

    # construction ------------------------------------------------------
    @classmethod
    def const(cls, c):
        return cls({ONE_KEY: P.to_param(c)})

    @classmethod
    def var(cls, dependent, t_order=0, x_order=0):
        if dependent not in ("u", "v"):
            raise ValueError(f"unknown dependent variable {dependent!r}")
        idx = DerivIndex(dependent, t_order, x_order)
        if idx.order > max_jet_order():
            raise OrderOverflowError(f"{idx.name} exceeds maximum jet order {max_jet_order()}")
        if dependent == "u" and idx.order == 0:
            return cls.u_power(1)
        return cls({ONE_KEY._replace(jet=((idx, 1),)): P.ONE})

    @classmethod
    def u_power(cls, q, n=0):
        return cls({ONE_KEY._replace(uexp=(Fraction(q), int(n))): P.ONE})

    @classmethod
    def ln_u(cls, k=1):
        return cls({ONE_KEY._replace(log=k): P.ONE})

    @classmethod
    def formal(cls, name, order=0):
        if name not in FORMAL_NAMES:
            raise ValueError(f"unknown coefficient function {name!r}")
        return cls({ONE_KEY._replace(formal=(((name, order), 1),)): P.ONE})

    @classmethod
    def time(cls):
        return cls({ONE_KEY._replace(t=1): P.ONE})

    @classmethod
    def coerce(cls, other):
        if isinstance(other, JetExpr):
            return other
        return cls.const(other)

    # basic protocol ----------------------------------------------------
    def terms(self):
        """(key, coefficient) pairs in canonical order."""
        return sorted(self._terms.items(), key=lambda kv: term_sort_key(kv[0]))

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    @property
    def is_zero(self):
        return not self._terms

    def __eq__(self, other):
        if not isinstance(other, JetExpr):
            try:
                other = JetExpr.coerce(other)
            except TypeError:
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self):
        from .grammar import format_expr

        return f"JetExpr({format_expr(self)!r})"

    def __str__(self):
        from .grammar import format_expr

        return format_expr(self)

    # arithmetic --------------------------------------------------------
    def __add__(self, other):
        try:
            other = JetExpr.coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, P.ZERO) + c
        return JetExpr(out)

    __radd__ = __add__

    def __neg__(self):
        return JetExpr({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        try:
            other = JetExpr.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return JetExpr.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, JetExpr):
            try:
                c = P.to_param(other)
            except TypeError:
                return NotImplemented
            return self.scale(c)
        out = {}
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                k = _mul_keys(k1, k2)
                out[k] = out.get(k, P.ZERO) + P.mul(c1, c2)
        return JetExpr(out)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers of expressions are supported")
        result = JetExpr.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c):
        c = P.to_param(c)
        return JetExpr({k: P.mul(v, c) for k, v in self._terms.items()})

    # inspection --------------------------------------------------------
    def jet_vars(self):
        found = set()
        for k in self._terms:
            found.update(v for v, _ in k.jet)
        return sorted(found, key=DerivIndex.sort_key)

    @property
    def is_ucoeff(self):
        return all(not k.jet and not k.t for k in self._terms)

    @property
    def has_v(self):
        return any(v.dependent == "v" for v in self.jet_vars())

    @property
    def has_formal(self):
        return any(k.formal for k in self._terms)

    @property
    def has_time(self):
        return any(k.t for k in self._terms)

    def max_order(self):
        return max((v.order for v in self.jet_vars()), default=0)

    def as_param(self):
        """The coefficient if this is a pure parameter constant, else None."""
        if not self._terms:
            return P.ZERO
        if len(self._terms) == 1 and ONE_KEY in self._terms:
            return self._terms[ONE_KEY]
        return None

    def free_params(self):
        names = set()
        for k, c in self._terms.items():
            names |= P.free_params(c)
            if k.uexp[1]:
                names.add("b")
        return names

    def coefficients(self):
        """Group by jet monomial: {jet tuple: coefficient expression}."""
        groups = {}
        for k, c in self._terms.items():
            groups.setdefault(k.jet, {})[k._replace(jet=())] = c
        return {jet: JetExpr(d) for jet, d in groups.items()}

    def coefficient(self, jet):
        """Coefficient of a jet monomial given as a tuple of (DerivIndex, power)."""
        jet = tuple(sorted(jet, key=_jet_sort))
        return JetExpr({k._replace(jet=()): c for k, c in self._terms.items() if k.jet == jet})

    # calculus ----------------------------------------------------------
    def diff_var(self, idx):
        """Partial derivative with respect to a jet variable (not bare u)."""
        if idx.dependent == "u" and idx.order == 0:
            return self.diff_u()
        out = {}
        for k, c in self._terms.items():
            for v, p in k.jet:
                if v == idx:
                    nk = k._replace(jet=_replace_power(k.jet, v, p - 1, _jet_sort))
                    out[nk] = out.get(nk, P.ZERO) + P.mul(c, p)
                    break
        return JetExpr(out)

    def diff_u(self):
        """Partial derivative with respect to bare u, acting on u^e, ln u and f, g, h."""
        out = {}

        def add(k, c):
            out[k] = out.get(k, P.ZERO) + c

        for k, c in self._terms.items():
            q, n = k.uexp
            if q or n:
                add(k._replace(uexp=(q - 1, n)), c * _exp_param(q, n))
            if k.log:
                add(k._replace(uexp=(q - 1, n), log=k.log - 1), P.mul(c, k.log))
            for (name, order), p in k.formal:
                formal = _replace_power(k.formal, (name, order), p - 1)
                formal = _merge(formal, (((name, order + 1), 1),))
                add(k._replace(formal=formal), P.mul(c, p))
        return JetExpr(out)

    def diff_t_explicit(self):
        out = {}
        for k, c in self._terms.items():
            if k.t:
                nk = k._replace(t=k.t - 1)
                out[nk] = out.get(nk, P.ZERO) + P.mul(c, k.t)
        return JetExpr(out)

    # substitution ------------------------------------------------------
    def subs_params(self, values):
        """Substitute parameters; a value for ``b`` must be rational."""
        if not values:
            return self
        bval = None
        if "b" in values:
            bval = P.as_fraction(P.to_param(values["b"]))
        out = {}
        for k, c in self._terms.items():
            q, n = k.uexp
            if n and "b" in values:
                if bval is None:
                    raise ValueError("exponent substitution needs a rational value for b")
                k = k._replace(uexp=(q + n * bval, 0))
            nc = P.substitute(c, values)
            out[k] = out.get(k, P.ZERO) + nc
        return JetExpr(out)

    def instantiate(self, functions):
        """Replace formal coefficient functions by concrete expressions.

        ``functions`` maps "f"/"g"/"h" to u-only expressions; derivatives of the
        formal symbols become u-derivatives of the replacements.
        """
        cache = {}

        def deriv(name, order):
            if (name, order) not in cache:
                if order == 0:
                    cache[(name, 0)] = JetExpr.coerce(functions[name])
                else:
                    cache[(name, order)] = deriv(name, order - 1).diff_u()
            return cache[(name, order)]

        out = JetExpr()
        for k, c in self._terms.items():
            keep = []
            factor = JetExpr({k._replace(formal=()): c})
            for (name, order), p in k.formal:
                if name in functions:
                    factor = factor * deriv(name, order) ** p
                else:
                    keep.append(((name, order), p))
            if keep:
                factor = factor * JetExpr({ONE_KEY._replace(formal=tuple(keep)): P.ONE})
            out = out + factor
        return out


def var(name):
    """Build a jet variable from its printed name, e.g. ``var("u_txx")``."""
    if name in ("u", "v"):
        return JetExpr.var(name)
    dep, _, orders = name.partition("_")
    if dep not in ("u", "v") or not orders or set(orders) - {"t", "x"}:
        raise ValueError(f"not a jet variable name: {name!r}")
    return JetExpr.var(dep, orders.count("t"), orders.count("x"))


U = JetExpr.u_power(1)
V = JetExpr.var("v")
T = JetExpr.time()


def normalize(tree):
    """Canonicalize a raw expression tree.

    Leaves are JetExpr values, numbers, parameter names or jet-variable names;
    internal nodes are tuples ``("+", a, b, ...)`` or ``("*", a, b, ...)``.
    """
    if isinstance(tree, JetExpr):
        return tree
    if isinstance(tree, str):
        if tree in P.PARAM_NAMES:
            return JetExpr.const(P.param(tree))
        return var(tree)
    if isinstance(tree, tuple) and tree and tree[0] in ("+", "*"):
        parts = [normalize(t) for t in tree[1:]]
        if tree[0] == "+":
            out = JetExpr()
            for p in parts:
                out = out + p
            return out
        out = JetExpr.const(1)
        for p in parts:
            out = out * p
        return out
    return JetExpr.coerce(tree)


def total_derivative(e, axis):
    """D_t or D_x of ``e``, extended to v and its derivatives."""
    if axis not in ("t", "x"):
        raise ValueError(f"axis must be 't' or 'x', got {axis!r}")
    limit = max_jet_order()
    out = JetExpr.coerce(e).diff_t_explicit() if axis == "t" else JetExpr()
    e = JetExpr.coerce(e)
    du = e.diff_u()
    if du:
        out = out + du * JetExpr.var("u", *((1, 0) if axis == "t" else (0, 1)))
    for idx in e.jet_vars():
        nxt = idx.shifted(axis)
        if nxt.order > limit:
            raise OrderOverflowError(f"D_{axis} {idx.name} exceeds maximum jet order {limit}")
        out = out + e.diff_var(idx) * JetExpr.var(nxt.dependent, nxt.t_order, nxt.x_order)
    return out


def total_derivatives(e, t=0, x=0):
    for _ in range(t):
        e = total_derivative(e, "t")
    for _ in range(x):
        e = total_derivative(e, "x")
    return e


def variational_derivative(e, w="u"):
    """Euler-Lagrange operator delta e / delta w for w in {u, v}."""
    if w not in ("u", "v"):
        raise ValueError("w must be 'u' or 'v'")
    e = JetExpr.coerce(e)
    out = e.diff_u() if w == "u" else e.diff_var(DerivIndex("v", 0, 0))
    for idx in e.jet_vars():
        if idx.dependent != w or idx.order == 0:
            continue
        piece = total_derivatives(e.diff_var(idx), idx.t_order, idx.x_order)
        out = out + (-piece if idx.order % 2 else piece)
    return out


def substitute_dependent(e):
    """Replace v and each of its derivatives by the corresponding u-derivative."""
    out = {}
    for k, c in JetExpr.coerce(e)._terms.items():
        jet = {}
        extra = 0
        for idx, p in k.jet:
            if idx.dependent == "v":
                if idx.order == 0:
                    extra += p
                    continue
                idx = DerivIndex("u", idx.t_order, idx.x_order)
            jet[idx] = jet.get(idx, 0) + p
        nk = Key(
            tuple(sorted(jet.items(), key=_jet_sort)),
            k.t,
            (k.uexp[0] + extra, k.uexp[1]),
            k.log,
            k.formal,
        )
        out[nk] = out.get(nk, P.ZERO) + c
    return JetExpr(out)


class Match(NamedTuple):
    multiplier: JetExpr
    conditions: list


def _is_rigid(cond):
    """True if ``cond = 0`` cannot hold for any parameter values or f, g, h."""
    if cond.has_formal:
        return False
    if any(k.uexp[1] for k, _ in cond.terms()):
        return False
    return any(P.is_constant(c) for _, c in cond.terms())


def match_multiple(a, b):
    """Solve ``a = lam * b`` by comparing jet-monomial coefficients.

    The multiplier is read off a pivot monomial of ``b`` whose coefficient is
    a bare constant; every other monomial yields a residual condition
    (an expression required to vanish).  Returns None when some residual can
    never vanish.
    """
    a = JetExpr.coerce(a)
    b = JetExpr.coerce(b)
    if b.is_zero:
        raise DegenerateMatchError("cannot match against the zero expression")
    ca = a.coefficients()
    cb = b.coefficients()
    pivot = None
    for jet in sorted(cb, key=monomial_sort_key):
        c = cb[jet].as_param()
        if c is not None and c != P.ZERO:
            pivot = (jet, c)
            break
    if pivot is None:
        raise DegenerateMatchError("no monomial of the target has a constant coefficient")
    jet, c = pivot
    lam = ca.get(jet, JetExpr()).scale(1 / c)
    conditions = []
    for mono in sorted(set(ca) | set(cb), key=monomial_sort_key):
        r = ca.get(mono, JetExpr()) - lam * cb.get(mono, JetExpr())
        if r:
            if _is_rigid(r):
                return None
            conditions.append(r)
    return Match(lam, conditions)


def integrate_u(e):
    """Antiderivative in u of a u-coefficient expression (t allowed as a factor).

    Handles u^e (ln u)^k, branching on e = -1, and integration by parts of
    u^n times a single formal derivative f^(j), j >= 1.  Raises
    NotIntegrableError otherwise.
    """
    e = JetExpr.coerce(e)
    if any(k.jet for k, _ in e.terms()):
        raise NotIntegrableError("integrate_u expects an expression free of jet variables")
    result = JetExpr()
    stuck = JetExpr()
    pending = e
    for _ in range(1000):
        if pending.is_zero:
            break
        nxt = JetExpr()
        for k, c in pending.terms():
            q, n = k.uexp
            base = k._replace(formal=(), uexp=_ZERO_EXP, log=0)
            if not k.formal:
                if (q, n) == (Fraction(-1), 0):
                    nk = base._replace(log=k.log + 1)
                    result = result + JetExpr({nk: c / (k.log + 1)})
                else:
                    inv = 1 / _exp_param(q + 1, n)
                    nk = base._replace(uexp=(q + 1, n), log=k.log)
                    result = result + JetExpr({nk: c * inv})
                    if k.log:
                        nk2 = base._replace(uexp=(q, n), log=k.log - 1)
                        nxt = nxt - JetExpr({nk2: c * inv * k.log})
                continue
            if len(k.formal) != 1 or k.formal[0][1] != 1 or k.log or n or q < 0 or q.denominator != 1:
                raise NotIntegrableError(f"cannot integrate {JetExpr({k: c})} in u")
            (name, order), _ = k.formal[0]
            if order == 0:
                stuck = stuck + JetExpr({k: c})
                continue
            lowered = (((name, order - 1), 1),)
            result = result + JetExpr({base._replace(uexp=(q, 0), formal=lowered): c})
            if q:
                nxt = nxt - JetExpr({base._replace(uexp=(q - 1, 0), formal=lowered): c * int(q)})
        pending = nxt
    else:  # pragma: no cover - the recursion strictly lowers log/formal order
        raise NotIntegrableError("integration by parts did not terminate")
    if stuck:
        raise NotIntegrableError(f"no antiderivative for {stuck} in u")
    return result
