"""Rational functions in the named equation parameters.

Parameter values (``eps``, ``gamma``, ``b``, ...) are elements of the fraction
field QQ(eps, gamma, sigma, delta, beta, c, b, B, lambda, k), backed by the
sparse fraction field of :mod:`sympy.polys`.  Elements are kept reduced by a
polynomial gcd, so equality is structural and zero is unique.
"""

from fractions import Fraction
from numbers import Rational

from sympy import QQ
from sympy.polys.fields import FracElement, field

PARAM_NAMES = ("eps", "gamma", "sigma", "delta", "beta", "c", "b", "B", "lambda", "k")

FIELD, *_GENS = field(",".join(PARAM_NAMES), QQ)
_BY_NAME = dict(zip(PARAM_NAMES, _GENS))

ParamExpr = FracElement

ZERO = FIELD.zero
ONE = FIELD.one


def mul(a, b):
    """Product that skips the gcd when a factor is the shared unit."""
    if b is ONE or (type(b) is int and b == 1):
        return a
    if a is ONE:
        return b if isinstance(b, FracElement) else to_param(b)
    return a * b


def param(name):
    """Return the generator for parameter ``name``."""
    try:
        return _BY_NAME[name]
    except KeyError:
        raise KeyError(f"unknown parameter {name!r}; expected one of {PARAM_NAMES}") from None


def to_param(value):
    """Coerce an int, Fraction, string name or field element into the field."""
    if isinstance(value, FracElement):
        return value
    if isinstance(value, str):
        return param(value)
    if isinstance(value, bool):
        raise TypeError("booleans are not parameter values")
    if isinstance(value, Rational):
        return FIELD(QQ(int(value.numerator), int(value.denominator)))
    if isinstance(value, float):
        f = Fraction(value)
        return FIELD(QQ(f.numerator, f.denominator))
    raise TypeError(f"cannot convert {value!r} to a parameter expression")


def _frac(q):
    return Fraction(int(q.numerator), int(q.denominator))


def is_constant(p):
    """True when ``p`` involves no parameter symbols."""
    return p.numer.is_ground and p.denom.is_ground


def as_fraction(p):
    """Return ``p`` as a Fraction, or None if it depends on parameters."""
    if not is_constant(p):
        return None
    return _frac(p.numer.LC) / _frac(p.denom.LC)


def free_params(p):
    """Names of the parameters ``p`` actually depends on."""
    names = set()
    for poly in (p.numer, p.denom):
        for monom in poly.monoms():
            names.update(PARAM_NAMES[i] for i, e in enumerate(monom) if e)
    return names


def _poly_subs(poly, values):
    out = ZERO
    for monom, coeff in poly.terms():
        term = to_param(_frac(coeff))
        for i, e in enumerate(monom):
            if e:
                name = PARAM_NAMES[i]
                base = values.get(name, _GENS[i])
                term = term * base**e
        out = out + term
    return out


def substitute(p, values):
    """Substitute parameter names by field elements/numbers.

    ``values`` maps parameter names to anything :func:`to_param` accepts.
    Raises ZeroDivisionError if the denominator vanishes.
    """
    if not values:
        return p
    vals = {k: to_param(v) for k, v in values.items()}
    num = _poly_subs(p.numer, vals)
    den = _poly_subs(p.denom, vals)
    if den == ZERO:
        raise ZeroDivisionError(f"denominator of {p} vanishes under {values}")
    return num / den


def affine_in_b(p):
    """Split ``p`` as ``q + n*b`` with rational q and integer n.

    Returns ``(q, n)`` or None when ``p`` is not of that form.
    """
    if not p.denom.is_ground:
        return None
    scale = _frac(p.denom.LC)
    bi = PARAM_NAMES.index("b")
    q = Fraction(0)
    n = Fraction(0)
    for monom, coeff in p.numer.terms():
        c = _frac(coeff) / scale
        if not any(monom):
            q += c
        elif monom[bi] == 1 and sum(monom) == 1:
            n += c
        else:
            return None
    if n.denominator != 1:
        return None
    return q, int(n)


def from_affine(q, n):
    return to_param(q) + to_param(n) * param("b")


def evaluate(p, values):
    """Numerically evaluate ``p`` given float values for all its parameters."""
    missing = free_params(p) - set(values)
    if missing:
        raise ValueError(f"no numeric value for parameter(s) {sorted(missing)}")

    def ev(poly):
        total = 0.0
        for monom, coeff in poly.terms():
            term = float(_frac(coeff))
            for i, e in enumerate(monom):
                if e:
                    term *= float(values[PARAM_NAMES[i]]) ** e
            total += term
        return total

    return ev(p.numer) / ev(p.denom)
