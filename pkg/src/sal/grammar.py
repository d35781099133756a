"""Text grammar for coefficient functions and jet expressions.

    expr     := ['+'|'-'] term (('+'|'-') term)*
    term     := factor ('*' factor)*
    factor   := ['-'] atom ('^' exponent)?
    atom     := rational | param-name | 'u' | 'ln(u)' | 't'
              | jet-var | formal | '(' expr ')'
    exponent := signed-rational | 'b' | '(' expr ')'     # affine in b

``rational`` is an integer or ``p/q`` literal, ``jet-var`` is ``u_<t|x>+``,
``v`` or ``v_<t|x>+`` (letters in any order), ``formal`` is f, g or h followed
by primes.  There is no division: write ``u^-1`` or ``(b + 2)^-1``.
"""

import re
from dataclasses import dataclass
from fractions import Fraction

from . import params as P
from .errors import ParseError
from .jet import JetExpr, DerivIndex, FORMAL_NAMES


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int
    line: int
    column: int

    def __str__(self):
        return f"line {self.line}, column {self.column} (offset {self.start}-{self.end})"


def _span(text, start, end):
    line = text.count("\n", 0, start) + 1
    col = start - (text.rfind("\n", 0, start) + 1) + 1
    return SourceSpan(start, end, line, col)


_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>\d+(?:/\d+)?)"
    r"|(?P<name>[A-Za-z][A-Za-z0-9_]*'*)"
    r"|(?P<op>[-+*^()])"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int


def tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", _span(text, pos, pos + 1), text)
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, m.group(), m.start(), m.end()))
        pos = m.end()
    tokens.append(Token("eof", "", len(text), len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def error(self, message, tok=None):
        tok = tok or self.tok
        end = max(tok.end, tok.start + 1) if tok.kind != "eof" else tok.start
        raise ParseError(message, _span(self.text, min(tok.start, len(self.text)), min(end, len(self.text))), self.text)

    def accept(self, text):
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")

    def parse(self):
        e = self.expr()
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r}")
        return e

    def expr(self):
        negate = False
        if self.accept("-"):
            negate = True
        else:
            self.accept("+")
        e = self.term()
        if negate:
            e = -e
        while True:
            if self.accept("+"):
                e = e + self.term()
            elif self.accept("-"):
                e = e - self.term()
            else:
                return e

    def term(self):
        e = self.factor()
        while self.accept("*"):
            e = e * self.factor()
        return e

    def factor(self):
        if self.accept("-"):
            return -self.factor()
        start = self.tok
        base = self.atom()
        if self.accept("^"):
            exp_tok = self.tok
            q, n = self.exponent()
            return self.power(base, q, n, start, exp_tok)
        return base

    def atom(self):
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return JetExpr.const(Fraction(tok.text))
        if tok.kind == "op" and tok.text == "(":
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "name":
            self.i += 1
            name = tok.text
            if name == "ln":
                self.expect("(")
                if not (self.tok.kind == "name" and self.tok.text == "u"):
                    self.error("ln(...) is only defined for the argument u")
                self.i += 1
                self.expect(")")
                return JetExpr.ln_u()
            if name == "u":
                return JetExpr.u_power(1)
            if name == "t":
                return JetExpr.time()
            if name in P.PARAM_NAMES:
                return JetExpr.const(P.param(name))
            if name.rstrip("'") in FORMAL_NAMES:
                return JetExpr.formal(name.rstrip("'"), len(name) - len(name.rstrip("'")))
            if name == "v" or re.fullmatch(r"[uv]_[tx]+", name):
                dep, _, orders = name.partition("_")
                try:
                    return JetExpr.var(dep, orders.count("t"), orders.count("x"))
                except Exception as exc:
                    self.error(str(exc), tok)
            self.error(f"unknown name {name!r}", tok)
        self.error(f"expected an atom, found {tok.text or 'end of input'!r}")

    def exponent(self):
        tok = self.tok
        sign = 1
        if self.accept("-"):
            sign = -1
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return sign * Fraction(tok.text), 0
        if tok.kind == "name" and tok.text == "b":
            self.i += 1
            return Fraction(0), sign
        if tok.kind == "op" and tok.text == "(":
            self.i += 1
            e = self.expr()
            self.expect(")")
            c = e.as_param()
            aff = P.affine_in_b(c) if c is not None else None
            if aff is None:
                self.error("exponent is not affine in b with an integer b-coefficient", tok)
            return sign * aff[0], sign * aff[1]
        self.error("expected an exponent (rational, b, or parenthesised affine form)")

    def power(self, base, q, n, start, exp_tok):
        if n == 0 and q.denominator == 1 and q >= 0:
            return base ** int(q)
        if len(base) != 1:
            c = base.as_param()
            if c is not None and n == 0 and q.denominator == 1:
                return JetExpr.const(c ** int(q))
            self.error("only single-term bases may carry negative, fractional or symbolic exponents", start)
        ((key, coeff),) = base.terms()
        if n == 0 and q.denominator == 1:
            if key.jet or key.t or key.log or key.formal:
                self.error("negative powers are only allowed for u and parameters", start)
            k = int(q)
            uq, un = key.uexp
            return JetExpr({key._replace(uexp=(uq * k, un * k)): coeff**k})
        if key != key._replace(jet=(), t=0, log=0, formal=()) or key.uexp != (Fraction(1), 0) or coeff != P.ONE:
            self.error("fractional or symbolic exponents apply to u only", exp_tok)
        return JetExpr.u_power(q, n)


def parse_expr(text):
    """Parse ``text`` into a canonical JetExpr (a UCoeff when free of jet variables)."""
    return _Parser(text).parse()


def parse_ucoeff(text):
    e = parse_expr(text)
    if not e.is_ucoeff:
        raise ParseError("expected a function of u only", _span(text, 0, len(text)), text)
    return e


# printing ---------------------------------------------------------------


def _fmt_frac(q):
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _fmt_affine(q, n, paren_always=False):
    parts = []
    if n:
        if n == 1:
            parts.append("b")
        elif n == -1:
            parts.append("-b")
        else:
            parts.append(f"{n}*b")
    if q or not parts:
        if parts:
            parts.append(f"{'-' if q < 0 else '+'} {_fmt_frac(abs(q))}")
        else:
            parts.append(_fmt_frac(q))
    s = " ".join(parts)
    if (n == 0 and q.denominator == 1 or (n == 1 and q == 0)) and not paren_always:
        return s
    return f"({s})"


def _fmt_poly(poly):
    """Return (sign, text, is_sum) for a parameter polynomial."""
    items = sorted(poly.terms(), key=lambda mc: (-sum(mc[0]), tuple(-e for e in mc[0])))
    pieces = []
    for monom, coeff in items:
        c = Fraction(int(coeff.numerator), int(coeff.denominator))
        names = []
        for i, e in enumerate(monom):
            if e:
                names.append(P.PARAM_NAMES[i] + (f"^{e}" if e > 1 else ""))
        mag = abs(c)
        if names:
            body = "*".join(([_fmt_frac(mag)] if mag != 1 else []) + names)
        else:
            body = _fmt_frac(mag)
        pieces.append((c < 0, body))
    if len(pieces) == 1:
        neg, body = pieces[0]
        return neg, body, False
    text = pieces[0][1] if not pieces[0][0] else "-" + pieces[0][1]
    for neg, body in pieces[1:]:
        text += (" - " if neg else " + ") + body
    return False, f"({text})", True


def _fmt_coeff(c):
    """Return (negative, factor list) for a parameter coefficient."""
    numer, denom = c.numer, c.denom
    if denom.is_ground:
        numer = numer * (1 / denom.LC)
    neg, num, _ = _fmt_poly(numer)
    factors = [] if num == "1" else [num]
    if not denom.is_ground:
        dneg, den, is_sum = _fmt_poly(denom)
        neg ^= dneg
        factors.append(f"{den if is_sum else '(' + den + ')'}^-1")
    return neg, factors


def _fmt_key(key):
    out = []
    if key.t:
        out.append("t" if key.t == 1 else f"t^{key.t}")
    q, n = key.uexp
    if q or n:
        out.append("u" if (q, n) == (1, 0) else f"u^{_fmt_affine(q, n)}")
    if key.log:
        out.append("ln(u)" if key.log == 1 else f"ln(u)^{key.log}")
    for (name, order), p in key.formal:
        out.append(name + "'" * order + (f"^{p}" if p > 1 else ""))
    for idx, p in key.jet:
        out.append(DerivIndex(*idx).name + (f"^{p}" if p > 1 else ""))
    return out


def format_expr(e):
    """Print an expression in the grammar above; parse_expr inverts it exactly."""
    e = JetExpr.coerce(e)
    if e.is_zero:
        return "0"
    text = ""
    for i, (key, c) in enumerate(e.terms()):
        neg, factors = _fmt_coeff(c)
        factors = factors + _fmt_key(key)
        body = "*".join(factors) if factors else "1"
        if i == 0:
            text = ("-" if neg else "") + body
        else:
            text += (" - " if neg else " + ") + body
    return text


def format_param(c):
    return format_expr(JetExpr.const(c))


# key-value documents ----------------------------------------------------------


@dataclass(frozen=True)
class Entry:
    key: str
    value: str
    offset: int  # offset of the value within the document


def parse_document(text):
    """Parse ``key: value`` lines; blank lines and ``#`` comments are skipped."""
    entries = {}
    offset = 0
    for line in text.splitlines(keepends=True):
        body = line.split("#", 1)[0]
        stripped = body.strip()
        if stripped:
            key, sep, value = body.partition(":")
            if not sep or not key.strip():
                start = offset + len(body) - len(body.lstrip())
                raise ParseError("expected 'key: value'", _span(text, start, start + len(stripped)), text)
            key = key.strip()
            if key in entries:
                start = offset + body.index(key)
                raise ParseError(f"duplicate key {key!r}", _span(text, start, start + len(key)), text)
            vstart = offset + body.index(":") + 1 + len(value) - len(value.lstrip())
            entries[key] = Entry(key, value.strip(), vstart)
        offset += len(line)
    return entries


def _value(entry, text):
    try:
        return parse_expr(entry.value)
    except ParseError as exc:
        s = exc.span
        span = _span(text, entry.offset + s.start, entry.offset + s.end)
        raise ParseError(str(exc).rsplit(" at ", 1)[0] + f" in {entry.key!r}", span, text) from None


def _param_value(entry, text):
    e = _value(entry, text)
    c = e.as_param()
    if c is None:
        start = entry.offset
        raise ParseError(f"{entry.key!r} must be a constant", _span(text, start, start + len(entry.value)), text)
    return c


SPEC_KEYS = ("name", "epsilon", "f", "g", "h", "b", "gamma", "beta", "c", "sigma", "delta")


def parse_spec(text):
    """Read an equation spec from a ``key: value`` document.

    Either give f, g and h explicitly, or the power-law keys b and gamma
    together with beta (and optionally c) or with sigma and delta.  When both
    forms are present they must agree.
    """
    from .equations import EquationSpec
    from .errors import SpecError

    entries = parse_document(text)
    unknown = [k for k in entries if k not in SPEC_KEYS]
    if unknown:
        raise SpecError(f"unknown key {unknown[0]!r}; expected some of {', '.join(SPEC_KEYS)}")
    if "epsilon" not in entries:
        raise SpecError("missing key 'epsilon'")
    name = entries["name"].value if "name" in entries else ""
    eps = _param_value(entries["epsilon"], text)
    explicit = {k: _value(entries[k], text) for k in ("f", "g", "h") if k in entries}
    for k, v in explicit.items():
        if not v.is_ucoeff:
            raise SpecError(f"{k!r} must be a function of u only")

    power = None
    if "b" in entries or "gamma" in entries:
        for k in ("b", "gamma"):
            if k not in entries:
                raise SpecError(f"missing key {k!r} for the power-law form")
        b = _param_value(entries["b"], text)
        gamma = _param_value(entries["gamma"], text)
        if "beta" in entries:
            if "sigma" in entries or "delta" in entries:
                raise SpecError("give either beta (and c) or sigma and delta, not both")
            c = _param_value(entries["c"], text) if "c" in entries else 0
            power = EquationSpec.ssa_family(eps, b, gamma, _param_value(entries["beta"], text), c, name=name)
        elif "sigma" in entries and "delta" in entries:
            if "c" in entries:
                raise SpecError("c only applies together with beta")
            sigma = _param_value(entries["sigma"], text)
            delta = _param_value(entries["delta"], text)
            power = EquationSpec.power_law(eps, b, gamma, sigma, delta, name=name)
        else:
            raise SpecError("the power-law form needs beta, or both sigma and delta")
    elif any(k in entries for k in ("beta", "c", "sigma", "delta")):
        raise SpecError("beta, c, sigma and delta need the power-law keys b and gamma")

    if power is not None:
        for k, v in explicit.items():
            if getattr(power, k) != v:
                raise SpecError(f"inconsistent spec: {k} = {format_expr(v)} but the power-law keys give {format_expr(getattr(power, k))}")
        return power
    missing = [k for k in ("f", "g", "h") if k not in explicit]
    if missing:
        raise SpecError(f"missing key(s) {', '.join(missing)}")
    return EquationSpec.from_functions(eps, explicit["f"], explicit["g"], explicit["h"], name=name)


def format_spec(spec):
    """A spec document that :func:`parse_spec` reads back to an equal spec."""
    lines = []
    if spec.name:
        lines.append(f"name: {spec.name}")
    lines.append(f"epsilon: {format_param(spec.epsilon)}")
    pw = spec.power
    if pw is not None:
        lines.append(f"b: {format_param(pw.b)}")
        lines.append(f"gamma: {format_param(pw.gamma)}")
        if pw.beta is not None:
            lines.append(f"beta: {format_param(pw.beta)}")
            if pw.c is not None and pw.c != P.ZERO:
                lines.append(f"c: {format_param(pw.c)}")
        else:
            lines.append(f"sigma: {format_param(pw.sigma)}")
            lines.append(f"delta: {format_param(pw.delta)}")
    for k in ("f", "g", "h"):
        lines.append(f"{k}: {format_expr(getattr(spec, k))}")
    return "\n".join(lines) + "\n"
