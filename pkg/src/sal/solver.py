"""Periodic pseudospectral and upwind integrators for the shallow-water family.

The spectral scheme advances

    u_t = -(1 + eps d_xx)^-1 [f(u) u_x + g(u) u_x u_xx + h(u) u_xxx]

with classical RK4.  The momentum scheme transports m = u - u_xx with a
first-order upwind difference and recovers u from (1 - d_xx) u = m.
"""

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from . import params as P
from .equations import EquationSpec
from .errors import BlowUpError, BreakingError, SolverError, UnsupportedSpecError

DEFAULT_FLOOR = 1e-6


class Scheme(str, Enum):
    SPECTRAL_U_FORM = "spectral_u_form"
    UPWIND_M_FORM = "upwind_m_form"


@dataclass(frozen=True)
class Grid:
    length: float
    n: int

    @property
    def dx(self):
        return self.length / self.n

    @property
    def x(self):
        return np.arange(self.n) * self.dx

    @property
    def k(self):
        """Angular wavenumbers for the real FFT."""
        return 2 * np.pi * np.fft.rfftfreq(self.n, d=self.dx)


def make_grid(length, n):
    if not length > 0:
        raise SolverError(f"domain length must be positive, got {length}")
    if n < 16 or n & (n - 1):
        raise SolverError(f"n must be a power of two >= 16, got {n}")
    return Grid(float(length), int(n))


# coefficient functions ------------------------------------------------------


@dataclass(frozen=True)
class UFunction:
    """Numerical evaluation of a u-coefficient sum_i c_i u^q_i (ln u)^k_i."""

    terms: tuple  # ((c, q, k), ...)

    @classmethod
    def from_expr(cls, expr):
        out = []
        for key, c in expr.terms():
            if key.jet or key.t or key.formal:
                raise UnsupportedSpecError(f"cannot evaluate {expr} numerically")
            q, n = key.uexp
            if n:
                raise UnsupportedSpecError(f"exponent of {expr} still depends on b")
            value = P.as_fraction(c)
            if value is None:
                raise UnsupportedSpecError(f"coefficient of {expr} depends on parameters {sorted(P.free_params(c))}")
            out.append((float(value), q, key.log))
        return cls(tuple(out))

    @property
    def needs_positive_u(self):
        """True if some term is singular or complex-valued for u <= 0."""
        return any(q < 0 or q.denominator != 1 or k for _, q, k in self.terms)

    def __call__(self, u):
        total = np.zeros_like(u)
        for c, q, k in self.terms:
            piece = np.full_like(u, c)
            if q:
                piece = piece * (u ** int(q) if q.denominator == 1 else u ** float(q))
            if k:
                piece = piece * np.log(u) ** k
            total = total + piece
        return total


@dataclass(frozen=True)
class NumericSpec:
    epsilon: float
    f: UFunction
    g: UFunction
    h: UFunction
    spec: EquationSpec

    @classmethod
    def from_spec(cls, spec):
        eps = P.as_fraction(spec.epsilon)
        if eps is None:
            raise UnsupportedSpecError(f"epsilon = {spec.epsilon} is not numeric")
        return cls(float(eps), UFunction.from_expr(spec.f), UFunction.from_expr(spec.g), UFunction.from_expr(spec.h), spec)

    @property
    def needs_positive_u(self):
        return any(fn.needs_positive_u for fn in (self.f, self.g, self.h))


# initial data ---------------------------------------------------------------


@dataclass(frozen=True)
class Profile:
    """A periodic initial profile with its exact derivative."""

    kind: str
    value: Callable
    derivative: Callable
    params: dict = field(default_factory=dict)


def profile(kind, length, **params):
    """Build an initial profile on [0, length); see :func:`initial_data`."""
    if kind == "gaussian":
        a, w = params.get("a", 1.0), params.get("w", 1.0)
        x0 = params.get("x0", length / 2)
        if w <= 0:
            raise SolverError("gaussian width must be positive")

        def d(x):
            return (np.asarray(x) - x0 + length / 2) % length - length / 2

        return Profile(
            kind,
            lambda x: a * np.exp(-d(x) ** 2 / w**2),
            lambda x: -2 * d(x) / w**2 * a * np.exp(-d(x) ** 2 / w**2),
            dict(a=a, w=w, x0=x0),
        )
    if kind == "smoothed_peakon":
        c, s = params.get("c", 1.0), params.get("s", 0.0)
        x0 = params.get("x0", length / 2)
        if s < 0:
            raise SolverError("peakon smoothing must be non-negative")

        def d(x):
            return (np.asarray(x) - x0 + length / 2) % length - length / 2

        def value(x):
            return c * np.exp(-np.sqrt(d(x) ** 2 + s**2))

        def derivative(x):
            r = np.sqrt(d(x) ** 2 + s**2)
            with np.errstate(invalid="ignore", divide="ignore"):
                slope = np.where(r > 0, -d(x) / np.where(r > 0, r, 1), 0.0)
            return slope * value(x)

        return Profile(kind, value, derivative, dict(c=c, s=s, x0=x0))
    if kind == "sine":
        a, k, offset = params.get("a", 1.0), params.get("k", 1), params.get("offset", 0.0)
        w = 2 * np.pi * k / length
        return Profile(
            kind,
            lambda x: a * np.sin(w * np.asarray(x)) + offset,
            lambda x: a * w * np.cos(w * np.asarray(x)),
            dict(a=a, k=k, offset=offset),
        )
    if kind == "constant":
        k = params.get("k", 1.0)
        return Profile(kind, lambda x: np.full_like(np.asarray(x, dtype=float), k), lambda x: np.zeros_like(np.asarray(x, dtype=float)), dict(k=k))
    raise SolverError(f"unknown initial data kind {kind!r}")


@dataclass
class SolverState:
    u: np.ndarray
    t: float
    spec: EquationSpec
    grid: Grid
    q_log: list = field(default_factory=list)

    @property
    def m(self):
        """Momentum m = u - u_xx."""
        return self.u - _deriv(self.u, self.grid, 2)


def initial_data(kind, grid, spec, floor=DEFAULT_FLOOR, **params):
    prof = profile(kind, grid.length, **params)
    u = np.asarray(prof.value(grid.x), dtype=float)
    num = NumericSpec.from_spec(spec)
    if num.needs_positive_u and u.min() < floor:
        if kind == "sine" and not params.get("offset"):
            raise SolverError("sine data without offset crosses zero, but this spec divides by u")
        raise SolverError(f"initial data reaches {u.min():.3g}, below the positivity floor {floor}")
    state = SolverState(u, 0.0, spec, grid)
    state.q_log.append((0.0, conserved_quantity(state)))
    return state


# spectral helpers -----------------------------------------------------------


def _deriv(u, grid, order):
    uh = np.fft.rfft(u)
    ik = 1j * grid.k
    if order % 2 and grid.n % 2 == 0:
        ik = ik.copy()
        ik[-1] = 0
    return np.fft.irfft(uh * ik**order, n=grid.n)


def _degree(num):
    """Polynomial degree of f u_x + g u_x u_xx + h u_xxx, or None if not polynomial."""
    degree = 0
    for fn, extra in ((num.f, 1), (num.g, 2), (num.h, 1)):
        for _, q, k in fn.terms:
            if k or q < 0 or q.denominator != 1:
                return None
            degree = max(degree, int(q) + extra)
    return degree


def _padded_size(n, num):
    """Grid size on which products of degree d are alias-free for modes |k| < n/2."""
    d = _degree(num)
    if d is None:
        d = 2  # non-polynomial terms: fall back to the 3/2 rule
    if d < 2:
        return n
    size = (d + 1) * n // 2
    return size + size % 2


def conserved_quantity(state):
    """Q = sum (u^2 - eps u_x^2) dx."""
    eps = float(P.as_fraction(state.spec.epsilon) or 0)
    ux = _deriv(state.u, state.grid, 1)
    return float(np.sum(state.u**2 - eps * ux**2) * state.grid.dx)


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    scheme: Scheme = Scheme.SPECTRAL_U_FORM
    dealias: bool = False
    q_tolerance: float = 1e-6
    floor: float = DEFAULT_FLOOR
    cfl: float = 0.8

    def __post_init__(self):
        if not self.dt > 0:
            raise SolverError(f"dt must be positive, got {self.dt}")
        object.__setattr__(self, "scheme", Scheme(self.scheme))


def _check(u, state, num, floor):
    if not np.all(np.isfinite(u)):
        raise BlowUpError("solution became non-finite", state.t)
    if num.needs_positive_u and u.min() < floor:
        raise BlowUpError(f"min u = {u.min():.3g} fell below the positivity floor {floor}", state.t)


# spectral u-form ------------------------------------------------------------


class _SpectralRhs:
    """Right-hand side of the u-form.

    With dealiasing, products are evaluated on a zero-padded grid large
    enough that a degree-d polynomial nonlinearity is formed without
    aliasing (the 3/2 rule when d = 2), then truncated back.  For
    strictly self-adjoint members u N(u) is an exact x-derivative, so this
    makes Q a semi-discrete invariant.
    """

    def __init__(self, num, grid, dealias):
        self.num = num
        self.grid = grid
        k = grid.k
        self.ik = 1j * k
        self.ik_odd = self.ik.copy()
        if grid.n % 2 == 0:
            self.ik_odd[-1] = 0
        self.inverse = 1.0 / (1.0 - num.epsilon * k**2)
        self.pad = _padded_size(grid.n, num) if dealias else grid.n

    def _physical(self, vh):
        if self.pad == self.grid.n:
            return np.fft.irfft(vh, n=self.grid.n)
        full = np.zeros(self.pad // 2 + 1, dtype=complex)
        full[: vh.size - 1] = vh[:-1]
        return np.fft.irfft(full, n=self.pad) * (self.pad / self.grid.n)

    def _spectral(self, v):
        vh = np.fft.rfft(v)
        if self.pad == self.grid.n:
            return vh
        out = vh[: self.grid.n // 2 + 1] * (self.grid.n / self.pad)
        out[-1] = 0
        return out

    def __call__(self, u):
        uh = np.fft.rfft(u)
        if self.pad != self.grid.n:
            uh[-1] = 0
        up = self._physical(uh)
        ux = self._physical(self.ik_odd * uh)
        uxx = self._physical(self.ik**2 * uh)
        uxxx = self._physical(self.ik_odd**3 * uh)
        num = self.num
        rhs = num.f(up) * ux + num.g(up) * ux * uxx + num.h(up) * uxxx
        return -np.fft.irfft(self._spectral(rhs) * self.inverse, n=self.grid.n)

    def eigen_bound(self, u):
        """Bound on max over k of |linearised symbol|, used to pick stable substeps."""
        num = self.num
        k = self.grid.k[1:]
        uh = np.fft.rfft(u)
        ux = np.fft.irfft(self.ik_odd * uh, n=self.grid.n)
        uxx = np.fft.irfft(self.ik**2 * uh, n=self.grid.n)
        first = np.max(np.abs(num.f(u))) + np.max(np.abs(num.g(u) * uxx))
        second = np.max(np.abs(num.g(u) * ux))
        third = np.max(np.abs(num.h(u)))
        symbol = (first * k + second * k**2 + third * k**3) / (1.0 - num.epsilon * k**2)
        return float(np.max(symbol))


def _substeps(dt, eigen, cfl):
    """RK4 is stable for imaginary eigenvalues up to 2 sqrt 2; cfl = 0.8 gives dt |lam| <= 0.8 pi."""
    limit = cfl * math.pi / eigen if eigen > 0 else math.inf
    return max(1, math.ceil(dt / limit - 1e-12))


def step(state, config):
    """Advance one dt (split into stable substeps) with RK4 on the u-form."""
    if config.scheme is not Scheme.SPECTRAL_U_FORM:
        raise SolverError("step() runs the spectral u-form; use step_momentum() for the m-form")
    num = NumericSpec.from_spec(state.spec)
    if num.epsilon > 0:
        raise UnsupportedSpecError(
            f"eps = {num.epsilon} > 0: 1 - eps k^2 vanishes at the resonance k^2 = 1/eps = {1 / num.epsilon:.6g}"
        )
    rhs = _SpectralRhs(num, state.grid, config.dealias)
    m = _substeps(config.dt, rhs.eigen_bound(state.u), config.cfl)
    h = config.dt / m
    u = state.u
    for _ in range(m):
        k1 = rhs(u)
        k2 = rhs(u + 0.5 * h * k1)
        k3 = rhs(u + 0.5 * h * k2)
        k4 = rhs(u + h * k3)
        u = u + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        _check(u, state, num, config.floor)
    state.u = u
    state.t += config.dt
    state.q_log.append((state.t, conserved_quantity(state)))
    return state


# upwind m-form --------------------------------------------------------------


@dataclass(frozen=True)
class MomentumForm:
    """m_t + beta u^b m_x + beta (b+1) u^(b-1) u_x m + (gamma - (b+2) beta) u^b u_x = 0."""

    b: float
    beta: float
    gamma: float

    @classmethod
    def from_spec(cls, spec):
        num = NumericSpec.from_spec(spec)
        if num.epsilon != -1:
            raise UnsupportedSpecError("the momentum form needs eps = -1")
        pw = spec.power
        if pw is None:
            raise UnsupportedSpecError("the momentum form needs a power-law spec")
        values = [P.as_fraction(x) for x in (pw.b, pw.gamma, pw.sigma, pw.delta)]
        if any(v is None for v in values):
            raise UnsupportedSpecError("the momentum form needs numeric b, gamma, sigma, delta")
        b, gamma, sigma, delta = values
        if sigma != (b + 1) * delta:
            raise UnsupportedSpecError("the momentum form needs sigma = (b+1) delta")
        return cls(float(b), float(-delta), float(gamma))


def _u_from_m(m, grid):
    return np.fft.irfft(np.fft.rfft(m) / (1.0 + grid.k**2), n=grid.n)


def _power(u, e):
    return u ** int(e) if float(e).is_integer() else u ** e


def step_momentum(state, config):
    """Advance one dt of the m-form by donor-cell upwinding with forward Euler.

    Substeps run at the full CFL limit dx / max|beta u^b|, where the scheme
    is exact for uniform transport; m is concentrated near the crest, which
    moves at that maximal speed, so numerical diffusion stays small there.
    """
    if config.scheme is not Scheme.UPWIND_M_FORM:
        raise SolverError("step_momentum() runs the upwind m-form")
    form = MomentumForm.from_spec(state.spec)
    num = NumericSpec.from_spec(state.spec)
    grid = state.grid
    dx = grid.dx
    m = state.m
    u = state.u
    remaining = config.dt
    while remaining > 1e-14 * config.dt:
        ux = _deriv(u, grid, 1)
        a = form.beta * _power(u, form.b)
        speed = float(np.max(np.abs(a)))
        h = min(remaining, dx / speed) if speed > 0 else remaining
        # flux form: beta u^b m_x + beta (b+1) u^(b-1) u_x m
        #          = (a m)_x + beta u^(b-1) u_x m
        a_face = 0.5 * (a + np.roll(a, -1))
        flux = a_face * np.where(a_face > 0, m, np.roll(m, -1))
        transport = (flux - np.roll(flux, 1)) / dx
        source = form.beta * _power(u, form.b - 1) * ux * m
        source += (form.gamma - (form.b + 2) * form.beta) * _power(u, form.b) * ux
        m = m - h * (transport + source)
        u = _u_from_m(m, grid)
        _check(u, state, num, config.floor)
        remaining -= h
    state.u = u
    state.t += config.dt
    state.q_log.append((state.t, conserved_quantity(state)))
    return state


# Riemann oracle -------------------------------------------------------------


def breaking_time(prof, gamma, b, length, samples=4096):
    """t* = 1 / max(-d/dx [gamma u0^b]) over points where the slope is negative."""

    def slope(x):
        x = np.asarray(x, dtype=float)
        u = prof.value(x)
        return gamma * b * _power(u, b - 1) * prof.derivative(x) if b else np.zeros_like(x)

    xs = np.linspace(0.0, length, samples, endpoint=False)
    s = slope(xs)
    i = int(np.argmin(s))
    h = length / samples
    res = minimize_scalar(lambda x: float(slope(x)), bounds=(xs[i] - h, xs[i] + h), method="bounded", options={"xatol": 1e-13})
    worst = min(float(s[i]), float(res.fun))
    return math.inf if worst >= 0 else -1.0 / worst


def riemann_oracle(prof, gamma, b, grid, t, tol=1e-12):
    """u(x_j, t) for u_t + gamma u^b u_x = 0 by bisection on the characteristics."""
    t_star = breaking_time(prof, gamma, b, grid.length)
    if t >= t_star:
        raise BreakingError(t, t_star)
    x = grid.x

    def speed(xi):
        return gamma * _power(prof.value(xi), b)

    sample = speed(np.linspace(0.0, grid.length, 8 * grid.n, endpoint=False))
    lo = x - t * sample.max() - tol
    hi = x - t * sample.min() + tol
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        g = mid + t * speed(mid) - x
        lo = np.where(g < 0, mid, lo)
        hi = np.where(g < 0, hi, mid)
    return prof.value(0.5 * (lo + hi))


# driver ----------------------------------------------------------------------


@dataclass(frozen=True)
class LogRow:
    t: float
    q: float
    drift: float
    mass: float
    max_abs: float


def _row(state, q0):
    q = state.q_log[-1][1]
    drift = abs(q - q0) / abs(q0) if q0 else abs(q - q0)
    return LogRow(state.t, q, drift, float(np.sum(state.u) * state.grid.dx), float(np.max(np.abs(state.u))))


def simulate(state, config, t_end, stride=1):
    """Run to ``t_end``; returns the final state and strided log rows."""
    advance = step if config.scheme is Scheme.SPECTRAL_U_FORM else step_momentum
    nsteps = max(0, round((t_end - state.t) / config.dt))
    q0 = state.q_log[0][1]
    rows = [_row(state, q0)]
    for i in range(1, nsteps + 1):
        advance(state, config)
        if i % stride == 0 or i == nsteps:
            rows.append(_row(state, q0))
    return state, rows


def relative_drift(state):
    q0 = state.q_log[0][1]
    return max(abs(q - q0) for _, q in state.q_log) / abs(q0) if q0 else 0.0


def _fmt(x):
    return "%.17g" % x


def write_log_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "Q", "relative_drift", "mass", "max_abs_u"])
        for r in rows:
            w.writerow([_fmt(r.t), _fmt(r.q), _fmt(r.drift), _fmt(r.mass), _fmt(r.max_abs)])


def write_profile_csv(path, state):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "u"])
        for x, u in zip(state.grid.x, state.u):
            w.writerow([_fmt(x), _fmt(u)])
