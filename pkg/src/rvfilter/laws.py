"""Closed catalog of distribution descriptors.

Every law exposes its exact survival function, the density of its
continuous part, its atoms, and (where one exists) a closed-form Mellin
transform E[Y^s]. Laws serialize to small JSON dicts keyed by ``kind``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar, Optional

import numpy as np
from scipy import special as sps

from .special import loggamma


class MomentDivergence(ValueError):
    """Raised when a requested power moment is infinite."""


def _arr(x):
    return np.asarray(x, dtype=float)


def power_piece_integral(c, p, a: float, b: float, s):
    """c * integral_a^b y^(s - p - 1) dy for complex c, p, s (vectorized in s).

    ``a`` may be 0 and ``b`` may be inf when the integral converges.
    """
    s = np.asarray(s, dtype=complex)
    k = s - p
    if b == math.inf:
        if np.any(k.real >= 0):
            raise MomentDivergence("power piece diverges at infinity")
        return -c * np.exp(k * math.log(a)) / k
    if a == 0.0:
        if np.any(k.real <= 0):
            raise MomentDivergence("power piece diverges at zero")
        return c * np.exp(k * math.log(b)) / k
    span = math.log(b / a)
    z = k * span
    return c * np.exp(k * math.log(a)) * span * _exprel(z)


def power_piece_derivative(c, p, a: float, b: float, s):
    """d/dtheta of :func:`power_piece_integral` along s = alpha + i*theta."""
    s = np.asarray(s, dtype=complex)
    k = s - p
    if b == math.inf:
        la = math.log(a)
        ak = np.exp(k * la)
        return 1j * c * (-ak * la / k + ak / k**2)
    if a == 0.0:
        lb = math.log(b)
        bk = np.exp(k * lb)
        return 1j * c * (bk * lb / k - bk / k**2)
    la = math.log(a)
    span = math.log(b / a)
    z = k * span
    ak = np.exp(k * la)
    return 1j * c * ak * span * (la * _exprel(z) + span * _exprel_prime(z))


def _exprel(z):
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    small = np.abs(z) < 1e-4
    zs = z[small]
    out[small] = 1 + zs / 2 + zs**2 / 6 + zs**3 / 24
    zb = z[~small]
    out[~small] = (np.exp(zb) - 1) / zb
    return out


def _exprel_prime(z):
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    small = np.abs(z) < 1e-3
    zs = z[small]
    out[small] = 0.5 + zs / 3 + zs**2 / 8 + zs**3 / 30
    zb = z[~small]
    out[~small] = (zb * np.exp(zb) - np.exp(zb) + 1) / zb**2
    return out


@dataclass(frozen=True)
class PowerTerm:
    """Density c * y^(-(p+1)) on (a, b); c and p may be complex."""

    c: complex
    p: complex
    a: float
    b: float


class Law:
    """Base descriptor of a probability law on the real line."""

    kind: ClassVar[str] = "law"
    #: E[Y^s] is finite for lower_abscissa < Re s < upper_abscissa
    upper_abscissa: ClassVar[float] = math.inf
    lower_abscissa: ClassVar[float] = -math.inf
    slowly_varying: ClassVar[bool] = False

    # -- tail and density -------------------------------------------------
    def sf(self, x):
        raise NotImplementedError

    def pdf(self, x):
        """Density of the continuous part (zero where there is none)."""
        return np.zeros_like(_arr(x))

    def atoms(self) -> tuple[tuple[float, float], ...]:
        return ()

    def support(self) -> tuple[float, float]:
        return (0.0, math.inf)

    def breakpoints(self) -> tuple[float, ...]:
        return ()

    def isf(self, v):
        """Closed-form inverse survival function, or None to request bisection."""
        return None

    def atom_mass(self, x) -> np.ndarray:
        x = _arr(x)
        out = np.zeros_like(x)
        for loc, w in self.atoms():
            out = out + np.where(x == loc, w, 0.0)
        return out

    def cdf(self, x):
        return 1.0 - self.sf(x)

    # -- Mellin -----------------------------------------------------------
    def mellin(self, s):
        """Closed-form E[Y^s], or None when unavailable."""
        return None

    def never_vanishes(self, alpha: float) -> Optional[str]:
        """Reason why E[Y^(alpha+i theta)] has no real zero, if known in closed form."""
        return None

    def power_terms(self) -> Optional[tuple[PowerTerm, ...]]:
        """Continuous part as a finite sum of power densities, if representable."""
        return None

    def check_moment(self, p: float) -> None:
        if not (self.lower_abscissa < p < self.upper_abscissa):
            raise MomentDivergence(
                f"{self.kind}: E[Y^{p:g}] is infinite "
                f"(finite only for {self.lower_abscissa:g} < p < {self.upper_abscissa:g})"
            )

    @property
    def tail_index(self) -> Optional[float]:
        """Regular-variation index of the right tail, None if light or not RV."""
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Pareto(Law):
    alpha: float = 1.0
    kind: ClassVar[str] = "pareto"

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("pareto index must be positive")

    @property
    def upper_abscissa(self):
        return self.alpha

    lower_abscissa: ClassVar[float] = -math.inf

    def sf(self, x):
        x = _arr(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x > 1.0, np.power(np.maximum(x, 1.0), -self.alpha), 1.0)

    def pdf(self, x):
        x = _arr(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x > 1.0, self.alpha * np.power(np.maximum(x, 1.0), -self.alpha - 1), 0.0)

    def support(self):
        return (1.0, math.inf)

    def breakpoints(self):
        return (1.0,)

    def isf(self, v):
        return np.power(_arr(v), -1.0 / self.alpha)

    def mellin(self, s):
        s = np.asarray(s, dtype=complex)
        if np.any(s.real >= self.alpha):
            raise MomentDivergence(f"pareto({self.alpha:g}) has no moment of order >= {self.alpha:g}")
        return self.alpha / (self.alpha - s)

    def never_vanishes(self, alpha):
        return "p/(p - s) has no zeros"

    @property
    def tail_index(self):
        return self.alpha

    def to_dict(self):
        return {"kind": self.kind, "alpha": self.alpha}


@dataclass(frozen=True)
class Uniform(Law):
    lo: float = 0.0
    hi: float = 1.0
    kind: ClassVar[str] = "uniform"

    def __post_init__(self):
        if not (0.0 <= self.lo < self.hi < math.inf):
            raise ValueError("uniform needs 0 <= lo < hi < inf")

    @property
    def lower_abscissa(self):
        return -1.0 if self.lo == 0.0 else -math.inf

    def sf(self, x):
        x = _arr(x)
        return np.clip((self.hi - x) / (self.hi - self.lo), 0.0, 1.0)

    def pdf(self, x):
        x = _arr(x)
        return np.where((x > self.lo) & (x < self.hi), 1.0 / (self.hi - self.lo), 0.0)

    def support(self):
        return (self.lo, self.hi)

    def breakpoints(self):
        return tuple(v for v in (self.lo, self.hi) if v > 0)

    def isf(self, v):
        return self.hi - _arr(v) * (self.hi - self.lo)

    def mellin(self, s):
        s = np.asarray(s, dtype=complex)
        t = s + 1.0
        width = self.hi - self.lo
        if self.lo == 0.0:
            if np.any(t.real <= 0):
                raise MomentDivergence("uniform(0, b) has no moment of order <= -1")
            return np.exp(t * math.log(self.hi)) / (t * width)
        return power_piece_integral(1.0 / width, -1.0, self.lo, self.hi, s)

    def never_vanishes(self, alpha):
        if alpha <= -1:
            return None
        return "|hi^(s+1)| > |lo^(s+1)| on Re s > -1"

    def to_dict(self):
        return {"kind": self.kind, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class Gamma(Law):
    shape: float = 1.0
    rate: float = 1.0
    kind: ClassVar[str] = "gamma"

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise ValueError("gamma needs positive shape and rate")

    @property
    def lower_abscissa(self):
        return -self.shape

    def sf(self, x):
        x = _arr(x)
        return np.where(x > 0, sps.gammaincc(self.shape, self.rate * np.maximum(x, 0.0)), 1.0)

    def pdf(self, x):
        x = _arr(x)
        xp = np.maximum(x, 1e-300)
        logp = (self.shape * math.log(self.rate) + (self.shape - 1) * np.log(xp)
                - self.rate * xp - math.lgamma(self.shape))
        return np.where(x > 0, np.exp(logp), 0.0)

    def breakpoints(self):
        return (max(self.shape - 1.0, 0.0) / self.rate or 1.0 / self.rate,)

    def mellin(self, s):
        s = np.asarray(s, dtype=complex)
        if np.any(s.real <= -self.shape):
            raise MomentDivergence("gamma moment of order <= -shape")
        return np.exp(loggamma(self.shape + s) - math.lgamma(self.shape) - s * math.log(self.rate))

    def never_vanishes(self, alpha):
        return "the gamma function has no zeros"

    def to_dict(self):
        return {"kind": self.kind, "shape": self.shape, "rate": self.rate}


@dataclass(frozen=True)
class LogNormal(Law):
    mu: float = 0.0
    sigma: float = 1.0
    kind: ClassVar[str] = "lognormal"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("lognormal sigma must be positive")

    def sf(self, x):
        x = _arr(x)
        with np.errstate(divide="ignore"):
            z = (np.log(np.maximum(x, 0.0)) - self.mu) / (self.sigma * math.sqrt(2.0))
        return 0.5 * sps.erfc(z)

    def pdf(self, x):
        x = _arr(x)
        xp = np.maximum(x, 1e-300)
        z = (np.log(xp) - self.mu) / self.sigma
        return np.where(x > 0, np.exp(-0.5 * z * z) / (xp * self.sigma * math.sqrt(2 * math.pi)), 0.0)

    def breakpoints(self):
        return (math.exp(self.mu),)

    def isf(self, v):
        return np.exp(self.mu + self.sigma * sps.ndtri(1.0 - _arr(v)))

    def mellin(self, s):
        s = np.asarray(s, dtype=complex)
        return np.exp(s * self.mu + 0.5 * s * s * self.sigma**2)

    def never_vanishes(self, alpha):
        return "exponential of an entire function"

    def to_dict(self):
        return {"kind": self.kind, "mu": self.mu, "sigma": self.sigma}


@dataclass(frozen=True)
class AbsCauchy(Law):
    """|C| for a standard Cauchy C."""

    kind: ClassVar[str] = "abscauchy"
    upper_abscissa: ClassVar[float] = 1.0
    lower_abscissa: ClassVar[float] = -1.0

    def sf(self, x):
        x = _arr(x)
        with np.errstate(divide="ignore"):
            return np.where(x > 0, (2 / math.pi) * np.arctan(1.0 / np.maximum(x, 1e-300)), 1.0)

    def pdf(self, x):
        x = _arr(x)
        with np.errstate(over="ignore"):
            return np.where(x > 0, 2.0 / (math.pi * (1.0 + x * x)), 0.0)

    def breakpoints(self):
        return (1.0,)

    def isf(self, v):
        v = _arr(v)
        with np.errstate(divide="ignore"):
            return 1.0 / np.tan(0.5 * math.pi * v)

    def mellin(self, s):
        s = np.asarray(s, dtype=complex)
        if np.any(np.abs(s.real) >= 1):
            raise MomentDivergence("absolute Cauchy moments exist only for |Re s| < 1")
        return 1.0 / np.cos(0.5 * math.pi * s)

    def never_vanishes(self, alpha):
        return "1/cos has no zeros"

    @property
    def tail_index(self):
        return 1.0

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class Discrete(Law):
    """Finitely many positive atoms; ``two-point`` and point masses are special cases."""

    values: tuple[float, ...] = (1.0,)
    probs: tuple[float, ...] = (1.0,)
    kind: ClassVar[str] = "discrete"

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        ps = tuple(float(p) for p in self.probs)
        if len(vals) != len(ps) or not vals:
            raise ValueError("discrete law needs matching non-empty values and probs")
        if any(v <= 0 for v in vals) or any(p <= 0 for p in ps):
            raise ValueError("discrete law needs positive values and probabilities")
        if abs(sum(ps) - 1.0) > 1e-12:
            raise ValueError("discrete probabilities must sum to 1")
        if len(set(vals)) != len(vals):
            raise ValueError("discrete values must be distinct")
        order = np.argsort(vals)
        object.__setattr__(self, "values", tuple(vals[i] for i in order))
        object.__setattr__(self, "probs", tuple(ps[i] for i in order))

    @classmethod
    def two_point(cls, x1: float, x2: float, p1: float) -> "Discrete":
        return cls((x1, x2), (p1, 1.0 - p1))

    @classmethod
    def point(cls, c: float) -> "Discrete":
        return cls((c,), (1.0,))

    def sf(self, x):
        x = _arr(x)
        out = np.zeros_like(x)
        for v, p in zip(self.values, self.probs):
            out = out + np.where(x < v, p, 0.0)
        return out

    def atoms(self):
        return tuple(zip(self.values, self.probs))

    def support(self):
        return (self.values[0], self.values[-1])

    def mellin(self, s):
        s = np.asarray(s, dtype=complex)
        out = np.zeros(s.shape, dtype=complex)
        for v, p in zip(self.values, self.probs):
            out = out + p * np.exp(s * math.log(v))
        return out

    def never_vanishes(self, alpha):
        if len(self.values) == 1:
            return "single atom"
        return None

    def power_terms(self):
        return ()

    def to_dict(self):
        return {"kind": self.kind, "atoms": [[v, p] for v, p in self.atoms()]}


@dataclass(frozen=True)
class TruncatedPower(Law):
    """Density proportional to y^(-(p+1)) on (a, b), 0 < a < b < inf."""

    p: float = 1.0
    a: float = 1.0
    b: float = math.e
    kind: ClassVar[str] = "truncpow"

    def __post_init__(self):
        if not (0 < self.a < self.b < math.inf):
            raise ValueError("truncated power needs 0 < a < b < inf")

    @property
    def norm(self) -> float:
        if self.p == 0:
            return 1.0 / math.log(self.b / self.a)
        return self.p / (self.a ** -self.p - self.b ** -self.p)

    def sf(self, x):
        x = np.clip(_arr(x), self.a, self.b)
        c = self.norm
        if self.p == 0:
            return c * np.log(self.b / x)
        return c / self.p * (np.power(x, -self.p) - self.b ** -self.p)

    def pdf(self, x):
        x = _arr(x)
        inside = (x > self.a) & (x < self.b)
        return np.where(inside, self.norm * np.power(np.where(inside, x, 1.0), -self.p - 1), 0.0)

    def support(self):
        return (self.a, self.b)

    def breakpoints(self):
        return (self.a, self.b)

    def isf(self, v):
        v = _arr(v)
        c = self.norm
        if self.p == 0:
            return self.b * np.exp(-v / c)
        return np.power(v * self.p / c + self.b ** -self.p, -1.0 / self.p)

    def mellin(self, s):
        return power_piece_integral(self.norm, self.p, self.a, self.b, s)

    def never_vanishes(self, alpha):
        if alpha != self.p:
            return "|b^(s-p)| != |a^(s-p)| off the line Re s = p"
        return None

    def power_terms(self):
        return (PowerTerm(self.norm, self.p, self.a, self.b),)

    def to_dict(self):
        return {"kind": self.kind, "p": self.p, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class SlowlyVarying(Law):
    """Tail min(1, 1/log x) on [e, inf)."""

    kind: ClassVar[str] = "slowvar"
    upper_abscissa: ClassVar[float] = 0.0
    slowly_varying: ClassVar[bool] = True

    def sf(self, x):
        x = _arr(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x > math.e, 1.0 / np.log(np.maximum(x, math.e)), 1.0)

    def pdf(self, x):
        x = _arr(x)
        xs = np.maximum(x, math.e)
        return np.where(x > math.e, 1.0 / (xs * np.log(xs) ** 2), 0.0)

    def support(self):
        return (math.e, math.inf)

    def breakpoints(self):
        return (math.e,)

    def isf(self, v):
        v = _arr(v)
        with np.errstate(divide="ignore", over="ignore"):
            return np.exp(1.0 / v)

    def mellin(self, s):
        s = np.asarray(s, dtype=complex)
        if np.any(s.real >= 0):
            raise MomentDivergence("slowly varying law has no positive moments")
        return None

    @property
    def tail_index(self):
        return 0.0

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class Symmetrized(Law):
    """Law of eps * |Y| where eps is an independent fair sign."""

    base: Law = field(default_factory=Pareto)
    kind: ClassVar[str] = "sym"

    @property
    def slowly_varying(self):
        return self.base.slowly_varying

    def sf(self, x):
        x = _arr(x)
        ax = np.abs(x)
        right = 0.5 * self.base.sf(ax)
        left = 1.0 - 0.5 * (self.base.sf(ax) + self.base.atom_mass(ax))
        return np.where(x >= 0, right, left)

    def pdf(self, x):
        return 0.5 * self.base.pdf(np.abs(_arr(x)))

    def atoms(self):
        out = []
        for loc, w in self.base.atoms():
            out.append((-loc, 0.5 * w))
            out.append((loc, 0.5 * w))
        return tuple(sorted(out))

    def support(self):
        hi = self.base.support()[1]
        return (-hi, hi)

    @property
    def tail_index(self):
        return self.base.tail_index

    def to_dict(self):
        return {"kind": self.kind, "base": self.base.to_dict()}


# ---------------------------------------------------------------------------
# log-periodic construction


@dataclass(frozen=True)
class CounterexampleSpec:
    """Parameters of the log-periodic measure g * nu_alpha and its noise law.

    g(x) = 1 + a cos(theta0 log x) + b sin(theta0 log x); ``trunc`` is the
    level below which the measure is replaced by a point mass at 1.
    """

    alpha: float
    theta0: float
    a: float
    b: float = 0.0
    trunc: Optional[float] = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.theta0 > 0:
            raise ValueError("theta0 must be positive")
        r2 = self.a * self.a + self.b * self.b
        if r2 > 1.0 + 1e-15:
            raise ValueError("a^2 + b^2 must not exceed 1 (g would go negative)")
        if self.trunc is not None and not self.trunc > 0:
            raise ValueError("trunc must be positive")

    @property
    def period(self) -> float:
        """Multiplicative period of g."""
        return math.exp(2 * math.pi / self.theta0)

    def g(self, x):
        u = self.theta0 * np.log(_arr(x))
        return 1.0 + self.a * np.cos(u) + self.b * np.sin(u)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "theta0": self.theta0, "a": self.a, "b": self.b,
                "trunc": self.trunc}

    @classmethod
    def from_dict(cls, d: dict) -> "CounterexampleSpec":
        return cls(float(d["alpha"]), float(d["theta0"]), float(d["a"]), float(d.get("b", 0.0)),
                   None if d.get("trunc") is None else float(d["trunc"]))


def counterexample_tail(spec: CounterexampleSpec, x):
    """nu(x, inf) for nu(dz) = g(z) alpha z^(-alpha-1) dz, in closed form."""
    x = _arr(x)
    if np.any(x <= 0):
        raise ValueError("x must be positive")
    al, th = spec.alpha, spec.theta0
    u = th * np.log(x)
    c, s = np.cos(u), np.sin(u)
    osc = al * (spec.a * (al * c - th * s) + spec.b * (al * s + th * c)) / (al * al + th * th)
    return np.power(x, -al) * (1.0 + osc)


def default_trunc(spec: CounterexampleSpec) -> float:
    """Smallest power of two b0 with nu(b0, inf) <= 1/2."""
    k = -60
    while float(counterexample_tail(spec, 2.0**k)) > 0.5:
        k += 1
    return 2.0**k


@dataclass(frozen=True)
class CounterexampleLaw(Law):
    """nu restricted to (trunc, inf) plus the defective mass placed at 1."""

    spec: CounterexampleSpec = None  # type: ignore[assignment]
    kind: ClassVar[str] = "counterexample"

    def __post_init__(self):
        if self.spec is None:
            raise ValueError("counterexample law needs a spec")
        if self.spec.trunc is None:
            object.__setattr__(self, "spec", _with_trunc(self.spec, default_trunc(self.spec)))
        if self.upper_mass > 1.0 + 1e-15:
            raise ValueError(
                f"trunc too small: nu({self.spec.trunc:g}, inf) = {self.upper_mass:.6g} > 1")

    @property
    def trunc(self) -> float:
        return float(self.spec.trunc)

    @property
    def upper_mass(self) -> float:
        return float(counterexample_tail(self.spec, self.spec.trunc))

    @property
    def point_mass(self) -> float:
        return max(0.0, 1.0 - self.upper_mass)

    @property
    def upper_abscissa(self):
        return self.spec.alpha

    def sf(self, x):
        x = _arr(x)
        t = self.trunc
        xs = np.maximum(x, t)
        out = counterexample_tail(self.spec, np.where(xs > 0, xs, t))
        return out + np.where(x < 1.0, self.point_mass, 0.0)

    def pdf(self, x):
        x = _arr(x)
        xs = np.maximum(x, self.trunc)
        dens = self.spec.g(xs) * self.spec.alpha * np.power(xs, -self.spec.alpha - 1)
        return np.where(x > self.trunc, dens, 0.0)

    def atoms(self):
        return ((1.0, self.point_mass),) if self.point_mass > 0 else ()

    def support(self):
        return (min(1.0, self.trunc), math.inf)

    def breakpoints(self):
        return tuple(sorted({1.0, self.trunc}))

    def power_terms(self):
        sp, al, t = self.spec, self.spec.alpha, self.trunc
        half = 0.5 * complex(sp.a, -sp.b)
        return (
            PowerTerm(al, al, t, math.inf),
            PowerTerm(al * half, complex(al, -sp.theta0), t, math.inf),
            PowerTerm(al * half.conjugate(), complex(al, sp.theta0), t, math.inf),
        )

    def mellin(self, s):
        s = np.asarray(s, dtype=complex)
        if np.any(s.real >= self.spec.alpha):
            raise MomentDivergence("counterexample law has no moment of order >= alpha")
        out = np.full(s.shape, self.point_mass, dtype=complex)
        for term in self.power_terms():
            out = out + power_piece_integral(term.c, term.p, term.a, term.b, s)
        return out

    def to_dict(self):
        return {"kind": self.kind, **self.spec.to_dict()}


def _with_trunc(spec: CounterexampleSpec, trunc: float) -> CounterexampleSpec:
    return CounterexampleSpec(spec.alpha, spec.theta0, spec.a, spec.b, trunc)


# ---------------------------------------------------------------------------
# parsing and serialization

_SIMPLE = {
    "pareto": lambda a: Pareto(*a),
    "uniform": lambda a: Uniform(*a),
    "gamma": lambda a: Gamma(*a),
    "lognormal": lambda a: LogNormal(*a),
    "abscauchy": lambda a: AbsCauchy(),
    "twopoint": lambda a: Discrete.two_point(*a),
    "point": lambda a: Discrete.point(*a),
    "truncpow": lambda a: TruncatedPower(*a),
    "slowvar": lambda a: SlowlyVarying(),
}


def parse_law(text: str) -> Law:
    """Parse ``kind[:p1,p2,...]``; ``sym:<law>`` symmetrizes.

    Examples: ``gamma:2,1``, ``pareto:3``, ``twopoint:1,2.718,0.73``,
    ``counterexample:1,4.5324,0.9,0`` (alpha, theta0, a, b[, trunc]).
    """
    text = text.strip()
    if text.startswith("sym:"):
        return Symmetrized(parse_law(text[4:]))
    kind, _, rest = text.partition(":")
    kind = kind.lower()
    args = [float(v) for v in rest.split(",")] if rest else []
    if kind == "counterexample":
        if len(args) not in (4, 5):
            raise ValueError("counterexample needs alpha,theta0,a,b[,trunc]")
        return CounterexampleLaw(CounterexampleSpec(*args))
    if kind == "discrete":
        raise ValueError("use JSON for general discrete laws")
    if kind not in _SIMPLE:
        raise ValueError(f"unknown distribution kind {kind!r}")
    try:
        return _SIMPLE[kind](args)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {kind}: {rest!r}") from exc


def law_from_dict(d: dict) -> Law:
    kind = d["kind"]
    if kind == "pareto":
        return Pareto(d["alpha"])
    if kind == "uniform":
        return Uniform(d["lo"], d["hi"])
    if kind == "gamma":
        return Gamma(d["shape"], d["rate"])
    if kind == "lognormal":
        return LogNormal(d["mu"], d["sigma"])
    if kind == "abscauchy":
        return AbsCauchy()
    if kind == "discrete":
        vals, ps = zip(*d["atoms"])
        return Discrete(tuple(vals), tuple(ps))
    if kind == "truncpow":
        return TruncatedPower(d["p"], d["a"], d["b"])
    if kind == "slowvar":
        return SlowlyVarying()
    if kind == "sym":
        return Symmetrized(law_from_dict(d["base"]))
    if kind == "counterexample":
        return CounterexampleLaw(CounterexampleSpec.from_dict(d))
    raise ValueError(f"unknown distribution kind {kind!r}")
